//! Torque-limited simple pendulum.
//!
//! The state is `(φ, φ̇)` with `φ = 0` hanging at rest and `φ = ±π` upright.
//! An action is an angular acceleration held constant for `Δt`; the motion
//! follows `φ̈ = -(g/l) sin φ + a` with no damping.

mod control;
mod landscape;

pub use control::{greedy_control, swing_up_summary, SwingUpSummary, Trajectory, TrajectoryPoint};
pub use landscape::{
    find_inversions, local_linearization, pendulum_empowerment, pendulum_empowerment_map,
    power_scan, Inversion, InversionRegions, LandscapeGrid, ScanEntry, ScanResult,
};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid_param, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PendulumParams {
    /// m/s²
    pub gravity: f64,
    /// m
    pub length: f64,
    /// Duration each action is held, s.
    pub delta_t: f64,
    /// Number of actions in the open-loop sequence.
    pub horizon: usize,
    /// Total action power budget.
    pub power: f64,
    /// Standard deviation of the additive Gaussian noise per state dimension.
    pub noise_std: f64,
    /// Number of candidate accelerations considered by the controller.
    pub a_grid: usize,
    /// Integrator step; `None` means `Δt / 10`.
    pub substep: Option<f64>,
}

impl Default for PendulumParams {
    fn default() -> Self {
        Self {
            gravity: 9.81,
            length: 1.0,
            delta_t: 0.3,
            horizon: 3,
            power: 1.0,
            noise_std: 0.01,
            a_grid: 5,
            substep: None,
        }
    }
}

impl PendulumParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("gravity", self.gravity),
            ("length", self.length),
            ("delta_t", self.delta_t),
            ("power", self.power),
            ("noise_std", self.noise_std),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(invalid_param(name, format!("must be > 0, got {v}")));
            }
        }
        if self.horizon < 1 {
            return Err(invalid_param("horizon", "must be >= 1"));
        }
        if self.a_grid < 2 {
            return Err(invalid_param("a_grid", "must be >= 2"));
        }
        if let Some(h) = self.substep {
            if !(h > 0.0) || !h.is_finite() {
                return Err(invalid_param("substep", format!("must be > 0, got {h}")));
            }
        }
        Ok(())
    }

    pub fn substep(&self) -> f64 {
        self.substep.unwrap_or(self.delta_t / 10.0)
    }

    /// Largest candidate acceleration magnitude, `√P`.
    pub fn max_acceleration(&self) -> f64 {
        self.power.sqrt()
    }

    /// Evenly spaced candidate accelerations in `[-√P, √P]`.
    pub fn candidate_actions(&self) -> Vec<f64> {
        let a_max = self.max_acceleration();
        let k = self.a_grid;
        (0..k)
            .map(|i| -a_max + 2.0 * a_max * i as f64 / (k - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PendulumState {
    /// Angle in `[-π, π)`.
    pub phi: f64,
    pub phi_dot: f64,
}

impl PendulumState {
    pub fn new(phi: f64, phi_dot: f64) -> Self {
        Self {
            phi: wrap_angle(phi),
            phi_dot,
        }
    }

    pub const REST: Self = Self { phi: 0.0, phi_dot: 0.0 };
    pub const UPRIGHT: Self = Self { phi: -PI, phi_dot: 0.0 };

    /// Angular distance to the upright position, in `[0, π]`.
    pub fn distance_from_upright(&self) -> f64 {
        PI - self.phi.abs()
    }

    /// `½φ̇² - (g/l) cos φ`, conserved when unforced.
    pub fn energy(&self, params: &PendulumParams) -> f64 {
        0.5 * self.phi_dot * self.phi_dot - params.gravity / params.length * self.phi.cos()
    }
}

/// Wraps an angle into `[-π, π)`.
pub fn wrap_angle(phi: f64) -> f64 {
    let w = (phi + PI).rem_euclid(2.0 * PI) - PI;
    // rem_euclid can round up to exactly 2π
    if w >= PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// Shortest signed arc from `from` to `to`.
pub fn angle_difference(to: f64, from: f64) -> f64 {
    wrap_angle(to - from)
}

fn derivative(params: &PendulumParams, phi: f64, phi_dot: f64, a: f64) -> (f64, f64) {
    (phi_dot, -params.gravity / params.length * phi.sin() + a)
}

/// Integrates unwrapped `(φ, φ̇)` over `duration` with fixed RK4 substeps.
fn integrate(params: &PendulumParams, mut phi: f64, mut phi_dot: f64, a: f64, duration: f64) -> (f64, f64) {
    let steps = (duration / params.substep()).round().max(1.0) as usize;
    let h = duration / steps as f64;
    for _ in 0..steps {
        let (k1p, k1v) = derivative(params, phi, phi_dot, a);
        let (k2p, k2v) = derivative(params, phi + 0.5 * h * k1p, phi_dot + 0.5 * h * k1v, a);
        let (k3p, k3v) = derivative(params, phi + 0.5 * h * k2p, phi_dot + 0.5 * h * k2v, a);
        let (k4p, k4v) = derivative(params, phi + h * k3p, phi_dot + h * k3v, a);
        phi += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        phi_dot += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }
    (phi, phi_dot)
}

/// Applies acceleration `a` for `Δt`.
pub fn dynamics_step(params: &PendulumParams, state: PendulumState, a: f64) -> PendulumState {
    let (phi, phi_dot) = integrate(params, state.phi, state.phi_dot, a, params.delta_t);
    PendulumState::new(phi, phi_dot)
}

/// Applies an open-loop action sequence, one `Δt` per action.
pub fn rollout(params: &PendulumParams, state: PendulumState, actions: &[f64]) -> PendulumState {
    actions
        .iter()
        .fold(state, |s, &a| dynamics_step(params, s, a))
}
