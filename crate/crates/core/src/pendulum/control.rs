use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{dynamics_step, pendulum_empowerment, PendulumParams, PendulumState};
use crate::error::{invalid_param, Result};
use crate::exec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub step: usize,
    pub phi: f64,
    pub phi_dot: f64,
    /// Acceleration applied from this state; `None` on the final state.
    pub action: Option<f64>,
    /// Empowerment of this state.
    pub empowerment: f64,
}

impl TrajectoryPoint {
    pub fn state(&self) -> PendulumState {
        PendulumState {
            phi: self.phi,
            phi_dot: self.phi_dot,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub params: PendulumParams,
    pub seed: u64,
    pub points: Vec<TrajectoryPoint>,
}

impl Trajectory {
    /// `step,phi,phi_dot,action,empowerment`; the final row has an empty action.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,phi,phi_dot,action,empowerment\n");
        for p in &self.points {
            let action = p.action.map(|a| a.to_string()).unwrap_or_default();
            writeln!(out, "{},{},{},{},{}", p.step, p.phi, p.phi_dot, action, p.empowerment).unwrap();
        }
        out
    }

    pub fn empowerment_series(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.empowerment).collect()
    }
}

/// Candidate order used for tie-breaking: smallest |a| first, negative
/// before positive.
fn preference_order(candidates: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (candidates[i], candidates[j]);
        a.abs().total_cmp(&b.abs()).then(a.total_cmp(&b))
    });
    order
}

/// Greedy empowerment-maximizing control.
///
/// At each step every candidate acceleration is scored by the mean
/// empowerment of `mc_rollouts` noisy copies of its noiseless successor;
/// the best candidate is applied without noise. The same noise draws are
/// shared by all candidates of a step, and draws depend only on `seed` and
/// the step index.
pub fn greedy_control(
    params: &PendulumParams,
    start: PendulumState,
    steps: usize,
    mc_rollouts: usize,
    seed: u64,
) -> Result<Trajectory> {
    params.validate()?;
    if mc_rollouts < 1 {
        return Err(invalid_param("mc_rollouts", "must be >= 1"));
    }
    let candidates = params.candidate_actions();
    let order = preference_order(&candidates);
    let mut points = Vec::with_capacity(steps + 1);
    let mut state = start;

    for step in 0..=steps {
        let here = pendulum_empowerment(params, state)?.bits;
        if step == steps {
            points.push(TrajectoryPoint {
                step,
                phi: state.phi,
                phi_dot: state.phi_dot,
                action: None,
                empowerment: here,
            });
            break;
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(step as u64);
        let offsets: Vec<(f64, f64)> = (0..mc_rollouts)
            .map(|_| {
                let a: f64 = StandardNormal.sample(&mut rng);
                let b: f64 = StandardNormal.sample(&mut rng);
                (params.noise_std * a, params.noise_std * b)
            })
            .collect();

        let scores = exec::try_map_indexed(candidates.len(), |c| {
            let next = dynamics_step(params, state, candidates[c]);
            let mut total = 0.0;
            for &(dphi, dv) in &offsets {
                let noisy = PendulumState::new(next.phi + dphi, next.phi_dot + dv);
                total += pendulum_empowerment(params, noisy)?.bits;
            }
            Ok::<f64, crate::Error>(total / mc_rollouts as f64)
        })?;

        let mut best = order[0];
        for &c in &order[1..] {
            if scores[c] > scores[best] {
                best = c;
            }
        }
        let action = candidates[best];
        points.push(TrajectoryPoint {
            step,
            phi: state.phi,
            phi_dot: state.phi_dot,
            action: Some(action),
            empowerment: here,
        });
        state = dynamics_step(params, state, action);
    }

    Ok(Trajectory {
        params: *params,
        seed,
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwingUpSummary {
    /// First step with `|φ| > π - tolerance`.
    pub first_upright_step: Option<usize>,
    /// Longest run of consecutive steps with `|φ| > π - tolerance`.
    pub longest_upright_run: usize,
    /// Whether the empowerment series never decreases.
    pub empowerment_monotone: bool,
    pub tolerance: f64,
}

pub fn swing_up_summary(trajectory: &Trajectory, tolerance: f64) -> SwingUpSummary {
    let mut first = None;
    let mut run = 0;
    let mut longest = 0;
    for p in &trajectory.points {
        if p.state().distance_from_upright() < tolerance {
            first.get_or_insert(p.step);
            run += 1;
            longest = longest.max(run);
        } else {
            run = 0;
        }
    }
    let series = trajectory.empowerment_series();
    SwingUpSummary {
        first_upright_step: first,
        longest_upright_run: longest,
        empowerment_monotone: series.windows(2).all(|w| w[1] >= w[0]),
        tolerance,
    }
}
