use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{angle_difference, rollout, PendulumParams, PendulumState};
use crate::continuous::{qlg_from_matrices, water_filling, QlgResult};
use crate::empowerment::{EmpowermentMap, Method, Raster};
use crate::error::{invalid_param, Result};
use crate::exec;

/// Central-difference perturbation used for the local linearization.
pub const LINEARIZATION_STEP: f64 = 1e-4;

/// Sensitivity of the final `(φ, φ̇)` to each action of the sequence,
/// evaluated around the all-zero sequence. Returns a `2 × horizon` matrix.
pub fn local_linearization(params: &PendulumParams, state: PendulumState) -> DMatrix<f64> {
    linearization_with_step(params, state, LINEARIZATION_STEP)
}

pub(crate) fn linearization_with_step(
    params: &PendulumParams,
    state: PendulumState,
    delta: f64,
) -> DMatrix<f64> {
    let n = params.horizon;
    let mut t = DMatrix::zeros(2, n);
    let mut actions = vec![0.0; n];
    for j in 0..n {
        actions[j] = delta;
        let plus = rollout(params, state, &actions);
        actions[j] = -delta;
        let minus = rollout(params, state, &actions);
        actions[j] = 0.0;
        t[(0, j)] = angle_difference(plus.phi, minus.phi) / (2.0 * delta);
        t[(1, j)] = (plus.phi_dot - minus.phi_dot) / (2.0 * delta);
    }
    t
}

/// Quasi-linear Gaussian empowerment of one pendulum state.
pub fn pendulum_empowerment(params: &PendulumParams, state: PendulumState) -> Result<QlgResult> {
    let t = local_linearization(params, state);
    let k = DMatrix::identity(2, 2) * (params.noise_std * params.noise_std);
    qlg_from_matrices(&t, &k, params.power)
}

/// Regular grid over `(φ, φ̇)` used for landscapes.
///
/// Columns sweep φ over `[-π, π)` left to right; rows sweep φ̇ from
/// `+phidot_range` at the top to `-phidot_range` at the bottom. Values sit at
/// cell centers, so the hanging rest state lies at the center of the raster
/// and the grid maps onto itself under `(φ, φ̇) → (-φ, -φ̇)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LandscapeGrid {
    pub phi_cells: usize,
    pub phidot_cells: usize,
    /// rad/s
    pub phidot_range: f64,
}

impl Default for LandscapeGrid {
    fn default() -> Self {
        Self {
            phi_cells: 64,
            phidot_cells: 64,
            phidot_range: 8.0,
        }
    }
}

impl LandscapeGrid {
    pub fn validate(&self) -> Result<()> {
        if self.phi_cells == 0 || self.phidot_cells == 0 {
            return Err(invalid_param("grid", "cell counts must be positive"));
        }
        if !(self.phidot_range > 0.0) || !self.phidot_range.is_finite() {
            return Err(invalid_param("phidot_range", "must be > 0"));
        }
        Ok(())
    }

    pub fn raster(&self) -> Raster {
        Raster {
            width: self.phi_cells,
            height: self.phidot_cells,
        }
    }

    pub fn len(&self) -> usize {
        self.phi_cells * self.phidot_cells
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// State at the center of raster cell `index`.
    pub fn state(&self, index: usize) -> PendulumState {
        let col = index % self.phi_cells;
        let row = index / self.phi_cells;
        let phi_width = 2.0 * PI / self.phi_cells as f64;
        let v_width = 2.0 * self.phidot_range / self.phidot_cells as f64;
        PendulumState::new(
            -PI + (col as f64 + 0.5) * phi_width,
            self.phidot_range - (row as f64 + 0.5) * v_width,
        )
    }

    /// Index of the cell mirrored through the origin.
    pub fn negated(&self, index: usize) -> usize {
        self.len() - 1 - index
    }
}

fn sorted_singular_values(params: &PendulumParams, state: PendulumState) -> Vec<f64> {
    let t = local_linearization(params, state) * (1.0 / params.noise_std);
    let mut s: Vec<f64> = t.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Empowerment of every grid cell under the parameters' power budget.
pub fn pendulum_empowerment_map(params: &PendulumParams, grid: &LandscapeGrid) -> Result<EmpowermentMap> {
    params.validate()?;
    grid.validate()?;
    let values = exec::try_map_indexed(grid.len(), |i| {
        pendulum_empowerment(params, grid.state(i)).map(|r| Some(r.bits))
    })?;
    Ok(EmpowermentMap::new(
        map_id(params),
        params.horizon,
        Method::Qlg,
        Some(grid.raster()),
        values,
    ))
}

fn map_id(params: &PendulumParams) -> String {
    format!("pendulum(dt={},P={},n={})", params.delta_t, params.power, params.horizon)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanEntry {
    pub delta_t: f64,
    pub power: f64,
    pub map: EmpowermentMap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub grid: LandscapeGrid,
    pub delta_ts: Vec<f64>,
    pub powers: Vec<f64>,
    /// Row-major over `(delta_t, power)`.
    pub entries: Vec<ScanEntry>,
}

impl ScanResult {
    pub fn map(&self, dt_index: usize, power_index: usize) -> &EmpowermentMap {
        &self.entries[dt_index * self.powers.len() + power_index].map
    }
}

/// Landscapes for every `(Δt, P)` pair.
///
/// The linearization depends only on Δt, so singular values are computed once
/// per cell and Δt and then water-filled for each power.
pub fn power_scan(
    base: &PendulumParams,
    delta_ts: &[f64],
    powers: &[f64],
    grid: &LandscapeGrid,
) -> Result<ScanResult> {
    grid.validate()?;
    if delta_ts.is_empty() || powers.is_empty() {
        return Err(invalid_param("scan", "need at least one delta_t and one power"));
    }
    let mut entries = Vec::with_capacity(delta_ts.len() * powers.len());
    for &delta_t in delta_ts {
        let params = PendulumParams { delta_t, ..*base };
        params.validate()?;
        for &power in powers {
            PendulumParams { power, ..params }.validate()?;
        }
        let sigmas = exec::map_indexed(grid.len(), |i| sorted_singular_values(&params, grid.state(i)));
        for &power in powers {
            let p = PendulumParams { power, ..params };
            let values = sigmas
                .iter()
                .map(|s| water_filling(s, power).map(|w| Some(w.capacity_bits)))
                .collect::<Result<Vec<_>>>()?;
            entries.push(ScanEntry {
                delta_t,
                power,
                map: EmpowermentMap::new(map_id(&p), p.horizon, Method::Qlg, Some(grid.raster()), values),
            });
        }
    }
    Ok(ScanResult {
        grid: *grid,
        delta_ts: delta_ts.to_vec(),
        powers: powers.to_vec(),
        entries,
    })
}

/// State regions compared when looking for landscape inversions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InversionRegions {
    /// First state: `|φ| <= rest_phi` and `|φ̇| <= rest_phidot`.
    pub rest_phi: f64,
    pub rest_phidot: f64,
    /// Second state: `swing_phi_min <= |φ| <= swing_phi_max`.
    pub swing_phi_min: f64,
    pub swing_phi_max: f64,
}

impl Default for InversionRegions {
    fn default() -> Self {
        Self {
            rest_phi: PI / 8.0,
            rest_phidot: 1.0,
            swing_phi_min: PI / 4.0,
            swing_phi_max: 3.0 * PI / 4.0,
        }
    }
}

impl InversionRegions {
    fn near_rest(&self, s: PendulumState) -> bool {
        s.phi.abs() <= self.rest_phi && s.phi_dot.abs() <= self.rest_phidot
    }

    fn mid_swing(&self, s: PendulumState) -> bool {
        (self.swing_phi_min..=self.swing_phi_max).contains(&s.phi.abs())
    }
}

/// A pair of states whose empowerment ordering flips between two powers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inversion {
    pub delta_t: f64,
    pub power_low: f64,
    pub power_high: f64,
    pub rest_state: PendulumState,
    pub swing_state: PendulumState,
    /// `[E_low(rest), E_low(swing), E_high(rest), E_high(swing)]`
    pub values: [f64; 4],
}

impl Inversion {
    /// Smaller of the two ordering gaps.
    pub fn margin(&self) -> f64 {
        let [lr, ls, hr, hs] = self.values;
        (ls - lr).min(hr - hs)
    }
}

/// For every Δt and every pair of powers `P_low < P_high`, reports the
/// strongest pair (rest-region state, swing-region state) with
/// `E_low(rest) < E_low(swing)` and `E_high(rest) > E_high(swing)`.
pub fn find_inversions(scan: &ScanResult, regions: &InversionRegions) -> Vec<Inversion> {
    let grid = &scan.grid;
    let rest: Vec<usize> = (0..grid.len()).filter(|&i| regions.near_rest(grid.state(i))).collect();
    let swing: Vec<usize> = (0..grid.len()).filter(|&i| regions.mid_swing(grid.state(i))).collect();
    let mut found = Vec::new();
    for (di, &delta_t) in scan.delta_ts.iter().enumerate() {
        for lo in 0..scan.powers.len() {
            for hi in 0..scan.powers.len() {
                if scan.powers[lo] >= scan.powers[hi] {
                    continue;
                }
                let (low, high) = (scan.map(di, lo), scan.map(di, hi));
                let mut best: Option<Inversion> = None;
                for &r in &rest {
                    let (Some(lr), Some(hr)) = (low.get(r), high.get(r)) else { continue };
                    for &s in &swing {
                        let (Some(ls), Some(hs)) = (low.get(s), high.get(s)) else { continue };
                        let margin = (ls - lr).min(hr - hs);
                        if margin > 1e-9 && best.as_ref().is_none_or(|b| margin > b.margin()) {
                            best = Some(Inversion {
                                delta_t,
                                power_low: scan.powers[lo],
                                power_high: scan.powers[hi],
                                rest_state: grid.state(r),
                                swing_state: grid.state(s),
                                values: [lr, ls, hr, hs],
                            });
                        }
                    }
                }
                found.extend(best);
            }
        }
    }
    found
}
