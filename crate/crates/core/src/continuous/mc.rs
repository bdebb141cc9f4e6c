//! Monte Carlo Blahut-Arimoto for Gaussian action-outcome models.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid_param, Result};
use crate::exec;
use crate::infotheory::{ba_iterate, BlahutArimoto, ProbabilityVector};

/// Densities are floored here before taking logs.
pub const DENSITY_FLOOR: f64 = 1e-300;

/// `s | a_v ~ N(μ_v, diag(σ²_v))` for a finite set of candidate actions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianActionModel {
    pub means: Vec<Vec<f64>>,
    pub variances: Vec<Vec<f64>>,
}

impl GaussianActionModel {
    pub fn new(means: Vec<Vec<f64>>, variances: Vec<Vec<f64>>) -> Result<Self> {
        let m = Self { means, variances };
        m.validate()?;
        Ok(m)
    }

    /// Every action shares the same isotropic variance.
    pub fn isotropic(means: Vec<Vec<f64>>, variance: f64) -> Result<Self> {
        let variances = means.iter().map(|m| vec![variance; m.len()]).collect();
        Self::new(means, variances)
    }

    pub fn n_actions(&self) -> usize {
        self.means.len()
    }

    pub fn dim(&self) -> usize {
        self.means.first().map_or(0, Vec::len)
    }

    pub fn validate(&self) -> Result<()> {
        if self.means.is_empty() {
            return Err(invalid_param("means", "need at least one action"));
        }
        let d = self.dim();
        if d == 0 {
            return Err(invalid_param("means", "sensor dimension must be >= 1"));
        }
        if self.variances.len() != self.means.len() {
            return Err(invalid_param("variances", "need one variance vector per action"));
        }
        for (v, (mu, var)) in self.means.iter().zip(&self.variances).enumerate() {
            if mu.len() != d || var.len() != d {
                return Err(invalid_param(
                    "means",
                    format!("action {v} has dimension {} / {}, expected {d}", mu.len(), var.len()),
                ));
            }
            if mu.iter().any(|x| !x.is_finite()) {
                return Err(invalid_param("means", format!("action {v} has a non-finite mean")));
            }
            if var.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
                return Err(invalid_param(
                    "variances",
                    format!("action {v} has a non-positive variance"),
                ));
            }
        }
        Ok(())
    }

    /// Density of `s` under action `v`.
    pub fn density(&self, v: usize, s: &[f64]) -> f64 {
        let mut log_p = 0.0;
        for ((x, mu), var) in s.iter().zip(&self.means[v]).zip(&self.variances[v]) {
            let z = x - mu;
            log_p -= 0.5 * (z * z / var + (2.0 * PI * var).ln());
        }
        log_p.exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McParams {
    /// Samples drawn per action.
    pub n_mc: usize,
    pub epsilon: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for McParams {
    fn default() -> Self {
        Self {
            n_mc: 1000,
            epsilon: 1e-8,
            max_iter: 500,
            seed: 0,
        }
    }
}

impl McParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_mc < 1 {
            return Err(invalid_param("n_mc", "must be >= 1"));
        }
        BlahutArimoto::new(self.epsilon, self.max_iter).validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McResult {
    pub bits: f64,
    pub optimal_input: ProbabilityVector,
    pub iterations: usize,
    pub converged: bool,
}

/// Sample generator for action `v`: one ChaCha stream per action index.
fn action_rng(seed: u64, action: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(action as u64);
    rng
}

/// Estimates the capacity of a Gaussian action model.
///
/// `n_mc` outcomes are drawn once per action up front and every cross
/// density `p(s̃_{v,j} | a_μ)` is tabulated. The Blahut-Arimoto loop then
/// replaces the integral in `d_v` with the sample mean
/// `(1/N) Σ_j ln[p(s̃_{v,j}|a_v) / Σ_i p(s̃_{v,j}|a_i) p_i]`.
pub fn mc_empowerment(model: &GaussianActionModel, params: &McParams) -> Result<McResult> {
    model.validate()?;
    params.validate()?;
    let n = model.n_actions();
    let n_mc = params.n_mc;
    let dim = model.dim();

    // densities[v][j * n + mu] = p(s̃_{v,j} | a_mu)
    let densities: Vec<Vec<f64>> = exec::map_indexed(n, |v| {
        let mut rng = action_rng(params.seed, v);
        let mut sample = vec![0.0; dim];
        let mut table = Vec::with_capacity(n_mc * n);
        for _ in 0..n_mc {
            for (k, s) in sample.iter_mut().enumerate() {
                let z: f64 = StandardNormal.sample(&mut rng);
                *s = model.means[v][k] + model.variances[v][k].sqrt() * z;
            }
            for mu in 0..n {
                table.push(model.density(mu, &sample).max(DENSITY_FLOOR));
            }
        }
        table
    });

    let divergences = |p: &[f64], d: &mut [f64]| {
        let values = exec::map_indexed(n, |v| {
            let table = &densities[v];
            let mut acc = 0.0;
            for j in 0..n_mc {
                let row = &table[j * n..(j + 1) * n];
                let mix: f64 = row.iter().zip(p).map(|(dens, pi)| dens * pi).sum();
                acc += (row[v] / mix).ln();
            }
            acc / n_mc as f64
        });
        d.copy_from_slice(&values);
    };
    let ba = BlahutArimoto::new(params.epsilon, params.max_iter);
    let out = ba_iterate(n, divergences, &ba, None);
    Ok(McResult {
        bits: out.estimate_bits,
        optimal_input: ProbabilityVector::from_unchecked(out.input),
        iterations: out.iterations,
        converged: out.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_actions_carry_nothing() {
        let m = GaussianActionModel::isotropic(vec![vec![0.3], vec![0.3]], 1.0).unwrap();
        let r = mc_empowerment(&m, &McParams::default()).unwrap();
        assert!(r.bits.abs() <= 0.02, "{}", r.bits);
    }

    #[test]
    fn far_apart_means() {
        let two = GaussianActionModel::isotropic(vec![vec![0.0], vec![10.0]], 1.0).unwrap();
        let r = mc_empowerment(&two, &McParams::default()).unwrap();
        assert!((r.bits - 1.0).abs() < 1e-3, "{}", r.bits);
        let four = GaussianActionModel::isotropic(
            (0..4).map(|i| vec![10.0 * i as f64]).collect(),
            1.0,
        )
        .unwrap();
        let r = mc_empowerment(&four, &McParams::default()).unwrap();
        assert!((r.bits - 2.0).abs() < 1e-2, "{}", r.bits);
    }

    #[test]
    fn same_seed_same_bits() {
        let m = GaussianActionModel::isotropic(
            vec![vec![0.0, 0.0], vec![1.0, 0.5], vec![-0.5, 1.5]],
            0.5,
        )
        .unwrap();
        let p = McParams { seed: 42, ..McParams::default() };
        let a = mc_empowerment(&m, &p).unwrap();
        let b = mc_empowerment(&m, &p).unwrap();
        assert_eq!(a.bits.to_bits(), b.bits.to_bits());
        assert_eq!(a.optimal_input, b.optimal_input);
        let seq = exec::sequential(|| mc_empowerment(&m, &p).unwrap());
        assert_eq!(a.bits.to_bits(), seq.bits.to_bits());
        let other = mc_empowerment(&m, &McParams { seed: 43, ..p }).unwrap();
        assert_ne!(a.bits.to_bits(), other.bits.to_bits());
    }

    #[test]
    fn model_validation() {
        assert!(GaussianActionModel::new(vec![], vec![]).is_err());
        assert!(GaussianActionModel::new(vec![vec![0.0]], vec![vec![0.0]]).is_err());
        assert!(GaussianActionModel::new(vec![vec![0.0], vec![0.0, 1.0]], vec![vec![1.0], vec![1.0, 1.0]]).is_err());
        assert!(mc_empowerment(
            &GaussianActionModel::isotropic(vec![vec![0.0]], 1.0).unwrap(),
            &McParams { n_mc: 0, ..McParams::default() }
        )
        .is_err());
    }
}
