use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use super::{DiscreteChannel, ProbabilityVector};
use crate::error::{invalid_param, Result};

/// Input probabilities below this are pinned here and renormalized; the
/// multiplicative update can never revive an exact zero.
const PROBABILITY_FLOOR: f64 = 1e-300;

/// Outcome of a capacity computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityResult {
    pub capacity_bits: f64,
    pub optimal_input: ProbabilityVector,
    pub iterations: usize,
    pub converged: bool,
    /// `max_v d_v` at the returned input; the true capacity lies in
    /// `[capacity_bits, upper_bound_bits]`.
    pub upper_bound_bits: f64,
}

/// Blahut-Arimoto solver settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BlahutArimoto {
    /// Stop once successive estimates differ by less than this many bits.
    pub epsilon: f64,
    pub max_iter: usize,
}

impl Default for BlahutArimoto {
    fn default() -> Self {
        Self {
            epsilon: 1e-8,
            max_iter: 500,
        }
    }
}

impl BlahutArimoto {
    pub fn new(epsilon: f64, max_iter: usize) -> Self {
        Self { epsilon, max_iter }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(invalid_param("epsilon", format!("must be > 0, got {}", self.epsilon)));
        }
        if self.max_iter < 1 {
            return Err(invalid_param("max_iter", "must be >= 1"));
        }
        Ok(())
    }

    pub fn solve(&self, channel: &DiscreteChannel) -> Result<CapacityResult> {
        self.validate()?;
        Ok(solve_channel(channel, self, None))
    }

    /// Like [`solve`](Self::solve), also returning every estimate `E_k` in bits.
    pub fn solve_traced(&self, channel: &DiscreteChannel) -> Result<(CapacityResult, Vec<f64>)> {
        self.validate()?;
        let mut trace = Vec::new();
        let result = solve_channel(channel, self, Some(&mut trace));
        Ok((result, trace))
    }
}

/// Channel capacity in bits with its capacity-achieving input distribution.
pub fn blahut_arimoto(
    channel: &DiscreteChannel,
    epsilon: f64,
    max_iter: usize,
) -> Result<CapacityResult> {
    BlahutArimoto::new(epsilon, max_iter).solve(channel)
}

fn solve_channel(
    channel: &DiscreteChannel,
    params: &BlahutArimoto,
    trace: Option<&mut Vec<f64>>,
) -> CapacityResult {
    let mut q = vec![0.0; channel.n_outputs()];
    let divergences = |p: &[f64], d: &mut [f64]| {
        q.iter_mut().for_each(|x| *x = 0.0);
        for (pv, row) in p.iter().zip(channel.rows()) {
            for (qs, w) in q.iter_mut().zip(row) {
                *qs += pv * w;
            }
        }
        for (dv, row) in d.iter_mut().zip(channel.rows()) {
            *dv = row
                .iter()
                .zip(&q)
                .filter(|(w, _)| **w > 0.0)
                .map(|(w, qs)| w * (w / qs).ln())
                .sum();
        }
    };
    let out = iterate(channel.n_inputs(), divergences, params, trace);
    let bound = (channel.n_inputs().min(channel.n_outputs()) as f64).log2();
    CapacityResult {
        capacity_bits: out.estimate_bits.clamp(0.0, bound),
        optimal_input: ProbabilityVector::from_unchecked(out.input),
        iterations: out.iterations,
        converged: out.converged,
        upper_bound_bits: out.upper_bound_bits,
    }
}

pub(crate) struct IterationOutcome {
    pub input: Vec<f64>,
    pub estimate_bits: f64,
    pub upper_bound_bits: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// The Blahut-Arimoto fixed-point loop, shared by the exact discrete solver
/// and the Monte Carlo estimator.
///
/// `divergences(p, d)` must fill `d[v]` with `d_v = E_{s~p(s|v)} ln[p(s|v) / Σ_i p_i p(s|i)]`
/// in nats. Starting from the uniform input, each round computes `d` at the
/// current input, records `E = Σ_v p_v d_v`, stops if `|E - E_prev|` drops
/// below `epsilon` bits, and otherwise moves to `p_v ∝ p_v exp(d_v)`.
pub(crate) fn iterate<F>(
    n_inputs: usize,
    mut divergences: F,
    params: &BlahutArimoto,
    mut trace: Option<&mut Vec<f64>>,
) -> IterationOutcome
where
    F: FnMut(&[f64], &mut [f64]),
{
    let mut p = vec![1.0 / n_inputs as f64; n_inputs];
    let mut d = vec![0.0; n_inputs];
    let mut previous: Option<f64> = None;
    let mut estimate = 0.0;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < params.max_iter {
        iterations += 1;
        divergences(&p, &mut d);
        estimate = p.iter().zip(&d).map(|(pv, dv)| pv * dv).sum::<f64>() / LN_2;
        if let Some(t) = trace.as_deref_mut() {
            t.push(estimate);
        }
        if let Some(prev) = previous {
            if (estimate - prev).abs() < params.epsilon {
                converged = true;
                break;
            }
        }
        previous = Some(estimate);
        if iterations == params.max_iter {
            break;
        }

        let d_max = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut z = 0.0;
        for (pv, dv) in p.iter_mut().zip(&d) {
            *pv *= (dv - d_max).exp();
            z += *pv;
        }
        let mut floored = false;
        for pv in p.iter_mut() {
            *pv /= z;
            if *pv < PROBABILITY_FLOOR {
                *pv = PROBABILITY_FLOOR;
                floored = true;
            }
        }
        if floored {
            let z: f64 = p.iter().sum();
            p.iter_mut().for_each(|pv| *pv /= z);
        }
    }

    let upper = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max) / LN_2;
    IterationOutcome {
        input: p,
        estimate_bits: estimate.max(0.0),
        upper_bound_bits: upper.max(estimate),
        iterations,
        converged,
    }
}
