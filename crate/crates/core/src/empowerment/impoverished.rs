//! Impoverished empowerment: a fixed budget of action sequences per stage,
//! chained over several stages to reach horizons that cannot be enumerated.

use serde::{Deserialize, Serialize};

use super::channel::{
    assemble_channel, check_budget, decode_sequence, propagate_sequence, reduced_capacity,
    sense_distribution, SensorDist, SolverParams, StateDist,
};
use super::model::Dynamics;
use crate::error::{invalid_param, Result};
use crate::exec;

/// Where the next stage starts from after a selected sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Endpoint {
    /// The single most likely final state; ties go to the smallest state.
    #[default]
    MostLikely,
    /// The full final state distribution.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ImpoverishedParams {
    /// Steps per stage.
    pub segment_n: usize,
    /// Sequences kept per stage.
    pub budget: usize,
    pub segments: usize,
    pub endpoint: Endpoint,
}

impl Default for ImpoverishedParams {
    fn default() -> Self {
        Self {
            segment_n: 3,
            budget: 16,
            segments: 2,
            endpoint: Endpoint::MostLikely,
        }
    }
}

impl ImpoverishedParams {
    pub fn validate(&self) -> Result<()> {
        if self.segment_n < 1 {
            return Err(invalid_param("segment_n", "must be >= 1"));
        }
        if self.segments < 1 {
            return Err(invalid_param("segments", "must be >= 1"));
        }
        if self.budget < 2 {
            return Err(invalid_param("budget", format!("must be >= 2, got {}", self.budget)));
        }
        Ok(())
    }

    /// Total horizon `segment_n · segments`.
    pub fn horizon(&self) -> usize {
        self.segment_n * self.segments
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpoverishedResult {
    /// Capacity of the final stage's selected sequences, each propagated
    /// exactly from the start state.
    pub bits: f64,
    /// Selected full-length sequences, in selection order.
    pub skeleton: Vec<Vec<usize>>,
    /// Capacity reached by the greedy selection at each stage.
    pub stage_bits: Vec<f64>,
    /// Set when the budget exceeded the number of candidates at some stage.
    pub budget_clamped: bool,
}

struct Candidate<S, Z> {
    actions: Vec<usize>,
    continuation: StateDist<S>,
    row: SensorDist<Z>,
}

/// Greedy forward selection of up to `k` rows maximizing channel capacity.
///
/// Every singleton has zero capacity, so selection starts at candidate 0;
/// each round adds the candidate with the largest capacity, ties to the
/// lowest index.
fn greedy_select<Z: Ord + Clone + Send + Sync>(
    rows: &[SensorDist<Z>],
    k: usize,
    params: &SolverParams,
) -> Result<(Vec<usize>, f64)> {
    let mut selected = vec![0];
    let mut chosen = vec![false; rows.len()];
    chosen[0] = true;
    let mut best_bits = 0.0;
    while selected.len() < k {
        let scores = exec::try_map_indexed(rows.len(), |c| -> Result<Option<f64>> {
            if chosen[c] {
                return Ok(None);
            }
            let mut subset: Vec<SensorDist<Z>> = selected.iter().map(|&i| rows[i].clone()).collect();
            subset.push(rows[c].clone());
            let (channel, _) = assemble_channel(&[(1.0, &subset)])?;
            Ok(Some(reduced_capacity(&channel, &params.ba)?.capacity_bits))
        })?;
        let mut best: Option<(usize, f64)> = None;
        for (c, s) in scores.iter().enumerate() {
            if let Some(s) = *s {
                if best.is_none_or(|(_, b)| s > b + 1e-12) {
                    best = Some((c, s));
                }
            }
        }
        let Some((c, s)) = best else { break };
        selected.push(c);
        chosen[c] = true;
        best_bits = s;
    }
    Ok((selected, best_bits))
}

fn continuation<S: Clone>(dist: StateDist<S>, endpoint: Endpoint) -> StateDist<S> {
    match endpoint {
        Endpoint::Exact => dist,
        Endpoint::MostLikely => {
            // dist is sorted by state, so the first maximum is the smallest state
            let mut best: Option<&(S, f64)> = None;
            for e in &dist {
                if best.is_none_or(|b| e.1 > b.1) {
                    best = Some(e);
                }
            }
            best.map(|(s, _)| vec![(s.clone(), 1.0)]).unwrap_or_default()
        }
    }
}

/// Greedy sequence-skeleton approximation of `segment_n · segments`-step
/// empowerment.
///
/// Stage 0 enumerates every `segment_n`-step sequence from `state` and keeps
/// `budget` of them by greedy capacity gain. Each later stage extends every
/// kept sequence by every `segment_n`-step suffix, started from the kept
/// sequence's endpoint, and again keeps `budget`. The reported value is the
/// capacity of the final kept sequences propagated exactly from `state`, so
/// it never exceeds full empowerment at the same horizon.
pub fn impoverished_empowerment<D: Dynamics>(
    model: &D,
    state: &D::State,
    params: &ImpoverishedParams,
    solver: &SolverParams,
) -> Result<ImpoverishedResult> {
    params.validate()?;
    solver.validate()?;
    model.check_state(state)?;
    let n_actions = model.n_actions();
    let per_stage = check_budget(n_actions, params.segment_n, solver.sequence_budget)?;
    let suffixes: Vec<Vec<usize>> = (0..per_stage)
        .map(|i| decode_sequence(i, n_actions, params.segment_n))
        .collect();

    let origin = vec![(state.clone(), 1.0)];
    let mut kept: Vec<Candidate<D::State, D::Sensor>> = vec![Candidate {
        actions: Vec::new(),
        continuation: origin.clone(),
        row: Vec::new(),
    }];
    let mut stage_bits = Vec::with_capacity(params.segments);
    let mut budget_clamped = false;

    for _ in 0..params.segments {
        // kept is in lexicographic order, so candidates are too
        let candidates: Vec<Candidate<D::State, D::Sensor>> = kept
            .iter()
            .flat_map(|k| suffixes.iter().map(move |s| (k, s)))
            .map(|(k, suffix)| {
                let dist = propagate_sequence(model, &k.continuation, suffix);
                let mut actions = k.actions.clone();
                actions.extend_from_slice(suffix);
                Candidate {
                    actions,
                    row: sense_distribution(model, &dist),
                    continuation: continuation(dist, params.endpoint),
                }
            })
            .collect();
        let k = params.budget.min(candidates.len());
        budget_clamped |= k < params.budget;
        let rows: Vec<_> = candidates.iter().map(|c| c.row.clone()).collect();
        let (mut selected, bits) = greedy_select(&rows, k, solver)?;
        stage_bits.push(bits);
        selected.sort_unstable();
        let mut slots: Vec<Option<Candidate<_, _>>> = candidates.into_iter().map(Some).collect();
        kept = selected.iter().map(|&i| slots[i].take().expect("selected once")).collect();
    }

    // Report on exactly propagated rows of the final skeleton.
    let exact: Vec<SensorDist<D::Sensor>> = kept
        .iter()
        .map(|c| sense_distribution(model, &propagate_sequence(model, &origin, &c.actions)))
        .collect();
    let (channel, _) = assemble_channel(&[(1.0, &exact)])?;
    let bits = reduced_capacity(&channel, &solver.ba)?.capacity_bits;
    Ok(ImpoverishedResult {
        bits,
        skeleton: kept.into_iter().map(|c| c.actions).collect(),
        stage_bits,
        budget_clamped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::empowerment::{deterministic_empowerment, reachable_sensor_count, state_empowerment, TransitionModel};
    use crate::infotheory::BlahutArimoto;
    use approx::assert_abs_diff_eq;

    /// Line of `len` cells; actions left, right, stay; each move slips to
    /// staying put with probability `slip`.
    fn line(len: usize, slip: f64) -> TransitionModel {
        let mut rows = Vec::new();
        for r in 0..len {
            let left = r.saturating_sub(1);
            let right = (r + 1).min(len - 1);
            rows.push(vec![(left, 1.0 - slip), (r, slip)]);
            rows.push(vec![(right, 1.0 - slip), (r, slip)]);
            rows.push(vec![(r, 1.0)]);
        }
        TransitionModel::from_sparse(len, vec!["L".into(), "R".into(), "S".into()], (0..len).collect(), rows).unwrap()
    }

    fn tight() -> SolverParams {
        SolverParams {
            ba: BlahutArimoto::new(1e-12, 50_000),
            ..SolverParams::default()
        }
    }

    #[test]
    fn full_budget_recovers_deterministic_value() {
        let m = line(9, 0.0);
        let reachable = reachable_sensor_count(&m, &4, 3).unwrap();
        let p = ImpoverishedParams { segment_n: 3, budget: reachable, segments: 1, endpoint: Endpoint::MostLikely };
        let r = impoverished_empowerment(&m, &4, &p, &tight()).unwrap();
        assert_abs_diff_eq!(r.bits, deterministic_empowerment(&m, &4, 3).unwrap(), epsilon = 1e-9);
        assert!(!r.budget_clamped);
    }

    #[test]
    fn budget_two_picks_extremes_under_noise() {
        let m = line(9, 0.3);
        let p = ImpoverishedParams { segment_n: 3, budget: 2, segments: 1, endpoint: Endpoint::MostLikely };
        let r = impoverished_empowerment(&m, &4, &p, &tight()).unwrap();
        let mut ends: Vec<usize> = r
            .skeleton
            .iter()
            .map(|s| s.iter().fold(4usize, |x, &a| match a { 0 => x - 1, 1 => x + 1, _ => x }))
            .collect();
        ends.sort();
        assert_eq!(ends, vec![1, 7]);
    }

    #[test]
    fn never_exceeds_full_empowerment() {
        for slip in [0.0, 0.2] {
            let m = line(7, slip);
            for endpoint in [Endpoint::MostLikely, Endpoint::Exact] {
                let p = ImpoverishedParams { segment_n: 2, budget: 3, segments: 2, endpoint };
                let r = impoverished_empowerment(&m, &3, &p, &tight()).unwrap();
                let full = state_empowerment(&m, &3, 4, &tight()).unwrap();
                assert!(r.bits <= full + 1e-9, "{} > {}", r.bits, full);
                assert_eq!(r.skeleton.len(), 3);
                assert!(r.skeleton.iter().all(|s| s.len() == 4));
            }
        }
    }

    #[test]
    fn budget_is_clamped_and_validated() {
        let m = line(3, 0.0);
        let p = ImpoverishedParams { segment_n: 1, budget: 10, segments: 1, endpoint: Endpoint::Exact };
        let r = impoverished_empowerment(&m, &1, &p, &tight()).unwrap();
        assert!(r.budget_clamped);
        assert_eq!(r.skeleton.len(), 3);
        let bad = ImpoverishedParams { budget: 1, ..p };
        assert!(impoverished_empowerment(&m, &1, &bad, &tight()).is_err());
    }

    #[test]
    fn most_likely_endpoint_tie_goes_to_smallest_state() {
        let d = vec![(2usize, 0.5), (5, 0.5)];
        assert_eq!(continuation(d, Endpoint::MostLikely), vec![(2, 1.0)]);
    }
}
