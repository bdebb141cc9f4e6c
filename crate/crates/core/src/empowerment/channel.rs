use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::model::Dynamics;
use crate::error::{invalid_param, Error, Result};
use crate::exec;
use crate::infotheory::{BlahutArimoto, CapacityResult, DiscreteChannel, ProbabilityVector};

pub const DEFAULT_SEQUENCE_BUDGET: usize = 1_000_000;

/// Settings shared by every Blahut-Arimoto based empowerment computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverParams {
    pub ba: BlahutArimoto,
    /// Largest number of action sequences that may be enumerated.
    pub sequence_budget: usize,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            ba: BlahutArimoto::default(),
            sequence_budget: DEFAULT_SEQUENCE_BUDGET,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        self.ba.validate()?;
        if self.sequence_budget < 1 {
            return Err(invalid_param("sequence_budget", "must be >= 1"));
        }
        Ok(())
    }
}

/// `|A|^n`, saturating.
pub fn sequence_count(n_actions: usize, horizon: usize) -> u128 {
    let mut total: u128 = 1;
    for _ in 0..horizon {
        total = total.saturating_mul(n_actions as u128);
    }
    total
}

/// Fails when `|A|^n` exceeds `budget`.
pub fn check_budget(n_actions: usize, horizon: usize, budget: usize) -> Result<usize> {
    if horizon < 1 {
        return Err(invalid_param("horizon", "must be >= 1"));
    }
    let sequences = sequence_count(n_actions, horizon);
    if sequences > budget as u128 {
        return Err(Error::HorizonTooLarge { sequences, budget });
    }
    Ok(sequences as usize)
}

/// Decodes sequence `index` into action ids, first action most significant.
pub fn decode_sequence(index: usize, n_actions: usize, horizon: usize) -> Vec<usize> {
    let mut seq = vec![0; horizon];
    let mut rest = index;
    for slot in seq.iter_mut().rev() {
        *slot = rest % n_actions;
        rest /= n_actions;
    }
    seq
}

/// Sorted, merged distribution over states.
pub(crate) type StateDist<S> = Vec<(S, f64)>;

/// Sorted, merged distribution over sensor readings.
pub(crate) type SensorDist<S> = Vec<(S, f64)>;

pub(crate) fn merge_sorted<K: Ord>(mut entries: Vec<(K, f64)>) -> Vec<(K, f64)> {
    entries.sort_by(|a, b| a.0.cmp(&b.0));
    let mut out: Vec<(K, f64)> = Vec::with_capacity(entries.len());
    for (k, p) in entries {
        if p <= 0.0 {
            continue;
        }
        match out.last_mut() {
            Some((last, q)) if *last == k => *q += p,
            _ => out.push((k, p)),
        }
    }
    out
}

/// Distribution after taking `action` from every state of `dist`.
pub(crate) fn propagate<D: Dynamics>(
    model: &D,
    dist: &[(D::State, f64)],
    action: usize,
    scratch: &mut Vec<(D::State, f64)>,
) -> StateDist<D::State> {
    let mut next = Vec::new();
    for (state, p) in dist {
        scratch.clear();
        model.successors(state, action, scratch);
        next.extend(scratch.drain(..).map(|(t, q)| (t, p * q)));
    }
    merge_sorted(next)
}

pub(crate) fn propagate_sequence<D: Dynamics>(
    model: &D,
    dist: &[(D::State, f64)],
    actions: &[usize],
) -> StateDist<D::State> {
    let mut scratch = Vec::new();
    let mut current = dist.to_vec();
    for &a in actions {
        current = propagate(model, &current, a, &mut scratch);
    }
    current
}

fn enumerate_from<D: Dynamics>(
    model: &D,
    dist: &[(D::State, f64)],
    remaining: usize,
    scratch: &mut Vec<(D::State, f64)>,
    out: &mut Vec<StateDist<D::State>>,
) {
    if remaining == 0 {
        out.push(dist.to_vec());
        return;
    }
    for a in 0..model.n_actions() {
        let next = propagate(model, dist, a, scratch);
        enumerate_from(model, &next, remaining - 1, scratch, out);
    }
}

/// Final state distribution of every `n`-step sequence, in sequence order.
pub(crate) fn final_distributions<D: Dynamics>(
    model: &D,
    start: &D::State,
    horizon: usize,
) -> Vec<StateDist<D::State>> {
    let origin = vec![(start.clone(), 1.0)];
    exec::map_indexed(model.n_actions(), |a| {
        let mut scratch = Vec::new();
        let first = propagate(model, &origin, a, &mut scratch);
        let mut out = Vec::new();
        enumerate_from(model, &first, horizon - 1, &mut scratch, &mut out);
        out
    })
    .into_iter()
    .flatten()
    .collect()
}

pub(crate) fn sense_distribution<D: Dynamics>(model: &D, dist: &[(D::State, f64)]) -> SensorDist<D::Sensor> {
    merge_sorted(dist.iter().map(|(s, p)| (model.sense(s), *p)).collect())
}

/// Sensor distribution of every `n`-step sequence from `start`.
pub(crate) fn sensor_rows<D: Dynamics>(
    model: &D,
    start: &D::State,
    horizon: usize,
    budget: usize,
) -> Result<Vec<SensorDist<D::Sensor>>> {
    model.check_state(start)?;
    check_budget(model.n_actions(), horizon, budget)?;
    Ok(final_distributions(model, start, horizon)
        .iter()
        .map(|d| sense_distribution(model, d))
        .collect())
}

/// Channel whose row `v` is `Σ_i w_i rows_i[v]`, over the union of observed
/// sensor readings in sorted order.
///
/// Every channel in the crate is assembled here, so a single state with
/// weight 1 always yields the same channel bit for bit.
pub(crate) fn assemble_channel<S: Ord + Clone>(
    weighted: &[(f64, &[SensorDist<S>])],
) -> Result<(DiscreteChannel, Vec<S>)> {
    let n_inputs = weighted.first().map_or(0, |(_, rows)| rows.len());
    let columns: Vec<S> = weighted
        .iter()
        .flat_map(|(_, rows)| rows.iter().flatten().map(|(s, _)| s.clone()))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let index: BTreeMap<&S, usize> = columns.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let mut sparse = Vec::with_capacity(n_inputs);
    for v in 0..n_inputs {
        let mut row = Vec::new();
        for (w, rows) in weighted {
            row.extend(rows[v].iter().map(|(s, p)| (index[s], w * p)));
        }
        sparse.push(row);
    }
    let channel = DiscreteChannel::from_sparse_rows(&sparse, columns.len())?;
    Ok((channel, columns))
}

/// The `|A|^n`-input channel from open-loop action sequences to the final
/// sensor reading.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceChannel<S> {
    /// Row `v` belongs to sequence [`decode_sequence`]`(v, ..)`.
    pub channel: DiscreteChannel,
    /// Sensor reading of each output column, sorted. Readings that no
    /// sequence can produce are omitted; they would be all-zero columns.
    pub sensors: Vec<S>,
    pub n_actions: usize,
    pub horizon: usize,
}

pub fn sequence_channel<D: Dynamics>(
    model: &D,
    state: &D::State,
    horizon: usize,
    budget: usize,
) -> Result<SequenceChannel<D::Sensor>> {
    let rows = sensor_rows(model, state, horizon, budget)?;
    let (channel, sensors) = assemble_channel(&[(1.0, &rows)])?;
    Ok(SequenceChannel {
        channel,
        sensors,
        n_actions: model.n_actions(),
        horizon,
    })
}

/// States reachable after exactly `n` steps.
pub fn reachable_states<D: Dynamics>(model: &D, state: &D::State, horizon: usize) -> Result<BTreeSet<D::State>> {
    model.check_state(state)?;
    let mut frontier: BTreeSet<D::State> = BTreeSet::from([state.clone()]);
    let mut scratch = Vec::new();
    for _ in 0..horizon {
        let mut next = BTreeSet::new();
        for s in &frontier {
            for a in 0..model.n_actions() {
                scratch.clear();
                model.successors(s, a, &mut scratch);
                next.extend(scratch.drain(..).filter(|(_, p)| *p > 0.0).map(|(t, _)| t));
            }
        }
        frontier = next;
    }
    Ok(frontier)
}

/// Number of distinct sensor readings reachable by some `n`-step sequence.
pub fn reachable_sensor_count<D: Dynamics>(model: &D, state: &D::State, horizon: usize) -> Result<usize> {
    let states = reachable_states(model, state, horizon)?;
    Ok(states.iter().map(|s| model.sense(s)).collect::<BTreeSet<_>>().len())
}

/// `log₂` of the number of reachable sensor readings, by breadth-first
/// expansion of the reachable set. Only valid for deterministic dynamics.
pub fn deterministic_empowerment<D: Dynamics>(model: &D, state: &D::State, horizon: usize) -> Result<f64> {
    if !model.is_deterministic() {
        return Err(Error::NotDeterministic);
    }
    Ok((reachable_sensor_count(model, state, horizon)? as f64).log2())
}

/// Capacity of a channel with duplicate rows collapsed first; the optimal
/// input is spread evenly over each group of identical rows.
pub(crate) fn reduced_capacity(channel: &DiscreteChannel, ba: &BlahutArimoto) -> Result<CapacityResult> {
    let (reduced, groups) = channel.dedup_rows();
    let mut result = ba.solve(&reduced)?;
    let mut sizes = vec![0usize; reduced.n_inputs()];
    for &g in &groups {
        sizes[g] += 1;
    }
    let reduced_input = result.optimal_input.as_slice();
    let full = groups.iter().map(|&g| reduced_input[g] / sizes[g] as f64).collect();
    result.optimal_input = ProbabilityVector::from_unchecked(full);
    Ok(result)
}

/// Full Blahut-Arimoto result for the `n`-step channel at `state`.
pub fn state_capacity<D: Dynamics>(
    model: &D,
    state: &D::State,
    horizon: usize,
    params: &SolverParams,
) -> Result<CapacityResult> {
    params.validate()?;
    let sc = sequence_channel(model, state, horizon, params.sequence_budget)?;
    reduced_capacity(&sc.channel, &params.ba)
}

/// `n`-step empowerment of `state` in bits.
pub fn state_empowerment<D: Dynamics>(
    model: &D,
    state: &D::State,
    horizon: usize,
    params: &SolverParams,
) -> Result<f64> {
    Ok(state_capacity(model, state, horizon, params)?.capacity_bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::empowerment::TransitionModel;
    use approx::assert_abs_diff_eq;

    /// Cells 0..3 on a line; actions left, right, stay.
    fn line3() -> TransitionModel {
        TransitionModel::deterministic(vec![vec![0, 1, 0], vec![0, 2, 1], vec![1, 2, 2]], vec![0, 1, 2]).unwrap()
    }

    #[test]
    fn one_step_copies_transition_rows() {
        let m = TransitionModel::new(
            5,
            vec!["spread".into(), "stay".into()],
            vec![0, 1, 2, 3, 4],
            (0..5)
                .map(|r| {
                    let mut stay = vec![0.0; 5];
                    stay[r] = 1.0;
                    vec![vec![0.0, 0.25, 0.25, 0.25, 0.25], stay]
                })
                .collect(),
        )
        .unwrap();
        let sc = sequence_channel(&m, &0, 1, 100).unwrap();
        assert_eq!(sc.sensors, vec![0, 1, 2, 3, 4]);
        assert_eq!(sc.channel.row(0), &[0.0, 0.25, 0.25, 0.25, 0.25]);
        assert_eq!(sc.channel.row(1), &[1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn two_step_line_matches_path_enumeration() {
        let m = line3();
        let sc = sequence_channel(&m, &1, 2, 100).unwrap();
        assert_eq!(sc.channel.n_inputs(), 9);
        for v in 0..9 {
            let seq = decode_sequence(v, 3, 2);
            let mut s = 1;
            for a in seq {
                s = m.transition(s, a)[0].0;
            }
            let mut expected = vec![0.0; 3];
            expected[s] = 1.0;
            assert_eq!(sc.channel.row(v), expected.as_slice(), "sequence {v}");
        }
    }

    #[test]
    fn budget_is_enforced() {
        let err = sequence_channel(&line3(), &1, 13, DEFAULT_SEQUENCE_BUDGET).unwrap_err();
        match err {
            Error::HorizonTooLarge { sequences, budget } => {
                assert_eq!(sequences, 3u128.pow(13));
                assert_eq!(budget, DEFAULT_SEQUENCE_BUDGET);
            }
            e => panic!("unexpected {e}"),
        }
        assert!(sequence_channel(&line3(), &1, 0, 10).is_err());
        assert!(sequence_channel(&line3(), &7, 1, 10).is_err());
    }

    #[test]
    fn sequence_decoding_is_lexicographic() {
        assert_eq!(decode_sequence(0, 5, 3), vec![0, 0, 0]);
        assert_eq!(decode_sequence(7, 5, 3), vec![0, 1, 2]);
        assert_eq!(decode_sequence(124, 5, 3), vec![4, 4, 4]);
    }

    #[test]
    fn deterministic_fast_path_matches_ba() {
        let m = line3();
        for n in 1..5 {
            for s in 0..3 {
                let det = deterministic_empowerment(&m, &s, n).unwrap();
                let ba = state_empowerment(&m, &s, n, &SolverParams::default()).unwrap();
                assert_abs_diff_eq!(det, ba, epsilon = 1e-6);
            }
        }
        assert_abs_diff_eq!(deterministic_empowerment(&m, &0, 1).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn single_cell_world_is_dead() {
        let m = TransitionModel::deterministic(vec![vec![0, 0]], vec![0]).unwrap();
        for n in 1..4 {
            assert_eq!(deterministic_empowerment(&m, &0, n).unwrap(), 0.0);
            assert_eq!(state_empowerment(&m, &0, n, &SolverParams::default()).unwrap(), 0.0);
        }
    }

    #[test]
    fn stochastic_model_rejected_by_fast_path() {
        let m = TransitionModel::new(2, vec!["a".into()], vec![0, 1], vec![vec![vec![0.5, 0.5]], vec![vec![0.0, 1.0]]])
            .unwrap();
        assert!(matches!(deterministic_empowerment(&m, &0, 1), Err(Error::NotDeterministic)));
    }

    #[test]
    fn bsc_like_sensor_confusion() {
        let e = 0.11;
        let m = TransitionModel::new(
            2,
            vec!["to0".into(), "to1".into()],
            vec![0, 1],
            vec![vec![vec![1.0 - e, e], vec![e, 1.0 - e]]; 2],
        )
        .unwrap();
        let h = -(e * e.log2() + (1.0 - e) * (1.0 - e).log2());
        let c = state_empowerment(&m, &0, 1, &SolverParams::default()).unwrap();
        assert_abs_diff_eq!(c, 1.0 - h, epsilon = 1e-6);
    }

    #[test]
    fn identical_actions_give_zero() {
        let m = TransitionModel::new(2, vec!["a".into(), "b".into()], vec![0, 1], vec![vec![vec![0.3, 0.7]; 2]; 2])
            .unwrap();
        assert_eq!(state_empowerment(&m, &1, 2, &SolverParams::default()).unwrap(), 0.0);
    }

    #[test]
    fn optimal_input_spreads_over_duplicates() {
        let r = state_capacity(&line3(), &0, 1, &SolverParams::default()).unwrap();
        // left and stay both keep the agent in cell 0
        let p = r.optimal_input.as_slice();
        assert_abs_diff_eq!(p[0], 0.25, epsilon = 1e-9);
        assert_abs_diff_eq!(p[2], 0.25, epsilon = 1e-9);
        assert_abs_diff_eq!(p[1], 0.5, epsilon = 1e-9);
    }
}
