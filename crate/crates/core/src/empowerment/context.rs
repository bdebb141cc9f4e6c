use serde::{Deserialize, Serialize};

use super::channel::{assemble_channel, reduced_capacity, sensor_rows, SensorDist, SolverParams};
use super::model::TransitionModel;
use crate::error::{invalid_param, Error, Result};
use crate::exec;
use crate::infotheory::{entropy_bits, ProbabilityVector};

/// Largest state count accepted by [`optimal_context_search`].
pub const MAX_CONTEXT_SEARCH_STATES: usize = 12;

/// Assignment of every state to a context, with the induced context prior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextPartition {
    assignment: Vec<usize>,
    context_prior: ProbabilityVector,
}

impl ContextPartition {
    /// `assignment[r]` is the context of state `r`; context ids must be
    /// `0..K` with every context non-empty.
    pub fn new(assignment: Vec<usize>, state_prior: &ProbabilityVector) -> Result<Self> {
        if assignment.len() != state_prior.len() {
            return Err(Error::DimensionMismatch {
                expected: state_prior.len(),
                actual: assignment.len(),
            });
        }
        let k = assignment.iter().max().map_or(0, |m| m + 1);
        let mut mass = vec![0.0; k];
        let mut used = vec![false; k];
        for (r, &c) in assignment.iter().enumerate() {
            mass[c] += state_prior[r];
            used[c] = true;
        }
        if let Some(empty) = used.iter().position(|u| !u) {
            return Err(invalid_param("partition", format!("context {empty} has no states")));
        }
        Ok(Self {
            assignment,
            context_prior: ProbabilityVector::from_unchecked(mass),
        })
    }

    /// Every state in its own context.
    pub fn singletons(state_prior: &ProbabilityVector) -> Self {
        Self::new((0..state_prior.len()).collect(), state_prior).expect("singletons are valid")
    }

    /// All states in one context.
    pub fn single_block(state_prior: &ProbabilityVector) -> Self {
        Self::new(vec![0; state_prior.len()], state_prior).expect("one block is valid")
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn context_prior(&self) -> &ProbabilityVector {
        &self.context_prior
    }

    pub fn n_contexts(&self) -> usize {
        self.context_prior.len()
    }

    /// States of each context, in state order.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); self.n_contexts()];
        for (r, &c) in self.assignment.iter().enumerate() {
            blocks[c].push(r);
        }
        blocks
    }

    /// `H(K)` in bits.
    pub fn entropy_bits(&self) -> f64 {
        entropy_bits(self.context_prior.as_slice())
    }
}

fn check_prior(model: &TransitionModel, prior: &ProbabilityVector) -> Result<()> {
    if prior.len() != model.n_states() {
        return Err(Error::DimensionMismatch {
            expected: model.n_states(),
            actual: prior.len(),
        });
    }
    Ok(())
}

/// Per-state sensor rows for every state, computed once.
fn all_sensor_rows(
    model: &TransitionModel,
    horizon: usize,
    params: &SolverParams,
) -> Result<Vec<Vec<SensorDist<usize>>>> {
    params.validate()?;
    exec::try_map_indexed(model.n_states(), |r| {
        sensor_rows(model, &r, horizon, params.sequence_budget)
    })
}

/// Capacity of the marginal channel `Σ_{r∈block} p(r|block) p(s|ā,r)`.
///
/// A block with zero prior mass is weighted uniformly; its value never
/// contributes to an average.
fn block_capacity(
    rows: &[Vec<SensorDist<usize>>],
    block: &[usize],
    prior: &ProbabilityVector,
    params: &SolverParams,
) -> Result<f64> {
    let mass: f64 = block.iter().map(|&r| prior[r]).sum();
    let weighted: Vec<(f64, &[SensorDist<usize>])> = block
        .iter()
        .map(|&r| {
            let w = if mass > 0.0 { prior[r] / mass } else { 1.0 / block.len() as f64 };
            (w, rows[r].as_slice())
        })
        .filter(|(w, _)| *w > 0.0)
        .collect();
    let (channel, _) = assemble_channel(&weighted)?;
    Ok(reduced_capacity(&channel, &params.ba)?.capacity_bits)
}

/// `E(R) = Σ_r p(r) E(r)`.
pub fn average_state_empowerment(
    model: &TransitionModel,
    prior: &ProbabilityVector,
    horizon: usize,
    params: &SolverParams,
) -> Result<f64> {
    contextual_empowerment(model, &ContextPartition::singletons(prior), prior, horizon, params)
}

/// `E(K) = Σ_k p(k) E(k)` where `E(k)` is the capacity of the channel
/// marginalized over the states of context `k`.
pub fn contextual_empowerment(
    model: &TransitionModel,
    partition: &ContextPartition,
    prior: &ProbabilityVector,
    horizon: usize,
    params: &SolverParams,
) -> Result<f64> {
    check_prior(model, prior)?;
    if partition.assignment().len() != model.n_states() {
        return Err(Error::DimensionMismatch {
            expected: model.n_states(),
            actual: partition.assignment().len(),
        });
    }
    let rows = all_sensor_rows(model, horizon, params)?;
    let blocks = partition.blocks();
    let values = exec::try_map_indexed(blocks.len(), |k| -> Result<f64> {
        let mass: f64 = blocks[k].iter().map(|&r| prior[r]).sum();
        if mass > 0.0 {
            Ok(mass * block_capacity(&rows, &blocks[k], prior, params)?)
        } else {
            Ok(0.0)
        }
    })?;
    Ok(values.iter().sum())
}

/// Empowerment of the channel marginalized over all states.
pub fn context_free_empowerment(
    model: &TransitionModel,
    prior: &ProbabilityVector,
    horizon: usize,
    params: &SolverParams,
) -> Result<f64> {
    contextual_empowerment(model, &ContextPartition::single_block(prior), prior, horizon, params)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextSearchResult {
    pub partition: ContextPartition,
    /// `E(K)` of the returned partition.
    pub contextual_bits: f64,
    /// `E(R)`.
    pub state_average_bits: f64,
    /// `H(K)` of the returned partition.
    pub entropy_bits: f64,
    pub partitions_examined: u64,
}

/// Exhaustive search for the lowest-entropy partition that keeps
/// `E(K) >= E(R) - tol`.
///
/// Ties in `H(K)` go to fewer contexts, then to the lexicographically first
/// assignment in canonical (first-occurrence) labelling.
pub fn optimal_context_search(
    model: &TransitionModel,
    prior: &ProbabilityVector,
    horizon: usize,
    params: &SolverParams,
    tol: f64,
) -> Result<ContextSearchResult> {
    check_prior(model, prior)?;
    let n = model.n_states();
    if n > MAX_CONTEXT_SEARCH_STATES {
        return Err(Error::TooManyStates {
            states: n,
            limit: MAX_CONTEXT_SEARCH_STATES,
        });
    }
    if !(tol >= 0.0) {
        return Err(invalid_param("tol", format!("must be >= 0, got {tol}")));
    }
    let rows = all_sensor_rows(model, horizon, params)?;
    let n_masks = 1usize << n;
    let mask_mass: Vec<f64> = (0..n_masks)
        .map(|m| (0..n).filter(|r| m >> r & 1 == 1).map(|r| prior[r]).sum())
        .collect();
    let mask_value = exec::try_map_indexed(n_masks, |m| -> Result<f64> {
        if m == 0 || mask_mass[m] <= 0.0 {
            return Ok(0.0);
        }
        let block: Vec<usize> = (0..n).filter(|r| m >> r & 1 == 1).collect();
        Ok(mask_mass[m] * block_capacity(&rows, &block, prior, params)?)
    })?;
    let target: f64 = (0..n).map(|r| mask_value[1 << r]).sum();

    let mut search = Search {
        n,
        mask_value: &mask_value,
        mask_mass: &mask_mass,
        threshold: target - tol,
        assignment: vec![0; n],
        masks: vec![0; n],
        best: None,
        examined: 0,
    };
    search.descend(0, 0);
    let best = search.best.expect("the singleton partition always qualifies");
    let partition = ContextPartition::new(best.assignment, prior)?;
    Ok(ContextSearchResult {
        entropy_bits: partition.entropy_bits(),
        partition,
        contextual_bits: best.value,
        state_average_bits: target,
        partitions_examined: search.examined,
    })
}

struct Candidate {
    assignment: Vec<usize>,
    value: f64,
    entropy: f64,
    blocks: usize,
}

const ENTROPY_TIE: f64 = 1e-12;

/// Enumerates restricted growth strings, which list every set partition
/// exactly once in lexicographic order.
struct Search<'a> {
    n: usize,
    mask_value: &'a [f64],
    mask_mass: &'a [f64],
    threshold: f64,
    assignment: Vec<usize>,
    masks: Vec<usize>,
    best: Option<Candidate>,
    examined: u64,
}

impl Search<'_> {
    fn descend(&mut self, i: usize, blocks: usize) {
        if i == self.n {
            self.evaluate(blocks);
            return;
        }
        for k in 0..=blocks.min(self.n - 1) {
            self.assignment[i] = k;
            self.masks[k] |= 1 << i;
            self.descend(i + 1, blocks.max(k + 1));
            self.masks[k] &= !(1 << i);
        }
    }

    fn evaluate(&mut self, blocks: usize) {
        self.examined += 1;
        let masks = &self.masks[..blocks];
        let value: f64 = masks.iter().map(|&m| self.mask_value[m]).sum();
        if value < self.threshold {
            return;
        }
        let entropy = entropy_bits(&masks.iter().map(|&m| self.mask_mass[m]).collect::<Vec<_>>());
        let better = match &self.best {
            None => true,
            Some(b) => {
                entropy < b.entropy - ENTROPY_TIE
                    || (entropy <= b.entropy + ENTROPY_TIE && blocks < b.blocks)
            }
        };
        if better {
            self.best = Some(Candidate {
                assignment: self.assignment.clone(),
                value,
                entropy,
                blocks,
            });
        }
    }
}
