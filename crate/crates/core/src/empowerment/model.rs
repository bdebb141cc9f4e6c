use std::fmt::Debug;
use std::hash::Hash;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infotheory::check_distribution;

/// A finite-action world that can be rolled forward as a distribution.
///
/// States and sensor readings only need to be ordered and hashable, so worlds
/// with an unbounded state space (an open grid) can be explored lazily from a
/// start state without ever being materialized.
pub trait Dynamics: Sync {
    type State: Clone + Eq + Ord + Hash + Debug + Send + Sync;
    type Sensor: Clone + Eq + Ord + Hash + Debug + Send + Sync;

    fn n_actions(&self) -> usize;

    /// Appends `(successor, probability)` pairs for `action` taken in `state`.
    /// Duplicated successors are allowed; callers merge them.
    fn successors(&self, state: &Self::State, action: usize, out: &mut Vec<(Self::State, f64)>);

    fn sense(&self, state: &Self::State) -> Self::Sensor;

    /// True when every `(state, action)` has a single successor.
    fn is_deterministic(&self) -> bool;

    /// Rejects states that do not belong to the world.
    fn check_state(&self, _state: &Self::State) -> Result<()> {
        Ok(())
    }
}

/// Explicit finite model `p(r' | r, a)` with a deterministic sensor map.
///
/// States, actions, and sensor symbols are dense ids starting at 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelDocument", into = "ModelDocument")]
pub struct TransitionModel {
    id: String,
    n_states: usize,
    actions: Vec<String>,
    sensor_map: Vec<usize>,
    n_sensors: usize,
    /// Sparse rows indexed by `state * n_actions + action`, sorted by successor.
    rows: Vec<Vec<(usize, f64)>>,
    deterministic: bool,
}

/// On-disk JSON layout with dense transition rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDocument {
    #[serde(default)]
    id: String,
    n_states: usize,
    actions: Vec<String>,
    sensor_map: Vec<usize>,
    /// `transitions[state][action][successor]`
    transitions: Vec<Vec<Vec<f64>>>,
}

impl TryFrom<ModelDocument> for TransitionModel {
    type Error = Error;

    fn try_from(doc: ModelDocument) -> Result<Self> {
        let m = TransitionModel::new(doc.n_states, doc.actions, doc.sensor_map, doc.transitions)?;
        Ok(m.with_id(doc.id))
    }
}

impl From<TransitionModel> for ModelDocument {
    fn from(m: TransitionModel) -> Self {
        let transitions = (0..m.n_states)
            .map(|r| (0..m.n_actions()).map(|a| m.dense_row(r, a)).collect())
            .collect();
        ModelDocument {
            id: m.id,
            n_states: m.n_states,
            actions: m.actions,
            sensor_map: m.sensor_map,
            transitions,
        }
    }
}

impl TransitionModel {
    /// Builds a model from dense rows `transitions[state][action][successor]`.
    pub fn new(
        n_states: usize,
        actions: Vec<String>,
        sensor_map: Vec<usize>,
        transitions: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        if transitions.len() != n_states {
            return Err(Error::DimensionMismatch {
                expected: n_states,
                actual: transitions.len(),
            });
        }
        let mut rows = Vec::with_capacity(n_states * actions.len());
        for (r, per_action) in transitions.into_iter().enumerate() {
            if per_action.len() != actions.len() {
                return Err(Error::InvalidModel(format!(
                    "state {r} has {} action rows, expected {}",
                    per_action.len(),
                    actions.len()
                )));
            }
            for (a, row) in per_action.into_iter().enumerate() {
                if row.len() != n_states {
                    return Err(Error::InvalidModel(format!(
                        "row ({r}, {a}) has {} entries, expected {n_states}",
                        row.len()
                    )));
                }
                check_distribution(&row)
                    .map_err(|e| Error::InvalidModel(format!("row ({r}, {a}): {e}")))?;
                rows.push(row.into_iter().enumerate().filter(|&(_, p)| p > 0.0).collect());
            }
        }
        Self::from_parts(n_states, actions, sensor_map, rows)
    }

    /// Builds a deterministic model from `next[state][action]`.
    pub fn deterministic(next: Vec<Vec<usize>>, sensor_map: Vec<usize>) -> Result<Self> {
        let n_states = next.len();
        let n_actions = next.first().map_or(0, Vec::len);
        let actions = (0..n_actions).map(|a| format!("a{a}")).collect();
        let mut rows = Vec::with_capacity(n_states * n_actions);
        for (r, per_action) in next.into_iter().enumerate() {
            if per_action.len() != n_actions {
                return Err(Error::InvalidModel(format!(
                    "state {r} has {} actions, expected {n_actions}",
                    per_action.len()
                )));
            }
            rows.extend(per_action.into_iter().map(|t| vec![(t, 1.0)]));
        }
        Self::from_parts(n_states, actions, sensor_map, rows)
    }

    /// Builds a model from sparse rows indexed by `state * n_actions + action`.
    pub fn from_sparse(
        n_states: usize,
        actions: Vec<String>,
        sensor_map: Vec<usize>,
        rows: Vec<Vec<(usize, f64)>>,
    ) -> Result<Self> {
        let mut merged = Vec::with_capacity(rows.len());
        for (i, row) in rows.into_iter().enumerate() {
            let mut dense = vec![0.0; n_states];
            for (t, p) in row {
                if t >= n_states {
                    return Err(Error::InvalidModel(format!("row {i} targets unknown state {t}")));
                }
                dense[t] += p;
            }
            check_distribution(&dense).map_err(|e| Error::InvalidModel(format!("row {i}: {e}")))?;
            merged.push(dense.into_iter().enumerate().filter(|&(_, p)| p > 0.0).collect());
        }
        Self::from_parts(n_states, actions, sensor_map, merged)
    }

    fn from_parts(
        n_states: usize,
        actions: Vec<String>,
        sensor_map: Vec<usize>,
        rows: Vec<Vec<(usize, f64)>>,
    ) -> Result<Self> {
        if n_states == 0 {
            return Err(Error::InvalidModel("model needs at least one state".into()));
        }
        if actions.is_empty() {
            return Err(Error::InvalidModel("model needs at least one action".into()));
        }
        if sensor_map.len() != n_states {
            return Err(Error::InvalidModel(format!(
                "sensor map covers {} states, model has {n_states}",
                sensor_map.len()
            )));
        }
        if rows.len() != n_states * actions.len() {
            return Err(Error::DimensionMismatch {
                expected: n_states * actions.len(),
                actual: rows.len(),
            });
        }
        for (i, row) in rows.iter().enumerate() {
            if let Some(&(t, _)) = row.iter().find(|&&(t, _)| t >= n_states) {
                return Err(Error::InvalidModel(format!("row {i} targets unknown state {t}")));
            }
        }
        let deterministic = rows.iter().all(|r| r.len() == 1);
        let n_sensors = sensor_map.iter().max().map_or(0, |m| m + 1);
        Ok(Self {
            id: String::new(),
            n_states,
            actions,
            sensor_map,
            n_sensors,
            rows,
            deterministic,
        })
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn action_names(&self) -> &[String] {
        &self.actions
    }

    pub fn sensor_map(&self) -> &[usize] {
        &self.sensor_map
    }

    pub fn n_sensors(&self) -> usize {
        self.n_sensors
    }

    /// Nonzero successor probabilities, sorted by successor id.
    pub fn transition(&self, state: usize, action: usize) -> &[(usize, f64)] {
        &self.rows[state * self.actions.len() + action]
    }

    pub fn dense_row(&self, state: usize, action: usize) -> Vec<f64> {
        let mut row = vec![0.0; self.n_states];
        for &(t, p) in self.transition(state, action) {
            row[t] = p;
        }
        row
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn from_json_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

impl Dynamics for TransitionModel {
    type State = usize;
    type Sensor = usize;

    fn n_actions(&self) -> usize {
        self.actions.len()
    }

    fn successors(&self, state: &usize, action: usize, out: &mut Vec<(usize, f64)>) {
        out.extend_from_slice(self.transition(*state, action));
    }

    fn sense(&self, state: &usize) -> usize {
        self.sensor_map[*state]
    }

    fn is_deterministic(&self) -> bool {
        self.deterministic
    }

    fn check_state(&self, state: &usize) -> Result<()> {
        if *state >= self.n_states {
            return Err(Error::InvalidModel(format!(
                "state {state} out of range for a model with {} states",
                self.n_states
            )));
        }
        Ok(())
    }
}
