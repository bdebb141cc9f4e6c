use std::collections::HashMap;
use std::sync::Mutex;

use super::channel::{deterministic_empowerment, merge_sorted, state_empowerment, SolverParams};
use super::model::Dynamics;
use crate::error::{invalid_param, Result};
use crate::exec;

/// Two action values closer than this are treated as tied.
pub const ACTION_TIE_TOLERANCE: f64 = 1e-9;

/// Greedy one-step planner with a shared per-`(state, horizon)` empowerment
/// cache.
///
/// Deterministic models use reachable-set counting; others use
/// Blahut-Arimoto. The cache is safe to fill from several threads.
pub struct Planner<'a, D: Dynamics> {
    model: &'a D,
    horizon: usize,
    params: SolverParams,
    cache: Mutex<HashMap<(D::State, usize), f64>>,
}

impl<'a, D: Dynamics> Planner<'a, D> {
    pub fn new(model: &'a D, horizon: usize, params: SolverParams) -> Result<Self> {
        if horizon < 1 {
            return Err(invalid_param("horizon", "must be >= 1"));
        }
        params.validate()?;
        Ok(Self {
            model,
            horizon,
            params,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn cached_states(&self) -> usize {
        self.cache.lock().expect("cache lock").len()
    }

    /// Empowerment of `state` at the planner's horizon, memoized.
    pub fn empowerment(&self, state: &D::State) -> Result<f64> {
        let key = (state.clone(), self.horizon);
        if let Some(&v) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(v);
        }
        let v = if self.model.is_deterministic() {
            deterministic_empowerment(self.model, state, self.horizon)?
        } else {
            state_empowerment(self.model, state, self.horizon, &self.params)?
        };
        self.cache.lock().expect("cache lock").insert(key, v);
        Ok(v)
    }

    /// `Σ_{s'} p(s' | state, action) E(s')`.
    pub fn expected_empowerment(&self, state: &D::State, action: usize) -> Result<f64> {
        self.model.check_state(state)?;
        if action >= self.model.n_actions() {
            return Err(invalid_param(
                "action",
                format!("{action} out of range for {} actions", self.model.n_actions()),
            ));
        }
        let mut next = Vec::new();
        self.model.successors(state, action, &mut next);
        let mut total = 0.0;
        for (s, p) in merge_sorted(next) {
            total += p * self.empowerment(&s)?;
        }
        Ok(total)
    }

    /// Expected successor empowerment of every action.
    pub fn action_values(&self, state: &D::State) -> Result<Vec<f64>> {
        exec::try_map_indexed(self.model.n_actions(), |a| self.expected_empowerment(state, a))
    }

    /// Action with the highest expected successor empowerment; ties go to
    /// the lowest action id.
    pub fn greedy_action(&self, state: &D::State) -> Result<usize> {
        Ok(argmax_lowest(&self.action_values(state)?))
    }
}

pub(crate) fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (a, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] + ACTION_TIE_TOLERANCE {
            best = a;
        }
    }
    best
}

pub fn expected_empowerment<D: Dynamics>(
    model: &D,
    state: &D::State,
    action: usize,
    horizon: usize,
    params: &SolverParams,
) -> Result<f64> {
    Planner::new(model, horizon, *params)?.expected_empowerment(state, action)
}

pub fn greedy_policy_step<D: Dynamics>(
    model: &D,
    state: &D::State,
    horizon: usize,
    params: &SolverParams,
) -> Result<usize> {
    Planner::new(model, horizon, *params)?.greedy_action(state)
}
