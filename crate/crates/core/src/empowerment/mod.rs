//! n-step empowerment over finite-action worlds.
//!
//! Action sequences are open-loop: the whole sequence is fixed before it is
//! executed and the sensor is read once, after the last action. Each
//! sequence is one input symbol of the channel whose capacity is the
//! empowerment. Sensors are deterministic functions of state; sensor noise
//! can be folded into the transition rows.

mod channel;
mod context;
mod greedy;
mod impoverished;
mod map;
mod model;

pub use channel::{
    check_budget, decode_sequence, deterministic_empowerment, reachable_sensor_count,
    reachable_states, sequence_channel, sequence_count, state_capacity, state_empowerment,
    SequenceChannel, SolverParams, DEFAULT_SEQUENCE_BUDGET,
};
pub use context::{
    average_state_empowerment, context_free_empowerment, contextual_empowerment,
    optimal_context_search, ContextPartition, ContextSearchResult, MAX_CONTEXT_SEARCH_STATES,
};
pub use greedy::{expected_empowerment, greedy_policy_step, Planner, ACTION_TIE_TOLERANCE};
pub use impoverished::{impoverished_empowerment, Endpoint, ImpoverishedParams, ImpoverishedResult};
pub use map::{EmpowermentMap, Method, Raster};
pub use model::{Dynamics, TransitionModel};

pub(crate) use map::pgm_bytes;

use serde::{Deserialize, Serialize};

use crate::error::{invalid_param, Result};
use crate::exec;

/// How to evaluate empowerment at many states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MapParams {
    pub horizon: usize,
    pub method: Method,
    pub solver: SolverParams,
    /// Used by [`Method::Impoverished`], whose horizon is
    /// `segment_n · segments` and must equal `horizon`.
    pub impoverished: ImpoverishedParams,
}

impl Default for MapParams {
    fn default() -> Self {
        Self {
            horizon: 5,
            method: Method::Deterministic,
            solver: SolverParams::default(),
            impoverished: ImpoverishedParams::default(),
        }
    }
}

impl MapParams {
    pub fn validate(&self) -> Result<()> {
        if self.horizon < 1 {
            return Err(invalid_param("horizon", "must be >= 1"));
        }
        self.solver.validate()?;
        match self.method {
            Method::Qlg => Err(invalid_param("method", "qlg applies to continuous models only")),
            Method::Impoverished => {
                self.impoverished.validate()?;
                if self.impoverished.horizon() != self.horizon {
                    return Err(invalid_param(
                        "impoverished",
                        format!(
                            "segment_n * segments = {} must equal horizon {}",
                            self.impoverished.horizon(),
                            self.horizon
                        ),
                    ));
                }
                Ok(())
            }
            Method::Deterministic | Method::BlahutArimoto => Ok(()),
        }
    }
}

/// Empowerment of one state with the chosen method.
pub fn evaluate_state<D: Dynamics>(model: &D, state: &D::State, params: &MapParams) -> Result<f64> {
    match params.method {
        Method::Deterministic => deterministic_empowerment(model, state, params.horizon),
        Method::BlahutArimoto => state_empowerment(model, state, params.horizon, &params.solver),
        Method::Impoverished => {
            Ok(impoverished_empowerment(model, state, &params.impoverished, &params.solver)?.bits)
        }
        Method::Qlg => Err(invalid_param("method", "qlg applies to continuous models only")),
    }
}

/// Empowerment of each listed state, computed in parallel.
pub fn evaluate_states<D: Dynamics>(model: &D, states: &[D::State], params: &MapParams) -> Result<Vec<f64>> {
    params.validate()?;
    exec::try_map_indexed(states.len(), |i| evaluate_state(model, &states[i], params))
}

/// Empowerment of every state of a finite model.
pub fn empowerment_map(model: &TransitionModel, params: &MapParams) -> Result<EmpowermentMap> {
    let states: Vec<usize> = (0..model.n_states()).collect();
    let values = evaluate_states(model, &states, params)?;
    Ok(EmpowermentMap::new(
        model.id(),
        params.horizon,
        params.method,
        None,
        values.into_iter().map(Some).collect(),
    ))
}
