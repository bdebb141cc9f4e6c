use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::{Cell, GridAction, GridState, GridWorld};
use crate::empowerment::TransitionModel;
use crate::error::{invalid_param, Result};

/// Square of cells within Chebyshev distance `radius` of `center`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub center: Cell,
    pub radius: usize,
}

impl Window {
    /// Radius `n + 2`: an `n`-step agent starting at `center` stays within
    /// distance `n` and can push a box at most one cell further, so nothing
    /// it can reach ever touches the window edge.
    pub fn for_horizon(center: Cell, horizon: usize) -> Self {
        Self {
            center,
            radius: horizon + 2,
        }
    }

    pub fn contains(&self, c: Cell) -> bool {
        c.chebyshev(self.center) as i64 <= self.radius as i64
    }

    fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        let r = self.radius as i32;
        (-r..=r).flat_map(move |dy| (-r..=r).map(move |dx| self.center.offset((dx, dy))))
    }
}

/// A grid world materialized as an explicit [`TransitionModel`].
#[derive(Debug, Clone)]
pub struct GridModel {
    pub model: TransitionModel,
    /// Grid state of every model state id, sorted.
    pub states: Vec<GridState>,
    index: HashMap<GridState, usize>,
}

impl GridModel {
    pub fn index_of(&self, s: &GridState) -> Option<usize> {
        self.index.get(s).copied()
    }
}

/// Every configuration reachable from an agent on any free cell with the box
/// at its initial position, in sorted order.
pub(crate) fn configurations(world: &GridWorld, window: Option<&Window>) -> Result<Vec<GridState>> {
    let cells: Vec<Cell> = match (world.bounds(), window) {
        (_, Some(w)) => w.cells().filter(|&c| world.is_free(c)).collect(),
        (Some(_), None) => world.raster_cells()?.1.into_iter().filter(|&c| world.is_free(c)).collect(),
        (None, None) => {
            return Err(invalid_param(
                "window",
                "an unbounded world needs a horizon window to be materialized",
            ))
        }
    };
    let box_cell = world.box_spec().map(|b| b.cell);
    let mut seen: BTreeSet<GridState> = cells
        .into_iter()
        .filter(|&c| Some(c) != box_cell)
        .map(|c| world.initial_state(c))
        .collect();
    let mut queue: VecDeque<GridState> = seen.iter().copied().collect();
    while let Some(s) = queue.pop_front() {
        for a in GridAction::ALL {
            let t = world.step_within(&s, a, window);
            if seen.insert(t) {
                queue.push_back(t);
            }
        }
    }
    Ok(seen.into_iter().collect())
}

/// Materializes the reachable configurations of `world` and their
/// transitions. The sensor is the full state when the box is perceivable
/// and the agent position otherwise.
///
/// Unbounded worlds need a `window`; cells outside it act as walls.
pub fn as_transition_model(world: &GridWorld, window: Option<Window>) -> Result<GridModel> {
    world.validate()?;
    let states = configurations(world, window.as_ref())?;
    let index: HashMap<GridState, usize> = states.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let sensors: BTreeMap<GridState, usize> = states
        .iter()
        .map(|s| crate::empowerment::Dynamics::sense(world, s))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(i, s)| (s, i))
        .collect();
    let sensor_map = states
        .iter()
        .map(|s| sensors[&crate::empowerment::Dynamics::sense(world, s)])
        .collect();
    let eps = world.epsilon_noise();
    let mut rows = Vec::with_capacity(states.len() * GridAction::ALL.len());
    for s in &states {
        for intended in GridAction::ALL {
            let row = if eps == 0.0 {
                vec![(index[&world.step_within(s, intended, window.as_ref())], 1.0)]
            } else {
                GridAction::ALL
                    .iter()
                    .map(|&b| {
                        let p = if b == intended { 1.0 - eps } else { eps / 4.0 };
                        (index[&world.step_within(s, b, window.as_ref())], p)
                    })
                    .collect()
            };
            rows.push(row);
        }
    }
    let names = ["N", "E", "S", "W", "Stay"].iter().map(|s| s.to_string()).collect();
    let model = TransitionModel::from_sparse(states.len(), names, sensor_map, rows)?.with_id(world.id());
    Ok(GridModel { model, states, index })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::empowerment::{deterministic_empowerment, Dynamics};
    use crate::gridworld::BoxSpec;

    #[test]
    fn empty_grid_has_one_state_per_cell() {
        let w = GridWorld::bounded(10, 10).unwrap();
        let gm = as_transition_model(&w, None).unwrap();
        assert_eq!(gm.model.n_states(), 100);
        assert!(gm.model.is_deterministic());
        for s in 0..100 {
            for a in 0..5 {
                assert_eq!(gm.model.transition(s, a).len(), 1);
            }
        }
    }

    #[test]
    fn box_world_counts_reachable_pairs() {
        let spec = BoxSpec { cell: Cell::new(1, 1), pushable: true, perceivable: true };
        let w = GridWorld::bounded(3, 3).unwrap().with_box(spec).unwrap();
        let gm = as_transition_model(&w, None).unwrap();
        // brute force: every (agent, box) pair closed under the dynamics
        let mut oracle = BTreeSet::new();
        let mut stack: Vec<GridState> = (0..3)
            .flat_map(|x| (0..3).map(move |y| Cell::new(x, y)))
            .filter(|&c| c != spec.cell)
            .map(|c| w.initial_state(c))
            .collect();
        while let Some(s) = stack.pop() {
            if oracle.insert(s) {
                stack.extend(GridAction::ALL.iter().map(|&a| w.step(&s, a)));
            }
        }
        assert_eq!(gm.states, oracle.into_iter().collect::<Vec<_>>());
        assert!(gm.states.len() > 8);
    }

    #[test]
    fn noisy_rows_merge_collisions() {
        let w = GridWorld::bounded(10, 10).unwrap().with_noise(0.1).unwrap();
        let gm = as_transition_model(&w, None).unwrap();
        let corner = gm.index_of(&w.initial_state(Cell::new(0, 0))).unwrap();
        // north from the corner: N moves (0.9); S, W and Stay stay put; E moves east
        let row = gm.model.dense_row(corner, GridAction::North.id());
        let north = gm.index_of(&w.initial_state(Cell::new(0, 1))).unwrap();
        let east = gm.index_of(&w.initial_state(Cell::new(1, 0))).unwrap();
        assert!((row[north] - 0.9).abs() < 1e-12);
        assert!((row[east] - 0.025).abs() < 1e-12);
        assert!((row[corner] - 0.075).abs() < 1e-12);
        for s in 0..gm.model.n_states() {
            for a in 0..5 {
                for &(_, p) in gm.model.transition(s, a) {
                    let k = ((p - if p > 0.5 { 0.9 } else { 0.0 }) / 0.025).round();
                    assert!((p - (if p > 0.5 { 0.9 } else { 0.0 } + 0.025 * k)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn window_preserves_open_grid_empowerment() {
        let w = GridWorld::unbounded();
        assert!(as_transition_model(&w, None).is_err());
        let start = Cell::new(0, 0);
        let gm = as_transition_model(&w, Some(Window::for_horizon(start, 5))).unwrap();
        let s = gm.index_of(&w.initial_state(start)).unwrap();
        assert_eq!(gm.model.n_states(), 15 * 15);
        assert_eq!(
            deterministic_empowerment(&gm.model, &s, 5).unwrap(),
            deterministic_empowerment(&w, &w.initial_state(start), 5).unwrap()
        );
        assert!(w.is_deterministic());
    }
}
