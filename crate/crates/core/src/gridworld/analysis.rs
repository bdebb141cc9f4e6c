use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::model::configurations;
use super::{Cell, GridAction, GridState, GridWorld, Region};
use crate::empowerment::{evaluate_states, pgm_bytes, EmpowermentMap, MapParams, Raster};
use crate::error::{invalid_param, Result};
use crate::exec;

/// Cells of `region` (or of the whole bounded grid) in raster order.
fn map_cells(world: &GridWorld, region: Option<Region>) -> Result<(Raster, Vec<Cell>)> {
    match region {
        Some(r) => Ok(r.cells()),
        None => world.raster_cells(),
    }
}

/// Per-cell empowerment with the box at its initial position.
///
/// Walls and the box cell are left undefined. Unbounded worlds need a
/// `region`; no materialized window is needed because states are explored
/// lazily from each start cell.
pub fn empowerment_map(world: &GridWorld, params: &MapParams, region: Option<Region>) -> Result<EmpowermentMap> {
    world.validate()?;
    let (raster, cells) = map_cells(world, region)?;
    let box_cell = world.box_spec().map(|b| b.cell);
    let valid: Vec<usize> = (0..cells.len())
        .filter(|&i| world.is_free(cells[i]) && Some(cells[i]) != box_cell)
        .collect();
    let states: Vec<GridState> = valid.iter().map(|&i| world.initial_state(cells[i])).collect();
    let computed = evaluate_states(world, &states, params)?;
    let mut values = vec![None; cells.len()];
    for (&i, v) in valid.iter().zip(computed) {
        values[i] = Some(v);
    }
    Ok(EmpowermentMap::new(world.id(), params.horizon, params.method, Some(raster), values))
}

/// Mean shortest action distance from each cell to every configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMap {
    pub raster: Raster,
    /// `None` for walls, the box cell, and cells that cannot reach every
    /// configuration.
    pub values: Vec<Option<f64>>,
    /// Cells (raster index) whose distance is undefined because some
    /// configuration is unreachable from them.
    pub unreachable: Vec<usize>,
    pub n_configurations: usize,
}

impl DistanceMap {
    pub fn to_pgm(&self) -> Vec<u8> {
        pgm_bytes(self.raster, &self.values)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("state,value\n");
        for (i, v) in self.values.iter().enumerate() {
            if let Some(v) = v {
                out.push_str(&format!("{i},{v}\n"));
            }
        }
        out
    }
}

/// For every free cell, the mean over all reachable configurations of the
/// fewest actions needed to reach it from that cell (box at its initial
/// position). Distances follow the directed transition graph, so pushing a
/// box makes them asymmetric. Bounded worlds only.
pub fn average_distance_map(world: &GridWorld) -> Result<DistanceMap> {
    world.validate()?;
    if world.bounds().is_none() {
        return Err(invalid_param("bounds", "average distances need a bounded world"));
    }
    let (raster, cells) = world.raster_cells()?;
    let configs = configurations(world, None)?;
    let index: HashMap<GridState, usize> = configs.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let successors: Vec<Vec<usize>> = configs
        .iter()
        .map(|s| GridAction::ALL.iter().map(|&a| index[&world.step(s, a)]).collect())
        .collect();
    let box_cell = world.box_spec().map(|b| b.cell);
    let n = configs.len();
    let values = exec::map_indexed(cells.len(), |i| {
        let c = cells[i];
        if !world.is_free(c) || Some(c) == box_cell {
            return (None, false);
        }
        let start = index[&world.initial_state(c)];
        let mut dist = vec![usize::MAX; n];
        dist[start] = 0;
        let mut queue = VecDeque::from([start]);
        let mut total = 0usize;
        let mut reached = 1usize;
        while let Some(u) = queue.pop_front() {
            for &v in &successors[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    total += dist[v];
                    reached += 1;
                    queue.push_back(v);
                }
            }
        }
        if reached == n {
            (Some(total as f64 / n as f64), false)
        } else {
            (None, true)
        }
    });
    let unreachable = values.iter().enumerate().filter(|(_, v)| v.1).map(|(i, _)| i).collect();
    Ok(DistanceMap {
        raster,
        values: values.into_iter().map(|v| v.0).collect(),
        unreachable,
        n_configurations: n,
    })
}

/// Pearson correlation; `None` with fewer than two points or zero variance.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    let scale_x = xs.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
    let scale_y = ys.iter().fold(0.0f64, |m, y| m.max(y.abs())).max(f64::MIN_POSITIVE);
    if sxx <= 1e-24 * scale_x * scale_x * n || syy <= 1e-24 * scale_y * scale_y * n {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    /// Pearson r over cells where both maps are defined; `None` when undefined.
    pub pearson: Option<f64>,
    pub n_cells: usize,
    pub empowerment: EmpowermentMap,
    pub distance: DistanceMap,
}

/// Correlation between the empowerment map and the average distance map.
pub fn correlation_report(world: &GridWorld, params: &MapParams) -> Result<CorrelationReport> {
    let distance = average_distance_map(world)?;
    let empowerment = empowerment_map(world, params, None)?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = empowerment
        .values
        .iter()
        .zip(&distance.values)
        .filter_map(|(e, d)| Some(((*e)?, (*d)?)))
        .unzip();
    Ok(CorrelationReport {
        pearson: pearson(&xs, &ys),
        n_cells: xs.len(),
        empowerment,
        distance,
    })
}
