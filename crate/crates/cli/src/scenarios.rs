//! One runner per scenario. Each writes its artifacts through [`Artifacts`]
//! and nothing else, so identical inputs give identical files.

use std::fmt::Write as _;
use std::path::Path;

use empowerment::continuous::qlg_empowerment;
use empowerment::empowerment::{
    average_state_empowerment, context_free_empowerment, contextual_empowerment, impoverished_empowerment,
    optimal_context_search, sequence_count, state_empowerment, ContextPartition, EmpowermentMap, MapParams,
};
use empowerment::gridworld::{
    average_distance_map, correlation_report, empowerment_map, maze, pearson, Cell, GridAction, GridWorld,
    Region,
};
use empowerment::infotheory::BlahutArimoto;
use empowerment::pendulum::{
    find_inversions, greedy_control, pendulum_empowerment_map, power_scan, swing_up_summary,
};
use serde::Serialize;
use serde_json::json;

use crate::config::{
    BoxScenario, ChannelScenario, ContextScenario, CorrelationScenario, HorizonSweepScenario, ImpoverishedScenario,
    MazeScenario, MimoScenario, PendulumControlScenario, PendulumMapScenario, PendulumScanScenario, RunConfig,
    Scenario,
};
use crate::error::Result;
use crate::output::Artifacts;
use crate::Progress;

pub(crate) fn run_scenario(config: &RunConfig, base: &Path, out: &mut Artifacts, progress: &Progress) -> Result<()> {
    let seed = config.seed;
    match &config.scenario {
        Scenario::Maze(s) => maze_scenario(s, base, seed, out, progress),
        Scenario::Box(s) => box_scenario(s, out, progress),
        Scenario::HorizonSweep(s) => horizon_sweep(s, base, seed, out, progress),
        Scenario::Context(s) => context(s, base, out, progress),
        Scenario::Impoverished(s) => impoverished(s, base, seed, out, progress),
        Scenario::Channel(s) => channel(s, base, out),
        Scenario::Mimo(s) => mimo(s, base, out),
        Scenario::PendulumMap(s) => pendulum_map(s, out, progress),
        Scenario::PendulumControl(s) => pendulum_control(s, seed, out, progress),
        Scenario::PendulumScan(s) => pendulum_scan(s, out, progress),
        Scenario::Correlation(s) => correlation(s, seed, out, progress),
    }
}

/// `x,y,value` per evaluated cell, raster order.
fn grid_csv(map: &EmpowermentMap, cells: &[Cell]) -> String {
    let mut out = String::from("x,y,value\n");
    for (c, v) in cells.iter().zip(&map.values) {
        if let Some(v) = v {
            writeln!(out, "{},{},{v}", c.x, c.y).unwrap();
        }
    }
    out
}

fn write_grid_map(out: &mut Artifacts, stem: &str, map: &EmpowermentMap, cells: &[Cell]) -> Result<()> {
    out.write(&format!("{stem}.csv"), grid_csv(map, cells).as_bytes())?;
    out.write(&format!("{stem}.pgm"), &map.to_pgm()?)?;
    out.json(&format!("{stem}.json"), map)
}

fn write_world(out: &mut Artifacts, world: &GridWorld) -> Result<()> {
    out.write("world.json", format!("{}\n", world.to_json()?).as_bytes())?;
    if let Some(text) = world.render() {
        out.write("world.txt", text.as_bytes())?;
    }
    Ok(())
}

fn range_json(map: &EmpowermentMap) -> serde_json::Value {
    match map.range() {
        Some((lo, hi)) => json!({ "min": lo, "max": hi }),
        None => serde_json::Value::Null,
    }
}

fn maze_scenario(s: &MazeScenario, base: &Path, seed: u64, out: &mut Artifacts, progress: &Progress) -> Result<()> {
    let world = s.source().load(base, seed, "scenario.maze")?;
    write_world(out, &world)?;
    let (_, cells) = world.raster_cells()?;
    progress.note(&format!("{}-step empowerment map of {}", s.map.horizon, world.id()));
    let map = empowerment_map(&world, &s.map, None)?;
    write_grid_map(out, "empowerment", &map, &cells)?;
    let mut summary = json!({
        "world": world.id(),
        "horizon": s.map.horizon,
        "method": s.map.method,
        "range": range_json(&map),
    });
    if s.distance {
        progress.note("average distance map");
        let distance = average_distance_map(&world)?;
        out.write("distance.csv", distance.to_csv().as_bytes())?;
        out.write("distance.pgm", &distance.to_pgm())?;
        let (xs, ys): (Vec<f64>, Vec<f64>) = map
            .values
            .iter()
            .zip(&distance.values)
            .filter_map(|(e, d)| Some(((*e)?, (*d)?)))
            .unzip();
        summary["pearson"] = json!(pearson(&xs, &ys));
        summary["unreachable_cells"] = json!(distance.unreachable);
    }
    out.json("summary.json", &summary)
}

fn box_scenario(s: &BoxScenario, out: &mut Artifacts, progress: &Progress) -> Result<()> {
    let world = s.world()?;
    write_world(out, &world)?;
    let region = world
        .bounds()
        .is_none()
        .then(|| Region::around(s.box_cell, s.radius));
    let cells = match region {
        Some(r) => r.cells().1,
        None => world.raster_cells()?.1,
    };
    progress.note(&format!("{}-step empowerment map of {}", s.map.horizon, world.id()));
    let map = empowerment_map(&world, &s.map, region)?;
    write_grid_map(out, "empowerment", &map, &cells)?;
    let adjacent: Vec<serde_json::Value> = cells
        .iter()
        .zip(&map.values)
        .filter(|(c, _)| c.chebyshev(s.box_cell) == 1 && (c.x == s.box_cell.x || c.y == s.box_cell.y))
        .map(|(c, v)| json!({ "cell": c, "value": v }))
        .collect();
    out.json(
        "summary.json",
        &json!({
            "world": world.id(),
            "horizon": s.map.horizon,
            "method": s.map.method,
            "range": range_json(&map),
            "box_adjacent": adjacent,
        }),
    )
}

fn horizon_sweep(
    s: &HorizonSweepScenario,
    base: &Path,
    seed: u64,
    out: &mut Artifacts,
    progress: &Progress,
) -> Result<()> {
    let world = s.source().load(base, seed, "scenario.horizon-sweep")?;
    write_world(out, &world)?;
    let (_, cells) = world.raster_cells()?;
    let mut horizons = s.horizons.clone();
    horizons.sort_unstable();
    horizons.dedup();
    let mut maps = Vec::new();
    for &h in &horizons {
        progress.note(&format!("horizon {h}"));
        let params = MapParams {
            horizon: h,
            method: s.method,
            solver: s.solver,
            ..MapParams::default()
        };
        let map = empowerment_map(&world, &params, None)?;
        write_grid_map(out, &format!("empowerment-n{h}"), &map, &cells)?;
        maps.push(map);
    }
    // cells whose value drops when the horizon grows
    let mut decreasing = Vec::new();
    for w in maps.windows(2) {
        for (i, (a, b)) in w[0].values.iter().zip(&w[1].values).enumerate() {
            if let (Some(a), Some(b)) = (a, b) {
                if b < a {
                    decreasing.push(json!({ "cell": cells[i], "from_horizon": w[0].horizon, "drop": a - b }));
                }
            }
        }
    }
    let ranges: Vec<_> = maps
        .iter()
        .map(|m| json!({ "horizon": m.horizon, "range": range_json(m) }))
        .collect();
    out.json(
        "summary.json",
        &json!({
            "world": world.id(),
            "method": s.method,
            "ranges": ranges,
            "monotone": decreasing.is_empty(),
            "decreasing": decreasing,
        }),
    )
}

#[derive(Serialize)]
struct PartitionReport {
    assignment: Vec<usize>,
    contexts: usize,
    entropy_bits: f64,
    contextual_bits: f64,
}

fn context(s: &ContextScenario, base: &Path, out: &mut Artifacts, progress: &Progress) -> Result<()> {
    let (model, prior) = s.load(base)?;
    progress.note(&format!("state empowerment of {} states", model.n_states()));
    let per_state = (0..model.n_states())
        .map(|r| state_empowerment(&model, &r, s.horizon, &s.solver))
        .collect::<empowerment::Result<Vec<f64>>>()?;
    let average = average_state_empowerment(&model, &prior, s.horizon, &s.solver)?;
    let free = context_free_empowerment(&model, &prior, s.horizon, &s.solver)?;
    let mut partitions = Vec::new();
    for assignment in &s.partitions {
        let partition = ContextPartition::new(assignment.clone(), &prior)?;
        partitions.push(PartitionReport {
            assignment: assignment.clone(),
            contexts: partition.n_contexts(),
            entropy_bits: partition.entropy_bits(),
            contextual_bits: contextual_empowerment(&model, &partition, &prior, s.horizon, &s.solver)?,
        });
    }
    let optimal = if s.search {
        progress.note("optimal context search");
        let r = optimal_context_search(&model, &prior, s.horizon, &s.solver, s.tolerance)?;
        Some(json!({
            "assignment": r.partition.assignment(),
            "contexts": r.partition.n_contexts(),
            "entropy_bits": r.entropy_bits,
            "contextual_bits": r.contextual_bits,
            "partitions_examined": r.partitions_examined,
        }))
    } else {
        None
    };
    out.json(
        "context.json",
        &json!({
            "model": model.id(),
            "horizon": s.horizon,
            "prior": prior.as_slice(),
            "state_empowerment": per_state,
            "average_state_empowerment": average,
            "context_free_empowerment": free,
            "partitions": partitions,
            "optimal_context": optimal,
        }),
    )
}

fn action_names(seq: &[usize]) -> Vec<&'static str> {
    const NAMES: [&str; 5] = ["N", "E", "S", "W", "Stay"];
    seq.iter()
        .map(|&a| NAMES[GridAction::from_id(a).expect("grid action").id()])
        .collect()
}

fn impoverished(
    s: &ImpoverishedScenario,
    base: &Path,
    seed: u64,
    out: &mut Artifacts,
    progress: &Progress,
) -> Result<()> {
    let world = s.source().load(base, seed, "scenario.impoverished")?;
    write_world(out, &world)?;
    let start = world.initial_state(s.start);
    let horizon = s.params.horizon();
    progress.note(&format!("impoverished empowerment, horizon {horizon}"));
    let r = impoverished_empowerment(&world, &start, &s.params, &s.solver)?;
    let full = if s.compare_full && sequence_count(5, horizon) <= s.solver.sequence_budget as u128 {
        progress.note("full empowerment for comparison");
        Some(state_empowerment(&world, &start, horizon, &s.solver)?)
    } else {
        None
    };
    let skeleton: Vec<_> = r.skeleton.iter().map(|seq| action_names(seq)).collect();
    out.json(
        "impoverished.json",
        &json!({
            "world": world.id(),
            "start": s.start,
            "horizon": horizon,
            "params": s.params,
            "bits": r.bits,
            "stage_bits": r.stage_bits,
            "budget_clamped": r.budget_clamped,
            "skeleton": skeleton,
            "full_bits": full,
        }),
    )
}

fn channel(s: &ChannelScenario, base: &Path, out: &mut Artifacts) -> Result<()> {
    let ch = s.load(base)?;
    let r = BlahutArimoto::new(s.solver.epsilon, s.solver.max_iter).solve(&ch)?;
    out.json(
        "channel.json",
        &json!({
            "inputs": ch.n_inputs(),
            "outputs": ch.n_outputs(),
            "capacity_bits": r.capacity_bits,
            "upper_bound_bits": r.upper_bound_bits,
            "optimal_input": r.optimal_input.as_slice(),
            "iterations": r.iterations,
            "converged": r.converged,
        }),
    )
}

fn mimo(s: &MimoScenario, base: &Path, out: &mut Artifacts) -> Result<()> {
    let ch = s.load(base)?;
    let r = qlg_empowerment(&ch)?;
    out.json("mimo.json", &r)
}

fn pendulum_map(s: &PendulumMapScenario, out: &mut Artifacts, progress: &Progress) -> Result<()> {
    progress.note(&format!("{}x{} pendulum landscape", s.grid.phi_cells, s.grid.phidot_cells));
    let map = pendulum_empowerment_map(&s.params, &s.grid)?;
    out.write("pendulum-map.csv", pendulum_csv(&map, &s.grid).as_bytes())?;
    out.write("pendulum-map.pgm", &map.to_pgm()?)?;
    out.json("pendulum-map.json", &map)
}

/// `phi,phi_dot,value` per grid cell.
fn pendulum_csv(map: &EmpowermentMap, grid: &empowerment::pendulum::LandscapeGrid) -> String {
    let mut out = String::from("phi,phi_dot,value\n");
    for (i, v) in map.values.iter().enumerate() {
        if let Some(v) = v {
            let s = grid.state(i);
            writeln!(out, "{},{},{v}", s.phi, s.phi_dot).unwrap();
        }
    }
    out
}

fn pendulum_control(s: &PendulumControlScenario, seed: u64, out: &mut Artifacts, progress: &Progress) -> Result<()> {
    progress.note(&format!("greedy control for {} steps", s.steps));
    let t = greedy_control(&s.params, s.start, s.steps, s.mc_rollouts, seed)?;
    out.write("trajectory.csv", t.to_csv().as_bytes())?;
    out.json("summary.json", &swing_up_summary(&t, s.tolerance))
}

fn pendulum_scan(s: &PendulumScanScenario, out: &mut Artifacts, progress: &Progress) -> Result<()> {
    progress.note(&format!("scan over {} x {} settings", s.delta_ts.len(), s.powers.len()));
    let scan = power_scan(&s.params, &s.delta_ts, &s.powers, &s.grid)?;
    let mut index = Vec::new();
    for entry in &scan.entries {
        let stem = format!("maps/dt{}-p{}", entry.delta_t, entry.power);
        out.write(&format!("{stem}.csv"), pendulum_csv(&entry.map, &s.grid).as_bytes())?;
        out.write(&format!("{stem}.pgm"), &entry.map.to_pgm()?)?;
        index.push(json!({
            "delta_t": entry.delta_t,
            "power": entry.power,
            "csv": format!("{stem}.csv"),
            "pgm": format!("{stem}.pgm"),
            "range": range_json(&entry.map),
        }));
    }
    out.json("index.json", &json!({ "grid": s.grid, "params": s.params, "maps": index }))?;
    let inversions = find_inversions(&scan, &s.regions);
    progress.note(&format!("{} inversions found", inversions.len()));
    out.json("inversions.json", &json!({ "regions": s.regions, "inversions": inversions }))
}

fn correlation(s: &CorrelationScenario, seed: u64, out: &mut Artifacts, progress: &Progress) -> Result<()> {
    let mut rows = Vec::new();
    let mut negative = 0;
    for i in 0..s.mazes as u64 {
        let maze_seed = seed.wrapping_add(i);
        progress.note(&format!("maze seed {maze_seed}"));
        let world = maze(&s.maze, maze_seed)?;
        let r = correlation_report(&world, &s.map)?;
        if r.pearson.is_some_and(|r| r < 0.0) {
            negative += 1;
        }
        rows.push(json!({
            "seed": maze_seed,
            "pearson": r.pearson,
            "cells": r.n_cells,
            "empowerment_range": range_json(&r.empowerment),
        }));
    }
    out.json(
        "correlation.json",
        &json!({
            "horizon": s.map.horizon,
            "method": s.map.method,
            "mazes": rows,
            "negative": negative,
        }),
    )
}
