mod common;

use std::collections::HashMap;

use approx::assert_abs_diff_eq;
use empowerment::empowerment::{MapParams, Method};
use empowerment::gridworld::{
    as_transition_model, correlation_report, empowerment_map, maze, BoxSpec, Cell, GridAction, GridWorld,
    MazeParams, Region, Symmetry,
};
use proptest::prelude::*;

fn det(n: usize) -> MapParams {
    MapParams {
        horizon: n,
        method: Method::Deterministic,
        ..MapParams::default()
    }
}

fn box_world(pushable: bool, perceivable: bool) -> GridWorld {
    GridWorld::unbounded()
        .with_box(BoxSpec {
            cell: Cell::new(0, 0),
            pushable,
            perceivable,
        })
        .unwrap()
}

fn cell_values(world: &GridWorld, params: &MapParams, region: Option<Region>) -> HashMap<Cell, f64> {
    let map = empowerment_map(world, params, region).unwrap();
    let cells = match region {
        Some(r) => r.cells().1,
        None => world.raster_cells().unwrap().1,
    };
    cells
        .into_iter()
        .zip(map.values)
        .filter_map(|(c, v)| Some((c, v?)))
        .collect()
}

#[test]
fn unbounded_grid_is_flat() {
    // the n-step reachable diamond holds 2n^2 + 2n + 1 cells
    for n in 1..=4 {
        let map = empowerment_map(&GridWorld::unbounded(), &det(n), Some(Region::around(Cell::new(3, -2), 2))).unwrap();
        let expected = ((2 * n * n + 2 * n + 1) as f64).log2();
        assert!(map.values.iter().all(|v| *v == Some(expected)), "n = {n}");
    }
}

#[test]
fn box_map_properties_at_small_horizon() {
    let region = Some(Region::around(Cell::new(0, 0), 4));
    let p = det(3);
    let far_field = 25f64.log2();
    let still_seen = cell_values(&box_world(false, true), &p, region);
    let still_hidden = cell_values(&box_world(false, false), &p, region);
    assert_eq!(still_seen, still_hidden);
    let push_seen = cell_values(&box_world(true, true), &p, region);
    let push_hidden = cell_values(&box_world(true, false), &p, region);
    let adjacent = [Cell::new(1, 0), Cell::new(-1, 0), Cell::new(0, 1), Cell::new(0, -1)];
    for (c, v) in &push_seen {
        assert!(*v >= push_hidden[c], "{c:?}");
    }
    for c in adjacent {
        assert!(push_seen[&c] > push_hidden[&c]);
        assert!(push_seen[&c] > far_field);
        assert!(still_seen[&c] < far_field);
    }
}

#[test]
fn push_and_wall_rules() {
    let w = GridWorld::bounded(5, 5).unwrap().with_walls([Cell::new(2, 3)]).unwrap();
    let s = w.initial_state(Cell::new(2, 2));
    assert_eq!(w.step(&s, GridAction::North), s);
    assert_eq!(w.step(&s, GridAction::Stay), s);

    let b = GridWorld::bounded(5, 5)
        .unwrap()
        .with_box(BoxSpec {
            cell: Cell::new(2, 1),
            pushable: true,
            perceivable: true,
        })
        .unwrap();
    let s = b.initial_state(Cell::new(1, 1));
    let t = b.step(&s, GridAction::East);
    assert_eq!((t.agent, t.box_cell), (Cell::new(2, 1), Some(Cell::new(3, 1))));
    // box against the boundary: nobody moves
    let edge = b.step(&b.step(&t, GridAction::East), GridAction::East);
    assert_eq!((edge.agent, edge.box_cell), (Cell::new(3, 1), Some(Cell::new(4, 1))));
}

#[test]
fn noisy_rows_follow_collision_pattern() {
    let eps = 0.1;
    let w = GridWorld::bounded(3, 3).unwrap().with_noise(eps).unwrap();
    let gm = as_transition_model(&w, None).unwrap();
    assert_eq!(gm.states.len(), 9);
    let corner = gm.index_of(&w.initial_state(Cell::new(0, 0))).unwrap();
    // at a corner, N, E, Stay lead to distinct cells and S, W both stay
    let stay = gm.model.transition(corner, GridAction::Stay.id());
    let mut probs: Vec<f64> = stay.iter().map(|&(_, p)| p).collect();
    probs.sort_by(f64::total_cmp);
    assert_abs_diff_eq!(probs[0], eps / 4.0, epsilon = 1e-15);
    assert_abs_diff_eq!(probs[1], eps / 4.0, epsilon = 1e-15);
    assert_abs_diff_eq!(probs[2], 1.0 - eps + 2.0 * eps / 4.0, epsilon = 1e-15);
    for s in 0..9 {
        for a in 0..5 {
            let total: f64 = gm.model.transition(s, a).iter().map(|&(_, p)| p).sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        }
    }
}

/// Reachable (agent, box) pairs by an independent BFS over a bounded grid.
fn oracle_box_configurations(w: i32, h: i32, agent: (i32, i32), boxc: (i32, i32)) -> usize {
    let inside = |(x, y): (i32, i32)| x >= 0 && y >= 0 && x < w && y < h;
    let mut seen = std::collections::HashSet::from([(agent, boxc)]);
    let mut queue = vec![(agent, boxc)];
    while let Some((a, b)) = queue.pop() {
        for (dx, dy) in [(0, 1), (1, 0), (0, -1), (-1, 0), (0, 0)] {
            let t = (a.0 + dx, a.1 + dy);
            let next = if !inside(t) {
                (a, b)
            } else if t == b && (dx, dy) != (0, 0) {
                let beyond = (b.0 + dx, b.1 + dy);
                if inside(beyond) { (t, beyond) } else { (a, b) }
            } else {
                (t, b)
            };
            if seen.insert(next) {
                queue.push(next);
            }
        }
    }
    seen.len()
}

#[test]
fn bounded_box_world_state_count() {
    for (w, h, agent, boxc) in [(3, 3, (0, 0), (1, 1)), (4, 3, (0, 1), (1, 1)), (5, 4, (4, 3), (2, 2))] {
        let world = GridWorld::bounded(w as usize, h as usize)
            .unwrap()
            .with_box(BoxSpec {
                cell: Cell::new(boxc.0, boxc.1),
                pushable: true,
                perceivable: true,
            })
            .unwrap();
        let gm = as_transition_model(&world, None).unwrap();
        assert!(gm.states.iter().all(|s| Some(s.agent) != s.box_cell));
        // every free start cell shares the same configuration graph component
        let from_agent = empowerment::empowerment::reachable_states(
            &world,
            &world.initial_state(Cell::new(agent.0, agent.1)),
            64,
        )
        .unwrap();
        assert_eq!(from_agent.len(), oracle_box_configurations(w, h, agent, boxc));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn maps_follow_grid_symmetries(seed in 0u64..1000) {
        let world = maze(&MazeParams { width: 7, height: 6, loop_probability: 0.2 }, seed).unwrap();
        let bounds = world.bounds().unwrap();
        let p = det(3);
        let base = cell_values(&world, &p, None);
        for sym in Symmetry::ALL {
            let image = cell_values(&world.transformed(sym).unwrap(), &p, None);
            prop_assert_eq!(image.len(), base.len());
            for (c, v) in &base {
                prop_assert_eq!(image[&sym.apply(*c, bounds)], *v);
            }
        }
    }

    #[test]
    fn mirrored_maze_has_identical_correlation(seed in 0u64..1000) {
        let world = maze(&MazeParams::default(), seed).unwrap();
        let r = correlation_report(&world, &det(5)).unwrap().pearson;
        let mirrored = correlation_report(&world.transformed(Symmetry::MirrorX).unwrap(), &det(5)).unwrap().pearson;
        prop_assert!(r.is_some());
        prop_assert!((r.unwrap() - mirrored.unwrap()).abs() < 1e-12);
    }
}

#[test]
fn maze_is_seeded_and_connected() {
    let a = maze(&MazeParams::default(), 3).unwrap();
    let b = maze(&MazeParams::default(), 3).unwrap();
    let c = maze(&MazeParams::default(), 4).unwrap();
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    assert_ne!(a.walls(), c.walls());
    let report = correlation_report(&a, &det(5)).unwrap();
    assert!(report.distance.unreachable.is_empty());
    let back = GridWorld::from_json_str(&a.to_json().unwrap()).unwrap();
    assert_eq!(back.to_json().unwrap(), a.to_json().unwrap());
}

#[test]
fn empty_bounded_grid_correlation_is_reported() {
    // every cell reaches the whole 3x3 grid within 4 steps: flat map
    let r = correlation_report(&GridWorld::bounded(3, 3).unwrap(), &det(4)).unwrap();
    assert!(r.empowerment.values.iter().all(|v| *v == Some(9f64.log2())));
    assert_eq!(r.pearson, None);
}
