use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Cell, GridWorld};
use crate::error::{invalid_param, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MazeParams {
    pub width: usize,
    pub height: usize,
    /// Probability of knocking out each remaining wall that separates two
    /// corridors, which adds loops to the otherwise tree-shaped maze.
    pub loop_probability: f64,
}

impl Default for MazeParams {
    fn default() -> Self {
        Self {
            width: 10,
            height: 10,
            loop_probability: 0.1,
        }
    }
}

impl MazeParams {
    pub fn validate(&self) -> Result<()> {
        if self.width < 1 || self.height < 1 {
            return Err(invalid_param("width", "maze dimensions must be >= 1"));
        }
        if self.width > 10_000 || self.height > 10_000 {
            return Err(invalid_param("width", "maze dimensions must be <= 10000"));
        }
        if !(0.0..=1.0).contains(&self.loop_probability) {
            return Err(invalid_param(
                "loop_probability",
                format!("must be in [0, 1], got {}", self.loop_probability),
            ));
        }
        Ok(())
    }
}

/// Seeded recursive-backtracker maze.
///
/// Junction cells sit at even coordinates and every other cell starts as a
/// wall. A depth-first walk with shuffled neighbour order carves a spanning
/// tree; afterwards each wall lying between two corridor cells is removed
/// with probability `loop_probability`. Identical seeds give identical mazes.
pub fn maze(params: &MazeParams, seed: u64) -> Result<GridWorld> {
    params.validate()?;
    let (w, h) = (params.width as i32, params.height as i32);
    let mut open = vec![false; params.width * params.height];
    let idx = |c: Cell| (c.y * w + c.x) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let start = Cell::new(0, 0);
    open[idx(start)] = true;
    let mut stack = vec![start];
    while let Some(&cur) = stack.last() {
        let mut next: Vec<Cell> = [(0, 2), (2, 0), (0, -2), (-2, 0)]
            .iter()
            .map(|&d| cur.offset(d))
            .filter(|c| c.x >= 0 && c.y >= 0 && c.x < w && c.y < h && !open[idx(*c)])
            .collect();
        if next.is_empty() {
            stack.pop();
            continue;
        }
        next.shuffle(&mut rng);
        let n = next[0];
        open[idx(Cell::new((cur.x + n.x) / 2, (cur.y + n.y) / 2))] = true;
        open[idx(n)] = true;
        stack.push(n);
    }

    // Walls between two open cells in a straight line become loops.
    for y in 0..h {
        for x in 0..w {
            let c = Cell::new(x, y);
            if open[idx(c)] {
                continue;
            }
            let horizontal = x > 0 && x + 1 < w && open[idx(c.offset((-1, 0)))] && open[idx(c.offset((1, 0)))];
            let vertical = y > 0 && y + 1 < h && open[idx(c.offset((0, -1)))] && open[idx(c.offset((0, 1)))];
            if (horizontal ^ vertical) && rng.random::<f64>() < params.loop_probability {
                open[idx(c)] = true;
            }
        }
    }

    let walls = (0..h)
        .flat_map(|y| (0..w).map(move |x| Cell::new(x, y)))
        .filter(|&c| !open[idx(c)]);
    GridWorld::bounded(params.width, params.height)?
        .with_id(format!("maze-{}x{}-seed{seed}", params.width, params.height))
        .with_walls(walls)
}
