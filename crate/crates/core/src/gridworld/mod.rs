//! Two-dimensional grid worlds with walls and an optional box.
//!
//! The agent has five actions: one step north, east, south, or west, or
//! stay. Moving into a wall or off the grid leaves the agent in place.
//! Moving into a pushable box shoves it one cell further if that cell is
//! free; otherwise neither moves. A stationary box is just another obstacle.
//!
//! Coordinates are `(x, y)` with `y` growing northward. Rasters put the
//! largest `y` in row 0.

mod analysis;
mod maze;
mod model;

pub use analysis::{
    average_distance_map, correlation_report, empowerment_map, pearson, CorrelationReport, DistanceMap,
};
pub use maze::{maze, MazeParams};
pub use model::{as_transition_model, GridModel, Window};

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::empowerment::{Dynamics, Raster};
use crate::error::{invalid_param, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "(i32, i32)", into = "(i32, i32)")]
pub struct Cell {
    pub x: i32,
    pub y: i32,
}

impl Cell {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    pub fn offset(self, (dx, dy): (i32, i32)) -> Self {
        Self::new(self.x + dx, self.y + dy)
    }

    pub fn chebyshev(self, other: Cell) -> i32 {
        (self.x - other.x).abs().max((self.y - other.y).abs())
    }
}

impl From<(i32, i32)> for Cell {
    fn from((x, y): (i32, i32)) -> Self {
        Self { x, y }
    }
}

impl From<Cell> for (i32, i32) {
    fn from(c: Cell) -> Self {
        (c.x, c.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GridAction {
    North,
    East,
    South,
    West,
    Stay,
}

impl GridAction {
    pub const ALL: [GridAction; 5] = [Self::North, Self::East, Self::South, Self::West, Self::Stay];

    pub fn id(self) -> usize {
        self as usize
    }

    pub fn from_id(id: usize) -> Option<Self> {
        Self::ALL.get(id).copied()
    }

    pub fn delta(self) -> (i32, i32) {
        match self {
            Self::North => (0, 1),
            Self::East => (1, 0),
            Self::South => (0, -1),
            Self::West => (-1, 0),
            Self::Stay => (0, 0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridState {
    pub agent: Cell,
    #[serde(rename = "box", default, skip_serializing_if = "Option::is_none")]
    pub box_cell: Option<Cell>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    /// Initial box position.
    pub cell: Cell,
    pub pushable: bool,
    /// Whether the box position is part of the sensor reading.
    pub perceivable: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    pub width: usize,
    pub height: usize,
}

/// Grid layout and rules; immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WorldDocument", into = "WorldDocument")]
pub struct GridWorld {
    id: String,
    bounds: Option<Bounds>,
    walls: BTreeSet<Cell>,
    box_spec: Option<BoxSpec>,
    epsilon_noise: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WorldDocument {
    #[serde(default)]
    id: String,
    #[serde(default)]
    unbounded: bool,
    #[serde(default)]
    width: Option<usize>,
    #[serde(default)]
    height: Option<usize>,
    #[serde(default)]
    walls: Vec<Cell>,
    #[serde(rename = "box", default)]
    box_spec: Option<BoxSpec>,
    #[serde(default)]
    epsilon_noise: f64,
}

impl TryFrom<WorldDocument> for GridWorld {
    type Error = Error;

    fn try_from(doc: WorldDocument) -> Result<Self> {
        let bounds = match (doc.unbounded, doc.width, doc.height) {
            (true, None, None) => None,
            (false, Some(width), Some(height)) => Some(Bounds { width, height }),
            (true, _, _) => return Err(invalid_param("width", "an unbounded world takes no width or height")),
            (false, _, _) => return Err(invalid_param("width", "a bounded world needs width and height")),
        };
        let world = GridWorld {
            id: doc.id,
            bounds,
            walls: doc.walls.into_iter().collect(),
            box_spec: doc.box_spec,
            epsilon_noise: doc.epsilon_noise,
        };
        world.validate()?;
        Ok(world)
    }
}

impl From<GridWorld> for WorldDocument {
    fn from(w: GridWorld) -> Self {
        WorldDocument {
            id: w.id,
            unbounded: w.bounds.is_none(),
            width: w.bounds.map(|b| b.width),
            height: w.bounds.map(|b| b.height),
            walls: w.walls.into_iter().collect(),
            box_spec: w.box_spec,
            epsilon_noise: w.epsilon_noise,
        }
    }
}

impl GridWorld {
    pub fn bounded(width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(invalid_param("width", "grid dimensions must be >= 1"));
        }
        if width > i32::MAX as usize / 4 || height > i32::MAX as usize / 4 {
            return Err(invalid_param("width", "grid dimensions too large"));
        }
        Ok(Self {
            id: format!("grid-{width}x{height}"),
            bounds: Some(Bounds { width, height }),
            walls: BTreeSet::new(),
            box_spec: None,
            epsilon_noise: 0.0,
        })
    }

    pub fn unbounded() -> Self {
        Self {
            id: "open-grid".into(),
            bounds: None,
            walls: BTreeSet::new(),
            box_spec: None,
            epsilon_noise: 0.0,
        }
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn with_walls(mut self, walls: impl IntoIterator<Item = Cell>) -> Result<Self> {
        self.walls.extend(walls);
        self.validate()?;
        Ok(self)
    }

    pub fn with_box(mut self, spec: BoxSpec) -> Result<Self> {
        self.box_spec = Some(spec);
        self.validate()?;
        Ok(self)
    }

    pub fn with_noise(mut self, epsilon: f64) -> Result<Self> {
        self.epsilon_noise = epsilon;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.epsilon_noise) {
            return Err(invalid_param(
                "epsilon_noise",
                format!("must be in [0, 1), got {}", self.epsilon_noise),
            ));
        }
        if let Some(b) = self.bounds {
            if b.width == 0 || b.height == 0 {
                return Err(invalid_param("width", "grid dimensions must be >= 1"));
            }
            if let Some(w) = self.walls.iter().find(|c| !self.in_bounds(**c)) {
                return Err(invalid_param("walls", format!("wall ({}, {}) is outside the grid", w.x, w.y)));
            }
        }
        if let Some(spec) = self.box_spec {
            if !self.is_free(spec.cell) {
                return Err(invalid_param(
                    "box",
                    format!("box cell ({}, {}) is a wall or outside the grid", spec.cell.x, spec.cell.y),
                ));
            }
        }
        Ok(())
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn bounds(&self) -> Option<Bounds> {
        self.bounds
    }

    pub fn walls(&self) -> &BTreeSet<Cell> {
        &self.walls
    }

    pub fn box_spec(&self) -> Option<BoxSpec> {
        self.box_spec
    }

    pub fn epsilon_noise(&self) -> f64 {
        self.epsilon_noise
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        match self.bounds {
            None => true,
            Some(b) => c.x >= 0 && c.y >= 0 && (c.x as usize) < b.width && (c.y as usize) < b.height,
        }
    }

    /// Inside the grid and not a wall.
    pub fn is_free(&self, c: Cell) -> bool {
        self.in_bounds(c) && !self.walls.contains(&c)
    }

    /// State with the agent at `agent` and the box at its initial cell.
    pub fn initial_state(&self, agent: Cell) -> GridState {
        GridState {
            agent,
            box_cell: self.box_spec.map(|b| b.cell),
        }
    }

    pub fn check_grid_state(&self, s: &GridState) -> Result<()> {
        if !self.is_free(s.agent) {
            return Err(Error::InvalidModel(format!(
                "agent cell ({}, {}) is a wall or outside the grid",
                s.agent.x, s.agent.y
            )));
        }
        match (self.box_spec, s.box_cell) {
            (None, None) => Ok(()),
            (Some(_), Some(b)) if self.is_free(b) && b != s.agent => Ok(()),
            (Some(_), Some(_)) => Err(Error::InvalidModel("box overlaps the agent or a wall".into())),
            _ => Err(Error::InvalidModel("box presence does not match the world".into())),
        }
    }

    /// Noise-free transition.
    pub fn step(&self, s: &GridState, action: GridAction) -> GridState {
        self.step_within(s, action, None)
    }

    /// Noise-free transition with every cell outside `window` treated as a wall.
    pub(crate) fn step_within(&self, s: &GridState, action: GridAction, window: Option<&Window>) -> GridState {
        if action == GridAction::Stay {
            return *s;
        }
        let free = |c: Cell| self.is_free(c) && window.is_none_or(|w| w.contains(c));
        let d = action.delta();
        let target = s.agent.offset(d);
        if !free(target) {
            return *s;
        }
        match s.box_cell {
            Some(b) if b == target => {
                let pushable = self.box_spec.is_some_and(|spec| spec.pushable);
                let beyond = b.offset(d);
                if pushable && free(beyond) {
                    GridState {
                        agent: target,
                        box_cell: Some(beyond),
                    }
                } else {
                    *s
                }
            }
            _ => GridState {
                agent: target,
                box_cell: s.box_cell,
            },
        }
    }

    /// Free cells in raster order (top row first); bounded worlds only.
    pub fn raster_cells(&self) -> Result<(Raster, Vec<Cell>)> {
        let b = self
            .bounds
            .ok_or_else(|| invalid_param("bounds", "an unbounded world needs an explicit region"))?;
        Ok(Region::new(0, 0, b.width, b.height).cells())
    }

    /// The world under a grid symmetry; bounded worlds only.
    pub fn transformed(&self, sym: Symmetry) -> Result<Self> {
        let b = self
            .bounds
            .ok_or_else(|| invalid_param("bounds", "symmetries need a bounded world"))?;
        let map = |c: Cell| sym.apply(c, b);
        let (width, height) = sym.dims(b);
        Ok(Self {
            id: format!("{}:{sym:?}", self.id),
            bounds: Some(Bounds { width, height }),
            walls: self.walls.iter().map(|&c| map(c)).collect(),
            box_spec: self.box_spec.map(|s| BoxSpec { cell: map(s.cell), ..s }),
            epsilon_noise: self.epsilon_noise,
        })
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

    /// ASCII picture: `#` wall, `B` box, `.` free; top row first.
    pub fn render(&self) -> Option<String> {
        let b = self.bounds?;
        let mut out = String::new();
        for row in 0..b.height {
            let y = (b.height - 1 - row) as i32;
            for x in 0..b.width as i32 {
                let c = Cell::new(x, y);
                out.push(if self.walls.contains(&c) {
                    '#'
                } else if self.box_spec.is_some_and(|s| s.cell == c) {
                    'B'
                } else {
                    '.'
                });
            }
            out.push('\n');
        }
        Some(out)
    }
}

impl Dynamics for GridWorld {
    type State = GridState;
    type Sensor = GridState;

    fn n_actions(&self) -> usize {
        GridAction::ALL.len()
    }

    /// The intended move with probability `1 - ε`; each of the other four
    /// actions' outcomes with `ε / 4`.
    fn successors(&self, state: &GridState, action: usize, out: &mut Vec<(GridState, f64)>) {
        let eps = self.epsilon_noise;
        if eps == 0.0 {
            out.push((self.step(state, GridAction::ALL[action]), 1.0));
            return;
        }
        for (b, &act) in GridAction::ALL.iter().enumerate() {
            let p = if b == action { 1.0 - eps } else { eps / 4.0 };
            out.push((self.step(state, act), p));
        }
    }

    fn sense(&self, state: &GridState) -> GridState {
        let perceivable = self.box_spec.is_some_and(|s| s.perceivable);
        GridState {
            agent: state.agent,
            box_cell: if perceivable { state.box_cell } else { None },
        }
    }

    fn is_deterministic(&self) -> bool {
        self.epsilon_noise == 0.0
    }

    fn check_state(&self, state: &GridState) -> Result<()> {
        self.check_grid_state(state)
    }
}

/// Rectangle of cells `[x0, x0 + width) × [y0, y0 + height)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    pub x0: i32,
    pub y0: i32,
    pub width: usize,
    pub height: usize,
}

impl Region {
    pub fn new(x0: i32, y0: i32, width: usize, height: usize) -> Self {
        Self { x0, y0, width, height }
    }

    /// Square of side `2r + 1` centred on `c`.
    pub fn around(c: Cell, r: usize) -> Self {
        Self::new(c.x - r as i32, c.y - r as i32, 2 * r + 1, 2 * r + 1)
    }

    pub fn raster(&self) -> Raster {
        Raster {
            width: self.width,
            height: self.height,
        }
    }

    /// Cell shown at raster `(row, col)`.
    pub fn cell(&self, row: usize, col: usize) -> Cell {
        Cell::new(self.x0 + col as i32, self.y0 + (self.height - 1 - row) as i32)
    }

    /// All cells in raster order.
    pub fn cells(&self) -> (Raster, Vec<Cell>) {
        let cells = (0..self.height)
            .flat_map(|row| (0..self.width).map(move |col| (row, col)))
            .map(|(row, col)| self.cell(row, col))
            .collect();
        (self.raster(), cells)
    }
}

/// The eight symmetries of a rectangle (rotations counterclockwise).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Symmetry {
    Identity,
    Rotate90,
    Rotate180,
    Rotate270,
    MirrorX,
    MirrorY,
    Transpose,
    AntiTranspose,
}

impl Symmetry {
    pub const ALL: [Symmetry; 8] = [
        Self::Identity,
        Self::Rotate90,
        Self::Rotate180,
        Self::Rotate270,
        Self::MirrorX,
        Self::MirrorY,
        Self::Transpose,
        Self::AntiTranspose,
    ];

    /// Dimensions of the transformed grid.
    pub fn dims(self, b: Bounds) -> (usize, usize) {
        match self {
            Self::Identity | Self::Rotate180 | Self::MirrorX | Self::MirrorY => (b.width, b.height),
            _ => (b.height, b.width),
        }
    }

    pub fn apply(self, c: Cell, b: Bounds) -> Cell {
        let (w, h) = (b.width as i32, b.height as i32);
        let (x, y) = (c.x, c.y);
        let (nx, ny) = match self {
            Self::Identity => (x, y),
            Self::Rotate90 => (h - 1 - y, x),
            Self::Rotate180 => (w - 1 - x, h - 1 - y),
            Self::Rotate270 => (y, w - 1 - x),
            Self::MirrorX => (w - 1 - x, y),
            Self::MirrorY => (x, h - 1 - y),
            Self::Transpose => (y, x),
            Self::AntiTranspose => (h - 1 - y, w - 1 - x),
        };
        Cell::new(nx, ny)
    }
}
