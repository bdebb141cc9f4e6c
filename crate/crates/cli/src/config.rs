//! Run configuration: one JSON document per run, parsed strictly.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use empowerment::continuous::LinearGaussianChannel;
use empowerment::empowerment::{
    sequence_count, ImpoverishedParams, MapParams, Method, SolverParams, TransitionModel,
};
use empowerment::gridworld::{maze, BoxSpec, Cell, GridWorld, MazeParams};
use empowerment::infotheory::{BlahutArimoto, DiscreteChannel, ProbabilityVector};
use empowerment::pendulum::{InversionRegions, LandscapeGrid, PendulumParams, PendulumState};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Worker threads; all cores when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    pub scenario: Scenario,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Maze(MazeScenario),
    Box(BoxScenario),
    HorizonSweep(HorizonSweepScenario),
    Context(ContextScenario),
    Impoverished(ImpoverishedScenario),
    Channel(ChannelScenario),
    Mimo(MimoScenario),
    PendulumMap(PendulumMapScenario),
    PendulumControl(PendulumControlScenario),
    PendulumScan(PendulumScanScenario),
    Correlation(CorrelationScenario),
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Maze(_) => "maze",
            Scenario::Box(_) => "box",
            Scenario::HorizonSweep(_) => "horizon-sweep",
            Scenario::Context(_) => "context",
            Scenario::Impoverished(_) => "impoverished",
            Scenario::Channel(_) => "channel",
            Scenario::Mimo(_) => "mimo",
            Scenario::PendulumMap(_) => "pendulum-map",
            Scenario::PendulumControl(_) => "pendulum-control",
            Scenario::PendulumScan(_) => "pendulum-scan",
            Scenario::Correlation(_) => "correlation",
        }
    }
}

/// A maze world: generated from `maze` and the run seed, or loaded from
/// `world` when given.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MazeSource {
    pub maze: MazeParams,
    pub world: Option<PathBuf>,
    pub epsilon_noise: f64,
}

impl MazeSource {
    pub fn load(&self, base: &Path, seed: u64, at: &str) -> Result<GridWorld> {
        let world = match &self.world {
            Some(p) => GridWorld::from_json_path(base.join(p)).map_err(|e| CliError::config(&format!("{at}.world"), e))?,
            None => maze(&self.maze, seed).map_err(|e| CliError::config(&format!("{at}.maze"), e))?,
        };
        if self.epsilon_noise == 0.0 {
            return Ok(world);
        }
        world.with_noise(self.epsilon_noise).map_err(|e| CliError::config(at, e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MazeScenario {
    pub maze: MazeParams,
    /// World file; overrides `maze` when given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub world: Option<PathBuf>,
    pub epsilon_noise: f64,
    pub map: MapParams,
    /// Also write the average distance map and its correlation.
    pub distance: bool,
}

impl Default for MazeScenario {
    fn default() -> Self {
        Self {
            maze: MazeParams::default(),
            world: None,
            epsilon_noise: 0.0,
            map: MapParams::default(),
            distance: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoxScenario {
    /// Bounded grid size; both absent means the unbounded grid.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub width: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub height: Option<usize>,
    pub box_cell: Cell,
    pub pushable: bool,
    pub perceivable: bool,
    /// Half-width of the mapped window around the box on unbounded grids.
    pub radius: usize,
    pub epsilon_noise: f64,
    pub map: MapParams,
}

impl Default for BoxScenario {
    fn default() -> Self {
        Self {
            width: None,
            height: None,
            box_cell: Cell::new(0, 0),
            pushable: true,
            perceivable: true,
            radius: 7,
            epsilon_noise: 0.0,
            map: MapParams::default(),
        }
    }
}

impl BoxScenario {
    pub fn world(&self) -> Result<GridWorld> {
        let at = "scenario.box";
        let base = match (self.width, self.height) {
            (None, None) => GridWorld::unbounded(),
            (Some(w), Some(h)) => GridWorld::bounded(w, h).map_err(|e| CliError::config(at, e))?,
            _ => return Err(CliError::config(at, "give both width and height, or neither")),
        };
        let world = base
            .with_id(format!("box-{}-{}", if self.pushable { "pushable" } else { "stationary" }, if self.perceivable { "seen" } else { "hidden" }))
            .with_box(BoxSpec {
                cell: self.box_cell,
                pushable: self.pushable,
                perceivable: self.perceivable,
            })
            .map_err(|e| CliError::config(&format!("{at}.box_cell"), e))?;
        if self.epsilon_noise == 0.0 {
            return Ok(world);
        }
        world.with_noise(self.epsilon_noise).map_err(|e| CliError::config(at, e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HorizonSweepScenario {
    pub maze: MazeParams,
    /// World file; overrides `maze` when given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub world: Option<PathBuf>,
    pub epsilon_noise: f64,
    pub horizons: Vec<usize>,
    pub method: Method,
    pub solver: SolverParams,
}

impl Default for HorizonSweepScenario {
    fn default() -> Self {
        Self {
            maze: MazeParams::default(),
            world: None,
            epsilon_noise: 0.0,
            horizons: (1..=5).collect(),
            method: Method::Deterministic,
            solver: SolverParams::default(),
        }
    }
}

/// A model given inline or as a path to a JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Source<T> {
    Path(PathBuf),
    Inline(T),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContextScenario {
    pub model: Source<TransitionModel>,
    /// State prior; uniform when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<Vec<f64>>,
    #[serde(default = "one")]
    pub horizon: usize,
    #[serde(default)]
    pub solver: SolverParams,
    /// Partitions (state -> context id) to evaluate in addition to the search.
    #[serde(default)]
    pub partitions: Vec<Vec<usize>>,
    #[serde(default = "yes")]
    pub search: bool,
    #[serde(default = "default_context_tol")]
    pub tolerance: f64,
}

fn one() -> usize {
    1
}

fn yes() -> bool {
    true
}

fn default_context_tol() -> f64 {
    1e-6
}

impl ContextScenario {
    pub fn load(&self, base: &Path) -> Result<(TransitionModel, ProbabilityVector)> {
        let at = "scenario.context";
        let model = match &self.model {
            Source::Path(p) => TransitionModel::from_json_path(base.join(p)).map_err(|e| CliError::config(&format!("{at}.model"), e))?,
            Source::Inline(m) => m.clone(),
        };
        let prior = match &self.prior {
            None => ProbabilityVector::uniform(model.n_states()),
            Some(p) if p.len() != model.n_states() => {
                return Err(CliError::config(
                    &format!("{at}.prior"),
                    format!("has {} entries, model has {} states", p.len(), model.n_states()),
                ))
            }
            Some(p) => ProbabilityVector::new(p.clone()).map_err(|e| CliError::config(&format!("{at}.prior"), e))?,
        };
        Ok((model, prior))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ImpoverishedScenario {
    pub maze: MazeParams,
    /// World file; overrides `maze` when given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub world: Option<PathBuf>,
    pub epsilon_noise: f64,
    pub start: Cell,
    pub params: ImpoverishedParams,
    pub solver: SolverParams,
    /// Also compute full empowerment when the horizon is enumerable.
    pub compare_full: bool,
}

impl Default for ImpoverishedScenario {
    fn default() -> Self {
        Self {
            maze: MazeParams::default(),
            world: None,
            epsilon_noise: 0.1,
            start: Cell::new(0, 0),
            params: ImpoverishedParams::default(),
            solver: SolverParams::default(),
            compare_full: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelScenario {
    /// CSV path or inline rows.
    pub channel: Source<Vec<Vec<f64>>>,
    #[serde(default)]
    pub solver: BlahutArimoto,
}

impl ChannelScenario {
    pub fn load(&self, base: &Path) -> Result<DiscreteChannel> {
        let at = "scenario.channel.channel";
        match &self.channel {
            Source::Path(p) => DiscreteChannel::from_csv_path(base.join(p)).map_err(|e| CliError::config(at, e)),
            Source::Inline(rows) => DiscreteChannel::new(rows.clone()).map_err(|e| CliError::config(at, e)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MimoScenario {
    pub channel: Source<LinearGaussianChannel>,
}

impl MimoScenario {
    pub fn load(&self, base: &Path) -> Result<LinearGaussianChannel> {
        let at = "scenario.mimo.channel";
        let ch = match &self.channel {
            Source::Path(p) => {
                let text = std::fs::read_to_string(base.join(p)).map_err(|e| CliError::config(at, e))?;
                LinearGaussianChannel::from_json_str(&text).map_err(|e| CliError::config(at, e))?
            }
            Source::Inline(ch) => ch.clone(),
        };
        ch.validate().map_err(|e| CliError::config(at, e))?;
        Ok(ch)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PendulumMapScenario {
    pub params: PendulumParams,
    pub grid: LandscapeGrid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PendulumControlScenario {
    pub params: PendulumParams,
    pub start: PendulumState,
    pub steps: usize,
    pub mc_rollouts: usize,
    /// Upright band `|φ| > π - tolerance` used in the summary.
    pub tolerance: f64,
}

impl Default for PendulumControlScenario {
    fn default() -> Self {
        Self {
            params: PendulumParams::default(),
            start: PendulumState::REST,
            steps: 300,
            mc_rollouts: 8,
            tolerance: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PendulumScanScenario {
    pub params: PendulumParams,
    pub delta_ts: Vec<f64>,
    pub powers: Vec<f64>,
    pub grid: LandscapeGrid,
    pub regions: InversionRegions,
}

impl Default for PendulumScanScenario {
    fn default() -> Self {
        Self {
            params: PendulumParams::default(),
            delta_ts: vec![0.1, 0.3, 0.5, 0.7, 0.9, 1.1, 1.3, 1.5],
            powers: vec![0.1, 0.5, 1.0, 5.0],
            grid: LandscapeGrid::default(),
            regions: InversionRegions::default(),
        }
    }
}

/// Correlation between empowerment and average distance over several
/// seeded mazes (seeds `seed, seed + 1, ...`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorrelationScenario {
    pub maze: MazeParams,
    pub mazes: usize,
    pub map: MapParams,
}

impl Default for CorrelationScenario {
    fn default() -> Self {
        Self {
            maze: MazeParams::default(),
            mazes: 10,
            map: MapParams::default(),
        }
    }
}

macro_rules! maze_source {
    ($($t:ty),*) => {$(
        impl $t {
            pub fn source(&self) -> MazeSource {
                MazeSource {
                    maze: self.maze,
                    world: self.world.clone(),
                    epsilon_noise: self.epsilon_noise,
                }
            }
        }
    )*};
}

maze_source!(MazeScenario, HorizonSweepScenario, ImpoverishedScenario);

/// Parses a config document, reporting the failing field path and position.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let at = if path == "." { "config".to_string() } else { path };
        CliError::Config(format!("{at}: {inner}"))
    })?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        action: "read config",
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

fn check_map(map: &MapParams, at: &str) -> Result<()> {
    map.validate().map_err(|e| CliError::config(at, e))
}

/// Semantic checks beyond parsing. Input files are loaded but nothing is
/// written. Returns advisories that do not stop a run.
pub fn validate(config: &RunConfig, base: &Path) -> Result<Vec<String>> {
    if config.workers == Some(0) {
        return Err(CliError::config("workers", "must be >= 1"));
    }
    let mut advisories = Vec::new();
    let mut budget_advisory = |n_actions: usize, horizon: usize, budget: usize, method: Method| {
        let count = sequence_count(n_actions, horizon);
        if method == Method::BlahutArimoto && count > budget as u128 {
            advisories.push(format!(
                "horizon {horizon} needs {n_actions}^{horizon} = {count} action sequences, above the enumeration budget of {budget}; use method \"impoverished\""
            ));
        }
    };
    let seed = config.seed;
    match &config.scenario {
        Scenario::Maze(s) => {
            s.source().load(base, seed, "scenario.maze")?;
            check_map(&s.map, "scenario.maze.map")?;
            budget_advisory(5, s.map.horizon, s.map.solver.sequence_budget, s.map.method);
        }
        Scenario::Box(s) => {
            s.world()?;
            check_map(&s.map, "scenario.box.map")?;
            budget_advisory(5, s.map.horizon, s.map.solver.sequence_budget, s.map.method);
        }
        Scenario::HorizonSweep(s) => {
            s.source().load(base, seed, "scenario.horizon-sweep")?;
            if s.horizons.is_empty() {
                return Err(CliError::config("scenario.horizon-sweep.horizons", "must not be empty"));
            }
            for &h in &s.horizons {
                let map = MapParams {
                    horizon: h,
                    method: s.method,
                    solver: s.solver,
                    ..MapParams::default()
                };
                check_map(&map, "scenario.horizon-sweep")?;
                if s.method == Method::Impoverished {
                    return Err(CliError::config("scenario.horizon-sweep.method", "impoverished is not swept; use the impoverished scenario"));
                }
                budget_advisory(5, h, s.solver.sequence_budget, s.method);
            }
        }
        Scenario::Context(s) => {
            let (model, _) = s.load(base)?;
            if s.horizon < 1 {
                return Err(CliError::config("scenario.context.horizon", "must be >= 1"));
            }
            s.solver.validate().map_err(|e| CliError::config("scenario.context.solver", e))?;
            if !(s.tolerance >= 0.0) {
                return Err(CliError::config("scenario.context.tolerance", "must be >= 0"));
            }
            for (i, p) in s.partitions.iter().enumerate() {
                if p.len() != model.n_states() {
                    return Err(CliError::config(
                        &format!("scenario.context.partitions[{i}]"),
                        format!("has {} entries, model has {} states", p.len(), model.n_states()),
                    ));
                }
            }
            budget_advisory(model.action_names().len(), s.horizon, s.solver.sequence_budget, Method::BlahutArimoto);
        }
        Scenario::Impoverished(s) => {
            let world = s.source().load(base, seed, "scenario.impoverished")?;
            s.params.validate().map_err(|e| CliError::config("scenario.impoverished.params", e))?;
            s.solver.validate().map_err(|e| CliError::config("scenario.impoverished.solver", e))?;
            world
                .check_grid_state(&world.initial_state(s.start))
                .map_err(|e| CliError::config("scenario.impoverished.start", e))?;
            let per_stage = sequence_count(5, s.params.segment_n);
            if per_stage > s.solver.sequence_budget as u128 {
                return Err(CliError::config(
                    "scenario.impoverished.params.segment_n",
                    format!("5^{} = {per_stage} sequences per stage exceed the enumeration budget", s.params.segment_n),
                ));
            }
        }
        Scenario::Channel(s) => {
            s.load(base)?;
            s.solver.validate().map_err(|e| CliError::config("scenario.channel.solver", e))?;
        }
        Scenario::Mimo(s) => {
            s.load(base)?;
        }
        Scenario::PendulumMap(s) => {
            s.params.validate().map_err(|e| CliError::config("scenario.pendulum-map.params", e))?;
            s.grid.validate().map_err(|e| CliError::config("scenario.pendulum-map.grid", e))?;
        }
        Scenario::PendulumControl(s) => {
            s.params.validate().map_err(|e| CliError::config("scenario.pendulum-control.params", e))?;
            if s.mc_rollouts < 1 {
                return Err(CliError::config("scenario.pendulum-control.mc_rollouts", "must be >= 1"));
            }
            if !(s.tolerance > 0.0 && s.tolerance < PI) {
                return Err(CliError::config("scenario.pendulum-control.tolerance", "must be in (0, π)"));
            }
        }
        Scenario::PendulumScan(s) => {
            let at = "scenario.pendulum-scan";
            s.params.validate().map_err(|e| CliError::config(&format!("{at}.params"), e))?;
            s.grid.validate().map_err(|e| CliError::config(&format!("{at}.grid"), e))?;
            if s.delta_ts.is_empty() || s.delta_ts.iter().any(|d| !(*d > 0.0)) {
                return Err(CliError::config(&format!("{at}.delta_ts"), "need at least one positive value"));
            }
            if s.powers.is_empty() || s.powers.iter().any(|p| !(*p > 0.0)) {
                return Err(CliError::config(&format!("{at}.powers"), "need at least one positive value"));
            }
        }
        Scenario::Correlation(s) => {
            s.maze.validate().map_err(|e| CliError::config("scenario.correlation.maze", e))?;
            check_map(&s.map, "scenario.correlation.map")?;
            if s.mazes < 1 {
                return Err(CliError::config("scenario.correlation.mazes", "must be >= 1"));
            }
            budget_advisory(5, s.map.horizon, s.map.solver.sequence_budget, s.map.method);
        }
    }
    Ok(advisories)
}
