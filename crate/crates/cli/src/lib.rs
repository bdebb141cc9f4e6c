//! Config-driven experiment runner for the `empowerment` crate.
//!
//! A run reads one JSON config naming a scenario, computes it, and writes
//! CSV, PGM and JSON artifacts plus a `manifest.json` with checksums. See
//! [`config::RunConfig`] for the schema.

pub mod config;
pub mod error;
pub mod output;
mod scenarios;

use std::path::{Path, PathBuf};
use std::time::Instant;

pub use config::{load_config, parse_config, validate, RunConfig, Scenario};
pub use error::{CliError, Result};
pub use output::{Artifacts, Manifest, MANIFEST_NAME};

/// Command-line overrides applied on top of a config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub output_dir: Option<PathBuf>,
    pub workers: Option<usize>,
    pub seed: Option<u64>,
}

impl Overrides {
    pub fn apply(&self, config: &RunConfig) -> RunConfig {
        let mut c = config.clone();
        if let Some(dir) = &self.output_dir {
            c.output_dir = dir.clone();
        }
        if self.workers.is_some() {
            c.workers = self.workers;
        }
        if let Some(seed) = self.seed {
            c.seed = seed;
        }
        c
    }
}

/// Progress lines on stderr.
#[derive(Debug, Clone, Copy, Default)]
pub struct Progress {
    pub quiet: bool,
}

impl Progress {
    pub fn note(&self, msg: &str) {
        if !self.quiet {
            eprintln!("empower: {msg}");
        }
    }
}

/// Runs `f` on a pool of `workers` threads; one worker means strictly
/// sequential execution.
fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match workers {
        None => f(),
        Some(1) => empowerment::exec::sequential(f),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::config("workers", e))?
            .install(f),
    }
}

/// Validates and runs `config`, writing artifacts and the manifest into
/// `config.output_dir`. Relative input paths resolve against `base`.
pub fn run(config: &RunConfig, base: &Path, progress: Progress) -> Result<Manifest> {
    for a in validate(config, base)? {
        progress.note(&format!("advisory: {a}"));
    }
    let started = Instant::now();
    let mut out = Artifacts::new(&config.output_dir)?;
    progress.note(&format!("running {} into {}", config.scenario.name(), config.output_dir.display()));
    with_workers(config.workers, || scenarios::run_scenario(config, base, &mut out, &progress))?;
    let manifest = Manifest {
        scenario: config.scenario.name().to_string(),
        config: config.clone(),
        versions: output::Versions::current(),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        artifacts: out.records().to_vec(),
    };
    let mut manifest_out = Artifacts::new(out.dir())?;
    manifest_out.json(MANIFEST_NAME, &manifest)?;
    progress.note(&format!("wrote {} artifacts", manifest.artifacts.len()));
    Ok(manifest)
}

/// Dry run: the resolved config with every default filled in, plus
/// advisories. Nothing is written.
pub fn verify(config: &RunConfig, base: &Path) -> Result<(String, Vec<String>)> {
    let advisories = validate(config, base)?;
    let resolved = serde_json::to_string_pretty(config).map_err(empowerment::Error::from)?;
    Ok((resolved, advisories))
}

/// Directory that relative paths inside a config file refer to.
pub fn config_base(config_path: &Path) -> PathBuf {
    config_path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default()
}
