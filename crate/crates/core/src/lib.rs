//! Empowerment: the channel capacity from an agent's actions to its later
//! sensor readings, for discrete transition models and continuous dynamics.
//!
//! * [`infotheory`]: entropies, mutual information, and a Blahut-Arimoto
//!   capacity solver.
//! * [`empowerment`]: n-step empowerment over finite models, contexts,
//!   impoverished empowerment, and greedy action selection.
//! * [`gridworld`]: mazes and box-pushing worlds.
//! * [`continuous`]: Monte Carlo and quasi-linear Gaussian approximations.
//! * [`pendulum`]: empowerment landscapes and swing-up control.
//!
//! All values are reported in bits.

pub mod continuous;
pub mod empowerment;
pub mod error;
pub mod exec;
pub mod gridworld;
pub mod infotheory;
pub mod pendulum;

pub use error::{Error, Result};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
