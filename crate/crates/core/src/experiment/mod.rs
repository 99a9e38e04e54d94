//! Configuration-driven experiment harness.
//!
//! [`run_experiment`] executes every `(arm, seed)` job of an
//! [`ExperimentConfig`], writing one `bopt-v1` CSV per run plus a JSON
//! manifest. The companion operations close the loop from the figures'
//! perspective: [`validate_trace`] re-evaluates best-so-far trajectories on
//! the noise-free simulator, [`emit_parity_data`] pairs noisy observations
//! with their exact energies, and [`plot`] renders convergence curves with
//! standard-error bands to SVG.

mod config;
mod parity;
pub mod plot;
mod runner;
mod validate;

pub use config::{
    parse_ansatz_spec, Arm, ConfigError, ExperimentConfig, NoiseSection, RunSection,
};
pub use parity::{emit_parity_data, histogram_csv, linear_fit, parity_csv, Histogram, ParityRow};
pub use runner::{run_experiment, Manifest, RunOutcome, SimObjective};
pub use validate::validate_trace;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Hamiltonian(#[from] crate::hamiltonian::HamiltonianError),
    #[error(transparent)]
    Sim(#[from] crate::sim::SimError),
    #[error(transparent)]
    Record(#[from] crate::record::RecordError),
    #[error("record has {got}-dimensional parameters, ansatz expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{0}")]
    Data(String),
    #[error("failed to access {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}
