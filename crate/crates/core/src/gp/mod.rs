//! Dense Gaussian-process regression.
//!
//! A [`GpModel`] conditions a GP prior (arbitrary mean function, Matérn-2.5
//! or periodic kernel) on observations and answers posterior mean/variance
//! queries through a cached Cholesky factor of `K + sigma^2 I`. Kernel
//! hyperparameters are learned by minimizing the negative marginal
//! log-likelihood with multi-start first-order optimization on analytic
//! gradients; see [`fit`].

mod fit;
mod kernel;
mod model;

pub use fit::{FitConfig, HYPER_BOUNDS};
pub use kernel::{KernelKind, KernelParams};
pub use model::{GpModel, PosteriorEval, PriorMean};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GpError {
    #[error("input dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("inputs and outputs disagree in length ({inputs} vs {outputs})")]
    LengthMismatch { inputs: usize, outputs: usize },
    #[error("covariance matrix is not positive definite even with jitter {max_jitter:e}")]
    NotPositiveDefinite { max_jitter: f64 },
    #[error("hyperparameter fit failed: {0}")]
    FitFailed(String),
    #[error("model has no cached factor (empty training set)")]
    Unfitted,
}
