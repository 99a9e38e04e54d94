//! Bayesian optimization engines and baselines.
//!
//! The centerpiece is the BOPT loop ([`engine::bopt_run`]): spend a slice of
//! the budget on cheap low-shot observations, train a sparse GP on them, and
//! use its posterior mean as the prior mean of a residual GP that models the
//! expensive high-shot objective. Acquisition functions (LCB, analytic EI,
//! Monte-Carlo noisy EI) are optimized over the periodic parameter box by
//! multi-start gradient refinement. A standard-BO arm (zero prior, high-shot
//! initialization) and Powell's conjugate-direction method serve as
//! baselines.

mod acquisition;
mod engine;
mod gptp;
mod powell;

pub use acquisition::{
    acq_ei, acq_lcb, incumbent_eta, optimize_acquisition, AcqOptOptions, AcquisitionKind,
    Incumbent, NoisyEiState, PreparedAcquisition,
};
pub use engine::{
    bo_run_with_prior, bopt_run, standard_bo_run, BoOptions, BudgetLedger, Fidelity, FnObjective,
    InitDesign, Objective,
};
pub use gptp::{GpTpModel, TopologicalPrior};
pub use powell::{powell_run, PowellOptions};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BoptError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Gp(#[from] crate::gp::GpError),
    #[error(transparent)]
    Svgp(#[from] crate::svgp::SvgpError),
}
