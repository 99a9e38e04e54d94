//! Shot-efficient Bayesian optimization for variational quantum eigensolvers.
//!
//! The crate bundles everything needed to study VQE parameter optimization on
//! a desk-scale machine:
//!
//! - [`hamiltonian`]: Pauli-string Hamiltonians, file parsing, and an exact
//!   dense-diagonalization oracle for the ground energy.
//! - [`sim`]: a noise-free state-vector simulator for the supported ansatz
//!   circuits, plus shot-sampled and hardware-corrupted energy observations.
//! - [`gp`]: dense Gaussian-process regression with Matérn-2.5 and periodic
//!   kernels, arbitrary prior means, and marginal-likelihood fitting.
//! - [`svgp`]: a sparse variational GP trained on large low-shot datasets;
//!   its posterior mean becomes the topological prior.
//! - [`bopt`]: the BOPT loop (Bayesian optimization with a surface-topology
//!   prior), standard-BO baselines, and Powell's method.
//! - [`experiment`]: a configuration-driven multi-seed experiment runner with
//!   CSV traces, exact-revalidation, parity analysis, and SVG plots.

pub mod bopt;
pub mod experiment;
pub mod gp;
pub mod hamiltonian;
pub mod opt;
pub mod record;
pub mod rng;
pub mod sim;
pub mod svgp;

pub use hamiltonian::Hamiltonian;
pub use sim::{Ansatz, NoiseModel, ParamVector, StateVector};
