//! The budgeted optimization loops.

use super::acquisition::{
    incumbent_eta, optimize_acquisition, AcqOptOptions, AcquisitionKind, NoisyEiState,
    PreparedAcquisition,
};
use super::gptp::{GpTpModel, TopologicalPrior};
use super::BoptError;
use crate::gp::{FitConfig, KernelKind, KernelParams};
use crate::opt::{halton_points, scale_points};
use crate::record::{IterationRow, RunRecord};
use crate::rng::{stream, StreamId};
use crate::svgp::{SvgpConfig, SvgpModel};
use rand::Rng;
use std::f64::consts::TAU;
use std::sync::Arc;

/// Query fidelity: one high-shot evaluation costs one budget unit, a
/// low-shot evaluation costs `low_shots / high_shots` units.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fidelity {
    High,
    Low,
}

/// The black-box objective. Implementations own their noise streams.
pub trait Objective {
    fn dim(&self) -> usize;
    fn eval(&mut self, theta: &[f64], fidelity: Fidelity) -> f64;
}

/// Closure adapter for tests and simple callers.
pub struct FnObjective<F: FnMut(&[f64], Fidelity) -> f64> {
    pub dim: usize,
    pub f: F,
}

impl<F: FnMut(&[f64], Fidelity) -> f64> Objective for FnObjective<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&mut self, theta: &[f64], fidelity: Fidelity) -> f64 {
        (self.f)(theta, fidelity)
    }
}

/// Shot-exact budget accounting: everything is counted in shots, so unit
/// costs of 1 (high) and `s/S` (low) add up without floating-point drift.
#[derive(Debug, Clone)]
pub struct BudgetLedger {
    high_shots: u64,
    low_shots: u64,
    total_shots: u64,
    spent_shots: u64,
}

impl BudgetLedger {
    pub fn new(budget_units: u64, high_shots: u64, low_shots: u64) -> Self {
        Self {
            high_shots,
            low_shots,
            total_shots: budget_units * high_shots,
            spent_shots: 0,
        }
    }

    pub fn can_afford_high(&self) -> bool {
        self.spent_shots + self.high_shots <= self.total_shots
    }

    pub fn can_afford_low(&self) -> bool {
        self.spent_shots + self.low_shots <= self.total_shots
    }

    pub fn charge_high(&mut self) {
        debug_assert!(self.can_afford_high());
        self.spent_shots += self.high_shots;
    }

    pub fn charge_low(&mut self) {
        debug_assert!(self.can_afford_low());
        self.spent_shots += self.low_shots;
    }

    /// Budget units spent so far (`spent_shots / high_shots`).
    pub fn spent_units(&self) -> f64 {
        self.spent_shots as f64 / self.high_shots as f64
    }

    pub fn total_units(&self) -> f64 {
        self.total_shots as f64 / self.high_shots as f64
    }

    pub fn spent_shots(&self) -> u64 {
        self.spent_shots
    }
}

/// How the initialization budget is spread over the parameter box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitDesign {
    /// Low-discrepancy (Halton) space-filling design.
    Halton,
    /// Independent uniform draws.
    Uniform,
}

/// Options shared by the BOPT and standard-BO loops.
#[derive(Debug, Clone)]
pub struct BoOptions {
    /// Total budget `B` in high-shot units.
    pub budget_units: u64,
    /// Initialization budget `B_init` (low-shot for BOPT, high-shot for
    /// standard BO).
    pub init_units: u64,
    pub high_shots: u64,
    pub low_shots: u64,
    pub kernel: KernelKind,
    pub acquisition: AcquisitionKind,
    pub init_design: InitDesign,
    /// Inducing-point cap for the low-shot surrogate.
    pub n_inducing: usize,
    pub svgp: SvgpConfig,
    pub fit: FitConfig,
    pub acq_opt: AcqOptOptions,
    /// Hard cap on the number of low-shot samples (guards pathological
    /// shot ratios).
    pub max_low_shot_samples: usize,
}

impl Default for BoOptions {
    fn default() -> Self {
        Self {
            budget_units: 150,
            init_units: 30,
            high_shots: 100_000,
            low_shots: 1_000,
            kernel: KernelKind::periodic_2pi(),
            acquisition: AcquisitionKind::default(),
            init_design: InitDesign::Halton,
            n_inducing: 100,
            svgp: SvgpConfig::default(),
            fit: FitConfig::default(),
            acq_opt: AcqOptOptions::default(),
            max_low_shot_samples: 5000,
        }
    }
}

impl BoOptions {
    fn validate(&self) -> Result<(), BoptError> {
        if self.budget_units <= self.init_units {
            return Err(BoptError::Config(format!(
                "budget {} must exceed the initialization budget {} so at least one \
                 high-shot sample fits",
                self.budget_units, self.init_units
            )));
        }
        if self.low_shots == 0 || self.high_shots <= self.low_shots {
            return Err(BoptError::Config(format!(
                "shot counts must satisfy high > low >= 1 (got {} and {})",
                self.high_shots, self.low_shots
            )));
        }
        Ok(())
    }
}

fn design_points(count: usize, dim: usize, design: InitDesign, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    match design {
        InitDesign::Halton => {
            let mut pts = halton_points(count, dim, None);
            scale_points(&mut pts, 0.0, TAU);
            pts
        }
        InitDesign::Uniform => (0..count)
            .map(|_| (0..dim).map(|_| rng.gen_range(0.0..TAU)).collect())
            .collect(),
    }
}

/// The BOPT loop: spend `B_init` on low-shot samples, train the sparse
/// surrogate, freeze its mean as the topological prior, then run the
/// residual-GP acquisition loop on high-shot queries until the budget is
/// exhausted.
pub fn bopt_run<O: Objective>(
    objective: &mut O,
    options: &BoOptions,
    seed: u64,
) -> Result<RunRecord, BoptError> {
    options.validate()?;
    let dim = objective.dim();
    let mut ledger = BudgetLedger::new(options.budget_units, options.high_shots, options.low_shots);

    let prior = if options.init_units > 0 {
        let mut m = (options.init_units * options.high_shots / options.low_shots) as usize;
        if (options.init_units * options.high_shots) % options.low_shots != 0 {
            log::warn!(
                "initialization budget is not an integer multiple of the low-shot cost; \
                 rounding down to {m} samples"
            );
        }
        if m > options.max_low_shot_samples {
            log::warn!(
                "low-shot sample count {m} exceeds the cap {}; clamping",
                options.max_low_shot_samples
            );
            m = options.max_low_shot_samples;
        }
        let mut design_rng = stream(seed, StreamId::InitDesign);
        let points = design_points(m, dim, options.init_design, &mut design_rng);
        let mut targets = Vec::with_capacity(m);
        for point in &points {
            targets.push(objective.eval(point, Fidelity::Low));
            ledger.charge_low();
        }
        let n_inducing = options.n_inducing.min(m).max(1);
        let mut surrogate = SvgpModel::init(&points, &targets, n_inducing, options.kernel)?;
        let mut train_rng = stream(seed, StreamId::SurrogateTraining);
        surrogate.train(&points, &targets, &options.svgp, &mut train_rng)?;
        TopologicalPrior::Surrogate(Arc::new(surrogate))
    } else {
        TopologicalPrior::Zero
    };

    bo_run_with_prior(objective, prior, options, seed, ledger, Vec::new(), Vec::new())
}

/// Standard BO: the identical loop with a zero prior mean and the
/// initialization budget spent on `B_init` high-shot uniform samples.
pub fn standard_bo_run<O: Objective>(
    objective: &mut O,
    options: &BoOptions,
    seed: u64,
) -> Result<RunRecord, BoptError> {
    options.validate()?;
    let dim = objective.dim();
    let mut ledger = BudgetLedger::new(options.budget_units, options.high_shots, options.low_shots);
    let mut design_rng = stream(seed, StreamId::InitDesign);
    let points = design_points(
        options.init_units as usize,
        dim,
        options.init_design,
        &mut design_rng,
    );
    let mut rows = Vec::new();
    let mut data = Vec::new();
    let mut best = f64::INFINITY;
    for point in points {
        let y = objective.eval(&point, Fidelity::High);
        ledger.charge_high();
        best = best.min(y);
        rows.push(IterationRow {
            iteration: rows.len() + 1,
            cumulative_cost: ledger.spent_units(),
            theta: point.clone(),
            observed_energy: y,
            best_observed: best,
            incumbent_eta: None,
        });
        data.push((point, y));
    }
    bo_run_with_prior(
        objective,
        TopologicalPrior::Zero,
        options,
        seed,
        ledger,
        rows,
        data,
    )
}

/// The shared acquisition loop, callable with any frozen prior.
pub fn bo_run_with_prior<O: Objective>(
    objective: &mut O,
    prior: TopologicalPrior,
    options: &BoOptions,
    seed: u64,
    mut ledger: BudgetLedger,
    mut rows: Vec<IterationRow>,
    mut data: Vec<(Vec<f64>, f64)>,
) -> Result<RunRecord, BoptError> {
    let dim = objective.dim();
    let mut acq_rng = stream(seed, StreamId::Acquisition);
    let mut warm: Option<(KernelParams, f64)> = None;
    let mut best = rows
        .last()
        .map(|r| r.best_observed)
        .unwrap_or(f64::INFINITY);

    while ledger.can_afford_high() {
        let inputs: Vec<Vec<f64>> = data.iter().map(|(x, _)| x.clone()).collect();
        let outputs: Vec<f64> = data.iter().map(|(_, y)| *y).collect();
        let model = GpTpModel::fit(
            prior.clone(),
            inputs,
            &outputs,
            options.kernel,
            dim,
            &options.fit,
            warm.as_ref().map(|(k, n)| (k, *n)),
        )?;
        warm = Some((
            model.residual_gp().kernel().clone(),
            model.residual_gp().noise_variance(),
        ));

        let mut eta = None;
        let prepared = match options.acquisition {
            AcquisitionKind::Lcb { beta } => PreparedAcquisition::Lcb { beta },
            AcquisitionKind::Ei => {
                let incumbent = incumbent_eta(&model, &data, &options.acq_opt, &mut acq_rng);
                eta = Some(incumbent.eta);
                PreparedAcquisition::Ei {
                    eta: incumbent.eta,
                }
            }
            AcquisitionKind::NoisyEi { mc_samples } => {
                if data.is_empty() {
                    // no observed values to improve on yet: exploit the prior
                    PreparedAcquisition::Lcb { beta: 0.0 }
                } else {
                    PreparedAcquisition::NoisyEi {
                        state: NoisyEiState::prepare(&model, mc_samples, &mut acq_rng),
                    }
                }
            }
        };
        let theta = optimize_acquisition(&model, &prepared, &data, &options.acq_opt, &mut acq_rng);
        let y = objective.eval(&theta, Fidelity::High);
        ledger.charge_high();
        best = best.min(y);
        rows.push(IterationRow {
            iteration: rows.len() + 1,
            cumulative_cost: ledger.spent_units(),
            theta: theta.clone(),
            observed_energy: y,
            best_observed: best,
            incumbent_eta: eta,
        });
        data.push((theta, y));
    }
    Ok(RunRecord {
        arm: String::new(),
        seed,
        rows,
    })
}
