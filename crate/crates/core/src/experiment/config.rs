//! Experiment configuration: a flat TOML file with sections.

use crate::bopt::{AcqOptOptions, AcquisitionKind, BoOptions, InitDesign};
use crate::gp::{FitConfig, KernelKind};
use crate::sim::{Ansatz, HardwareModel, NoiseModel, ShotMode, SimError};
use crate::svgp::SvgpConfig;
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid TOML: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Ansatz(#[from] SimError),
}

/// The optimizer arms reproducible by the runner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Arm {
    /// Topological prior + periodic kernel + LCB.
    #[serde(rename = "bopt")]
    Bopt,
    /// Topological prior + Matérn kernel + LCB.
    #[serde(rename = "bopt-matern")]
    BoptMatern,
    /// Topological prior + periodic kernel + Monte-Carlo noisy EI.
    #[serde(rename = "bopt-ei")]
    BoptEi,
    /// Standard BO, Matérn kernel, LCB.
    #[serde(rename = "lcb")]
    Lcb,
    /// Standard BO, periodic kernel, LCB.
    #[serde(rename = "lcb-p")]
    LcbP,
    /// Standard BO, Matérn kernel, analytic EI.
    #[serde(rename = "ei")]
    Ei,
    /// Standard BO, periodic kernel, analytic EI.
    #[serde(rename = "ei-p")]
    EiP,
    #[serde(rename = "powell")]
    Powell,
}

impl Arm {
    pub fn name(&self) -> &'static str {
        match self {
            Arm::Bopt => "bopt",
            Arm::BoptMatern => "bopt-matern",
            Arm::BoptEi => "bopt-ei",
            Arm::Lcb => "lcb",
            Arm::LcbP => "lcb-p",
            Arm::Ei => "ei",
            Arm::EiP => "ei-p",
            Arm::Powell => "powell",
        }
    }

    /// Does this arm build the low-shot topological prior?
    pub fn uses_prior(&self) -> bool {
        matches!(self, Arm::Bopt | Arm::BoptMatern | Arm::BoptEi)
    }

    pub fn kernel(&self) -> KernelKind {
        match self {
            Arm::Bopt | Arm::BoptEi | Arm::LcbP | Arm::EiP => KernelKind::periodic_2pi(),
            Arm::BoptMatern | Arm::Lcb | Arm::Ei => KernelKind::Matern25,
            Arm::Powell => KernelKind::Matern25,
        }
    }

    pub fn acquisition(&self, beta: f64, mc_samples: usize) -> AcquisitionKind {
        match self {
            Arm::Bopt | Arm::BoptMatern | Arm::Lcb | Arm::LcbP => AcquisitionKind::Lcb { beta },
            Arm::Ei | Arm::EiP => AcquisitionKind::Ei,
            Arm::BoptEi => AcquisitionKind::NoisyEi { mc_samples },
            Arm::Powell => AcquisitionKind::Lcb { beta },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemSection {
    pub hamiltonian: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnsatzSection {
    pub kind: String,
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default)]
    pub hf_bits: String,
}

fn default_depth() -> usize {
    4
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BudgetSection {
    pub total: u64,
    pub init: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShotsSection {
    pub high: u64,
    pub low: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoiseSection {
    #[serde(default = "default_shot_mode")]
    pub shot_mode: ShotMode,
    #[serde(default)]
    pub sigma_s: f64,
    #[serde(default)]
    pub hardware: bool,
    #[serde(default = "default_hw_slope")]
    pub hw_bias_slope: f64,
    #[serde(default = "default_hw_zero")]
    pub hw_bias_zero: f64,
    #[serde(default = "default_hw_sigma")]
    pub hw_sigma: f64,
}

fn default_shot_mode() -> ShotMode {
    ShotMode::Exact
}
fn default_hw_slope() -> f64 {
    -0.15
}
fn default_hw_zero() -> f64 {
    -0.2
}
fn default_hw_sigma() -> f64 {
    0.01
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self {
            shot_mode: default_shot_mode(),
            sigma_s: 0.0,
            hardware: false,
            hw_bias_slope: default_hw_slope(),
            hw_bias_zero: default_hw_zero(),
            hw_sigma: default_hw_sigma(),
        }
    }
}

impl NoiseSection {
    pub fn to_noise_model(&self) -> NoiseModel {
        let mut model = NoiseModel {
            shot_mode: self.shot_mode,
            sigma_s: self.sigma_s,
            hardware: None,
        };
        if self.hardware {
            model.hardware = Some(HardwareModel {
                bias_slope: self.hw_bias_slope,
                bias_zero: self.hw_bias_zero,
                sigma: self.hw_sigma,
            });
        }
        model
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSection {
    pub arms: Vec<Arm>,
    pub seeds: Vec<u64>,
    pub output_dir: String,
    #[serde(default = "default_workers")]
    pub workers: usize,
}

fn default_workers() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoptSection {
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_mc_samples")]
    pub mc_samples: usize,
    #[serde(default = "default_n_inducing")]
    pub n_inducing: usize,
    #[serde(default = "default_init_design")]
    pub init_design: InitDesign,
    #[serde(default = "default_max_low_shot")]
    pub max_low_shot_samples: usize,
}

fn default_beta() -> f64 {
    4.0
}
fn default_mc_samples() -> usize {
    64
}
fn default_n_inducing() -> usize {
    100
}
fn default_init_design() -> InitDesign {
    InitDesign::Halton
}
fn default_max_low_shot() -> usize {
    5000
}

impl Default for BoptSection {
    fn default() -> Self {
        Self {
            beta: default_beta(),
            mc_samples: default_mc_samples(),
            n_inducing: default_n_inducing(),
            init_design: default_init_design(),
            max_low_shot_samples: default_max_low_shot(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SvgpSection {
    pub steps: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
}

impl Default for SvgpSection {
    fn default() -> Self {
        let d = SvgpConfig::default();
        Self {
            steps: d.steps,
            batch_size: d.batch_size,
            learning_rate: d.learning_rate,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct GpFitSection {
    pub restarts: usize,
    pub restart_steps: usize,
    pub polish_steps: usize,
    pub learning_rate: f64,
    /// Pin the observation noise variance instead of learning it.
    pub fixed_noise: Option<f64>,
}

impl Default for GpFitSection {
    fn default() -> Self {
        let d = FitConfig::default();
        Self {
            restarts: d.restarts,
            restart_steps: d.restart_steps,
            polish_steps: d.polish_steps,
            learning_rate: d.learning_rate,
            fixed_noise: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct AcqOptSection {
    pub n_starts: usize,
    pub max_steps: usize,
    pub tol: f64,
}

impl Default for AcqOptSection {
    fn default() -> Self {
        let d = AcqOptOptions::default();
        Self {
            n_starts: d.n_starts,
            max_steps: d.max_steps,
            tol: d.tol,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct PowellSection {
    pub initial_step: f64,
    pub line_tol: f64,
    pub max_line_evals: usize,
}

impl Default for PowellSection {
    fn default() -> Self {
        Self {
            initial_step: 1.0,
            line_tol: 1e-8,
            max_line_evals: 40,
        }
    }
}

/// The full experiment description (one TOML file per experiment).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub problem: ProblemSection,
    pub ansatz: AnsatzSection,
    pub budget: BudgetSection,
    pub shots: ShotsSection,
    #[serde(default)]
    pub noise: NoiseSection,
    pub run: RunSection,
    #[serde(default)]
    pub bopt: BoptSection,
    #[serde(default)]
    pub svgp: SvgpSection,
    #[serde(default)]
    pub gp_fit: GpFitSection,
    #[serde(default)]
    pub acq_opt: AcqOptSection,
    #[serde(default)]
    pub powell: PowellSection,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let config: Self = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        // resolve the hamiltonian path relative to the config file
        let mut config = Self::from_toml_str(&text)?;
        if let Some(dir) = path.parent() {
            let ham = Path::new(&config.problem.hamiltonian);
            if ham.is_relative() && !ham.exists() {
                config.problem.hamiltonian = dir.join(ham).display().to_string();
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.run.arms.is_empty() {
            return Err(ConfigError::Invalid("run.arms must not be empty".into()));
        }
        if self.run.seeds.is_empty() {
            return Err(ConfigError::Invalid("run.seeds must not be empty".into()));
        }
        if self.budget.total <= self.budget.init {
            return Err(ConfigError::Invalid(format!(
                "budget.total ({}) must exceed budget.init ({})",
                self.budget.total, self.budget.init
            )));
        }
        if self.shots.low == 0 || self.shots.high <= self.shots.low {
            return Err(ConfigError::Invalid(format!(
                "shots must satisfy high > low >= 1 (got {} and {})",
                self.shots.high, self.shots.low
            )));
        }
        match self.ansatz.kind.as_str() {
            "hea" | "real_amplitudes" => {}
            other => {
                return Err(ConfigError::Invalid(format!(
                    "ansatz.kind '{other}' is not 'hea' or 'real_amplitudes'"
                )));
            }
        }
        self.noise
            .to_noise_model()
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(())
    }

    /// Build the ansatz for an `n_qubits` Hamiltonian.
    pub fn build_ansatz(&self, n_qubits: usize) -> Result<Ansatz, ConfigError> {
        match self.ansatz.kind.as_str() {
            "hea" => Ok(Ansatz::hea(n_qubits, self.ansatz.depth, &self.ansatz.hf_bits)?),
            "real_amplitudes" => Ok(Ansatz::real_amplitudes(n_qubits, self.ansatz.depth)),
            other => Err(ConfigError::Invalid(format!("unknown ansatz kind '{other}'"))),
        }
    }

    /// Assemble engine options for one arm.
    pub fn bo_options(&self, arm: Arm) -> BoOptions {
        BoOptions {
            budget_units: self.budget.total,
            init_units: self.budget.init,
            high_shots: self.shots.high,
            low_shots: self.shots.low,
            kernel: arm.kernel(),
            acquisition: arm.acquisition(self.bopt.beta, self.bopt.mc_samples),
            init_design: self.bopt.init_design,
            n_inducing: self.bopt.n_inducing,
            svgp: SvgpConfig {
                steps: self.svgp.steps,
                batch_size: self.svgp.batch_size,
                learning_rate: self.svgp.learning_rate,
                ..Default::default()
            },
            fit: FitConfig {
                restarts: self.gp_fit.restarts,
                restart_steps: self.gp_fit.restart_steps,
                polish_steps: self.gp_fit.polish_steps,
                learning_rate: self.gp_fit.learning_rate,
                fixed_noise: self.gp_fit.fixed_noise,
            },
            acq_opt: AcqOptOptions {
                n_starts: self.acq_opt.n_starts,
                max_steps: self.acq_opt.max_steps,
                tol: self.acq_opt.tol,
            },
            max_low_shot_samples: self.bopt.max_low_shot_samples,
        }
    }

    /// A complete config with every default spelled out (for
    /// `--print-config`).
    pub fn example() -> Self {
        Self {
            problem: ProblemSection {
                hamiltonian: "data/h2_sto3g_jw.ham".to_string(),
            },
            ansatz: AnsatzSection {
                kind: "hea".to_string(),
                depth: 4,
                hf_bits: "1100".to_string(),
            },
            budget: BudgetSection {
                total: 150,
                init: 30,
            },
            shots: ShotsSection {
                high: 100_000,
                low: 1_000,
            },
            noise: NoiseSection::default(),
            run: RunSection {
                arms: vec![Arm::Bopt, Arm::BoptMatern, Arm::LcbP, Arm::Powell],
                seeds: (0..10).collect(),
                output_dir: "out/h2".to_string(),
                workers: 1,
            },
            bopt: BoptSection::default(),
            svgp: SvgpSection::default(),
            gp_fit: GpFitSection::default(),
            acq_opt: AcqOptSection::default(),
            powell: PowellSection::default(),
        }
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}

/// Parse the compact ansatz spec used by the CLI:
/// `hea:<depth>:<hf_bits>` or `real_amplitudes:<depth>`.
pub fn parse_ansatz_spec(spec: &str, n_qubits: usize) -> Result<Ansatz, ConfigError> {
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        ["hea", depth, hf_bits] => {
            let depth: usize = depth
                .parse()
                .map_err(|_| ConfigError::Invalid(format!("bad depth in '{spec}'")))?;
            Ok(Ansatz::hea(n_qubits, depth, hf_bits)?)
        }
        ["real_amplitudes", depth] => {
            let depth: usize = depth
                .parse()
                .map_err(|_| ConfigError::Invalid(format!("bad depth in '{spec}'")))?;
            Ok(Ansatz::real_amplitudes(n_qubits, depth))
        }
        _ => Err(ConfigError::Invalid(format!(
            "ansatz spec '{spec}' is not 'hea:<depth>:<hf_bits>' or 'real_amplitudes:<depth>'"
        ))),
    }
}
