//! Multi-seed experiment execution.

use super::config::{Arm, ExperimentConfig};
use super::ExperimentError;
use crate::bopt::{bopt_run, powell_run, standard_bo_run, Fidelity, Objective, PowellOptions};
use crate::hamiltonian::Hamiltonian;
use crate::record::RunRecord;
use crate::rng::{stream, StreamId};
use crate::sim::{evaluate_energy, Ansatz, NoiseModel};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

/// The simulator-backed objective handed to the optimizers: high fidelity
/// queries use the full shot count, low fidelity the cheap one. The noise
/// stream belongs to this object, so a run is reproducible from its seed.
pub struct SimObjective<'a> {
    ansatz: &'a Ansatz,
    hamiltonian: &'a Hamiltonian,
    noise: NoiseModel,
    high_shots: u64,
    low_shots: u64,
    rng: ChaCha8Rng,
}

impl<'a> SimObjective<'a> {
    pub fn new(
        ansatz: &'a Ansatz,
        hamiltonian: &'a Hamiltonian,
        noise: NoiseModel,
        high_shots: u64,
        low_shots: u64,
        seed: u64,
    ) -> Self {
        Self {
            ansatz,
            hamiltonian,
            noise,
            high_shots,
            low_shots,
            rng: stream(seed, StreamId::Objective),
        }
    }
}

impl Objective for SimObjective<'_> {
    fn dim(&self) -> usize {
        self.ansatz.param_count()
    }

    fn eval(&mut self, theta: &[f64], fidelity: Fidelity) -> f64 {
        let shots = match fidelity {
            Fidelity::High => self.high_shots,
            Fidelity::Low => self.low_shots,
        };
        evaluate_energy(
            self.ansatz.circuit(),
            theta,
            self.hamiltonian,
            shots,
            &self.noise,
            &mut self.rng,
        )
        .expect("objective dimensions were validated at setup")
    }
}

/// Outcome of one `(arm, seed)` job.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunOutcome {
    pub arm: String,
    pub seed: u64,
    pub file: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub wall_secs: f64,
}

/// The experiment summary written next to the per-run CSVs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: String,
    pub ground_energy_exact: f64,
    pub config: ExperimentConfig,
    pub runs: Vec<RunOutcome>,
}

impl Manifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ExperimentError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ExperimentError::Io {
            path: path.display().to_string(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| ExperimentError::Data(e.to_string()))
    }

    pub fn all_succeeded(&self) -> bool {
        self.runs.iter().all(|r| r.status == "ok")
    }
}

/// Execute one arm at one seed.
pub fn run_single(
    config: &ExperimentConfig,
    ansatz: &Ansatz,
    hamiltonian: &Hamiltonian,
    arm: Arm,
    seed: u64,
) -> Result<RunRecord, String> {
    let noise = config.noise.to_noise_model();
    let mut objective = SimObjective::new(
        ansatz,
        hamiltonian,
        noise,
        config.shots.high,
        config.shots.low,
        seed,
    );
    let mut record = match arm {
        Arm::Powell => {
            let mut init_rng = stream(seed, StreamId::InitDesign);
            let theta0: Vec<f64> = (0..ansatz.param_count())
                .map(|_| init_rng.gen_range(0.0..TAU))
                .collect();
            let options = PowellOptions {
                max_evals: config.budget.total as usize,
                initial_step: config.powell.initial_step,
                line_tol: config.powell.line_tol,
                max_line_evals: config.powell.max_line_evals,
            };
            powell_run(&mut objective, &theta0, &options).map_err(|e| e.to_string())?
        }
        arm if arm.uses_prior() => {
            let options = config.bo_options(arm);
            bopt_run(&mut objective, &options, seed).map_err(|e| e.to_string())?
        }
        arm => {
            let options = config.bo_options(arm);
            standard_bo_run(&mut objective, &options, seed).map_err(|e| e.to_string())?
        }
    };
    record.arm = arm.name().to_string();
    record.seed = seed;
    Ok(record)
}

/// Run every `(arm, seed)` job, write per-run CSVs under
/// `<output_dir>/<arm>/seed<k>.csv`, and write the manifest last. Failures
/// are recorded per job and do not abort the others.
pub fn run_experiment(
    config: &ExperimentConfig,
    workers: Option<usize>,
    seed_offset: u64,
) -> Result<Manifest, ExperimentError> {
    config.validate()?;
    let hamiltonian = Hamiltonian::load(&config.problem.hamiltonian)?;
    let ansatz = config.build_ansatz(hamiltonian.n_qubits())?;
    let ground_energy = hamiltonian.ground_energy_exact()?;
    let out_dir = PathBuf::from(&config.run.output_dir);
    for arm in &config.run.arms {
        std::fs::create_dir_all(out_dir.join(arm.name())).map_err(|source| {
            ExperimentError::Io {
                path: out_dir.join(arm.name()).display().to_string(),
                source,
            }
        })?;
    }

    let jobs: Vec<(Arm, u64)> = config
        .run
        .arms
        .iter()
        .flat_map(|&arm| {
            config
                .run
                .seeds
                .iter()
                .map(move |&seed| (arm, seed + seed_offset))
        })
        .collect();

    let workers = workers.unwrap_or(config.run.workers).max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| ExperimentError::Data(e.to_string()))?;

    let outcomes: Vec<RunOutcome> = pool.install(|| {
        jobs.par_iter()
            .map(|&(arm, seed)| {
                let start = std::time::Instant::now();
                let file = out_dir.join(arm.name()).join(format!("seed{seed}.csv"));
                let result = run_single(config, &ansatz, &hamiltonian, arm, seed)
                    .and_then(|record| {
                        record
                            .save(&file)
                            .map_err(|e| format!("write failed: {e}"))
                    });
                let wall_secs = start.elapsed().as_secs_f64();
                match result {
                    Ok(()) => RunOutcome {
                        arm: arm.name().to_string(),
                        seed,
                        file: file.display().to_string(),
                        status: "ok".to_string(),
                        error: None,
                        wall_secs,
                    },
                    Err(error) => RunOutcome {
                        arm: arm.name().to_string(),
                        seed,
                        file: file.display().to_string(),
                        status: "failed".to_string(),
                        error: Some(error),
                        wall_secs,
                    },
                }
            })
            .collect()
    });

    let manifest = Manifest {
        schema: "bopt-manifest-v1".to_string(),
        ground_energy_exact: ground_energy,
        config: config.clone(),
        runs: outcomes,
    };
    let manifest_path = out_dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| ExperimentError::Data(e.to_string()))?;
    std::fs::write(&manifest_path, text).map_err(|source| ExperimentError::Io {
        path: manifest_path.display().to_string(),
        source,
    })?;
    Ok(manifest)
}
