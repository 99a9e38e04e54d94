//! Command-line experiment runner.

use bopt::experiment::{
    self, emit_parity_data, parse_ansatz_spec, plot, validate_trace, ExperimentConfig, Manifest,
};
use bopt::hamiltonian::Hamiltonian;
use bopt::record::{validated_trace_to_csv, RunRecord};
use clap::{Parser, Subcommand};
use std::error::Error;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "bopt",
    about = "Shot-efficient Bayesian optimization for variational quantum eigensolvers",
    version
)]
struct Cli {
    /// Print a complete experiment config with every default spelled out.
    #[arg(long)]
    print_config: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Execute every (arm, seed) job of an experiment config.
    Run {
        /// Path to the experiment TOML.
        config: PathBuf,
        /// Parallel worker count (overrides the config).
        #[arg(long)]
        workers: Option<usize>,
        /// Offset added to every seed in the config.
        #[arg(long, default_value_t = 0)]
        seed_offset: u64,
    },
    /// Re-evaluate a run's best-so-far trajectory on the noise-free
    /// simulator and append an exact_energy column.
    Validate {
        /// Path to a run-record CSV.
        record: PathBuf,
        /// Hamiltonian file the record was produced against.
        #[arg(long)]
        hamiltonian: PathBuf,
        /// Ansatz spec: `hea:<depth>:<hf_bits>` or `real_amplitudes:<depth>`.
        #[arg(long)]
        ansatz: String,
        /// Output path (defaults to `<record>.validated.csv`).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Pair every observation in a results directory with its exact energy
    /// and write parity + histogram CSVs.
    Parity {
        /// Results directory containing manifest.json.
        dir: PathBuf,
    },
    /// Render convergence curves (SVG + data CSV) for a results directory.
    Plot {
        /// Results directory containing manifest.json.
        dir: PathBuf,
    },
}

fn load_records_from_manifest(manifest: &Manifest) -> Result<Vec<RunRecord>, Box<dyn Error>> {
    let mut records = Vec::new();
    for run in &manifest.runs {
        if run.status == "ok" {
            records.push(RunRecord::load(&run.file)?);
        }
    }
    if records.is_empty() {
        return Err("no successful runs in the manifest".into());
    }
    Ok(records)
}

fn manifest_assets(
    dir: &Path,
) -> Result<(Manifest, Hamiltonian, bopt::sim::Ansatz, Vec<RunRecord>), Box<dyn Error>> {
    let manifest = Manifest::load(dir.join("manifest.json"))?;
    let hamiltonian = Hamiltonian::load(&manifest.config.problem.hamiltonian)?;
    let ansatz = manifest.config.build_ansatz(hamiltonian.n_qubits())?;
    let records = load_records_from_manifest(&manifest)?;
    Ok((manifest, hamiltonian, ansatz, records))
}

fn run_command(command: Command) -> Result<ExitCode, Box<dyn Error>> {
    match command {
        Command::Run {
            config,
            workers,
            seed_offset,
        } => {
            let config = ExperimentConfig::load(&config)?;
            let manifest = experiment::run_experiment(&config, workers, seed_offset)?;
            let ok = manifest.runs.iter().filter(|r| r.status == "ok").count();
            let failed = manifest.runs.len() - ok;
            println!(
                "{ok} run(s) succeeded, {failed} failed; outputs in {}",
                config.run.output_dir
            );
            for run in manifest.runs.iter().filter(|r| r.status != "ok") {
                eprintln!(
                    "  failed: {} seed {}: {}",
                    run.arm,
                    run.seed,
                    run.error.as_deref().unwrap_or("unknown")
                );
            }
            Ok(if failed == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        Command::Validate {
            record,
            hamiltonian,
            ansatz,
            output,
        } => {
            let rec = RunRecord::load(&record)?;
            let ham = Hamiltonian::load(&hamiltonian)?;
            let ansatz = parse_ansatz_spec(&ansatz, ham.n_qubits())?;
            let trace = validate_trace(&rec, &ham, &ansatz)?;
            let out = output.unwrap_or_else(|| {
                let mut p = record.as_os_str().to_owned();
                p.push(".validated.csv");
                PathBuf::from(p)
            });
            std::fs::write(&out, validated_trace_to_csv(&rec.arm, rec.seed, &trace))?;
            println!(
                "validated {} trajectory point(s) -> {}",
                trace.len(),
                out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Parity { dir } => {
            let (_, hamiltonian, ansatz, records) = manifest_assets(&dir)?;
            let (rows, hist) = emit_parity_data(&records, &hamiltonian, &ansatz)?;
            std::fs::write(dir.join("parity.csv"), experiment::parity_csv(&rows))?;
            std::fs::write(
                dir.join("parity_hist.csv"),
                experiment::histogram_csv(&hist),
            )?;
            println!(
                "paired {} observation(s) -> {}",
                rows.len(),
                dir.join("parity.csv").display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Plot { dir } => {
            let (manifest, _, _, records) = manifest_assets(&dir)?;
            let series = plot::aggregate(&records)?;
            let svg = plot::convergence_svg(&series, Some(manifest.ground_energy_exact));
            let data = plot::convergence_data_csv(&series);
            std::fs::write(dir.join("convergence.svg"), svg)?;
            std::fs::write(dir.join("convergence_data.csv"), data)?;
            println!("wrote {}", dir.join("convergence.svg").display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if cli.print_config {
        print!("{}", ExperimentConfig::example().to_toml_string());
        return ExitCode::SUCCESS;
    }
    let Some(command) = cli.command else {
        eprintln!("error: no subcommand given (try --help)");
        return ExitCode::from(1);
    };
    match run_command(command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
