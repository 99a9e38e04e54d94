use bopt::bopt::{bopt_run, AcqOptOptions, AcquisitionKind, BoOptions};
use bopt::experiment::SimObjective;
use bopt::gp::FitConfig;
use bopt::hamiltonian::Hamiltonian;
use bopt::sim::{Ansatz, NoiseModel};
use bopt::svgp::SvgpConfig;

#[test]
fn probe_beta_sensitivity() {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/h2_sto3g_jw.ham");
    let h = Hamiltonian::load(&path).unwrap();
    let e0 = h.ground_energy_exact().unwrap();
    let ansatz = Ansatz::hea(4, 4, "1100").unwrap();
    for beta in [4.0, 1.0, 0.25] {
        for seed in [0u64, 1] {
            let options = BoOptions {
                budget_units: 150,
                init_units: 30,
                high_shots: 100_000,
                low_shots: 1_000,
                n_inducing: 64,
                acquisition: AcquisitionKind::Lcb { beta },
                svgp: SvgpConfig { steps: 800, batch_size: 128, ..Default::default() },
                fit: FitConfig { restarts: 8, restart_steps: 20, polish_steps: 40, ..Default::default() },
                acq_opt: AcqOptOptions { n_starts: 32, max_steps: 200, tol: 1e-6 },
                ..Default::default()
            };
            let mut objective = SimObjective::new(&ansatz, &h, NoiseModel::exact(), 100_000, 1_000, seed);
            let t0 = std::time::Instant::now();
            let record = bopt_run(&mut objective, &options, seed).unwrap();
            let best = record.rows.last().unwrap().best_observed;
            println!(
                "beta {beta:4}: seed {seed} gap {:8.3} mHa  ({:.0} s)",
                (best - e0) * 1e3,
                t0.elapsed().as_secs_f64()
            );
        }
    }
}
