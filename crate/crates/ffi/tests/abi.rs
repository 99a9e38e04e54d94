//! Exercises the C ABI exactly as a foreign caller would: through raw
//! pointers and status codes.

use bopt_ffi::*;
use std::ffi::{CStr, CString};
use std::ptr;

unsafe fn last_error() -> String {
    CStr::from_ptr(bopt_last_error_message())
        .to_string_lossy()
        .into_owned()
}

#[test]
fn hamiltonian_parse_and_ground_energy() {
    unsafe {
        let text = CString::new("1.0 X\n1.0 Z").unwrap();
        let mut handle: *mut BoptHamiltonian = ptr::null_mut();
        assert_eq!(
            bopt_hamiltonian_parse(text.as_ptr(), &mut handle),
            BoptStatus::Ok
        );
        assert_eq!(bopt_hamiltonian_n_qubits(handle), 1);
        assert_eq!(bopt_hamiltonian_n_terms(handle), 2);
        let mut e0 = 0.0;
        assert_eq!(
            bopt_hamiltonian_ground_energy(handle, &mut e0),
            BoptStatus::Ok
        );
        assert!((e0 + 2f64.sqrt()).abs() < 1e-12);
        bopt_hamiltonian_free(handle);
    }
}

#[test]
fn parse_errors_set_the_message() {
    unsafe {
        let text = CString::new("1.0 ZZ\nbroken QQ").unwrap();
        let mut handle: *mut BoptHamiltonian = ptr::null_mut();
        assert_eq!(
            bopt_hamiltonian_parse(text.as_ptr(), &mut handle),
            BoptStatus::ParseError
        );
        assert!(last_error().contains("line 2"), "{}", last_error());
        assert_eq!(
            bopt_hamiltonian_parse(ptr::null(), &mut handle),
            BoptStatus::NullArgument
        );
    }
}

#[test]
fn load_the_committed_h2_file() {
    unsafe {
        let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("../../data/h2_sto3g_jw.ham");
        let c_path = CString::new(path.display().to_string()).unwrap();
        let mut handle: *mut BoptHamiltonian = ptr::null_mut();
        assert_eq!(
            bopt_hamiltonian_load(c_path.as_ptr(), &mut handle),
            BoptStatus::Ok
        );
        assert_eq!(bopt_hamiltonian_n_qubits(handle), 4);
        let mut e0 = 0.0;
        assert_eq!(
            bopt_hamiltonian_ground_energy(handle, &mut e0),
            BoptStatus::Ok
        );
        assert!((e0 - (-1.137270174827618)).abs() < 1e-9);
        bopt_hamiltonian_free(handle);
    }
}

#[test]
fn ansatz_energies_match_between_exact_and_observed_exact_mode() {
    unsafe {
        let text = CString::new("0.5 ZZ\n-0.3 XI").unwrap();
        let mut ham: *mut BoptHamiltonian = ptr::null_mut();
        assert_eq!(bopt_hamiltonian_parse(text.as_ptr(), &mut ham), BoptStatus::Ok);

        let hf = CString::new("10").unwrap();
        let mut ansatz: *mut BoptAnsatz = ptr::null_mut();
        assert_eq!(
            bopt_ansatz_hea(2, 1, hf.as_ptr(), &mut ansatz),
            BoptStatus::Ok
        );
        assert_eq!(bopt_ansatz_param_count(ansatz), 2);

        let theta = [0.7, 1.1];
        let mut exact = 0.0;
        assert_eq!(
            bopt_energy_exact(ham, ansatz, theta.as_ptr(), 2, &mut exact),
            BoptStatus::Ok
        );
        let noise = BoptNoiseConfig {
            shot_mode: BoptShotMode::Exact,
            sigma_s: 0.0,
            hardware_enabled: false,
            hw_bias_slope: 0.0,
            hw_bias_zero: 0.0,
            hw_sigma: 0.0,
        };
        let mut observed = 0.0;
        assert_eq!(
            bopt_energy_observed(ham, ansatz, theta.as_ptr(), 2, 100, &noise, 7, &mut observed),
            BoptStatus::Ok
        );
        assert_eq!(exact.to_bits(), observed.to_bits());

        // dimension mismatch is reported, not UB
        let mut bad = 0.0;
        assert_eq!(
            bopt_energy_exact(ham, ansatz, theta.as_ptr(), 1, &mut bad),
            BoptStatus::DimensionError
        );
        bopt_ansatz_free(ansatz);
        bopt_hamiltonian_free(ham);
    }
}

#[test]
fn sampled_energies_are_reproducible_from_the_seed() {
    unsafe {
        let text = CString::new("1.0 ZZ\n0.2 XX").unwrap();
        let mut ham: *mut BoptHamiltonian = ptr::null_mut();
        bopt_hamiltonian_parse(text.as_ptr(), &mut ham);
        let hf = CString::new("01").unwrap();
        let mut ansatz: *mut BoptAnsatz = ptr::null_mut();
        bopt_ansatz_hea(2, 1, hf.as_ptr(), &mut ansatz);
        let noise = BoptNoiseConfig {
            shot_mode: BoptShotMode::Sampled,
            sigma_s: 0.0,
            hardware_enabled: true,
            hw_bias_slope: -0.15,
            hw_bias_zero: -0.2,
            hw_sigma: 0.01,
        };
        let theta = [0.4, 2.2];
        let mut a = 0.0;
        let mut b = 0.0;
        bopt_energy_observed(ham, ansatz, theta.as_ptr(), 2, 500, &noise, 42, &mut a);
        bopt_energy_observed(ham, ansatz, theta.as_ptr(), 2, 500, &noise, 42, &mut b);
        assert_eq!(a.to_bits(), b.to_bits());
        bopt_ansatz_free(ansatz);
        bopt_hamiltonian_free(ham);
    }
}

#[test]
fn optimize_runs_end_to_end_through_the_abi() {
    unsafe {
        let text = CString::new("1.0 ZZ\n0.5 XI\n0.5 IX").unwrap();
        let mut ham: *mut BoptHamiltonian = ptr::null_mut();
        bopt_hamiltonian_parse(text.as_ptr(), &mut ham);
        let hf = CString::new("00").unwrap();
        let mut ansatz: *mut BoptAnsatz = ptr::null_mut();
        bopt_ansatz_hea(2, 1, hf.as_ptr(), &mut ansatz);
        let noise = BoptNoiseConfig {
            shot_mode: BoptShotMode::Exact,
            sigma_s: 0.0,
            hardware_enabled: false,
            hw_bias_slope: 0.0,
            hw_bias_zero: 0.0,
            hw_sigma: 0.0,
        };
        let config = BoptRunConfig {
            budget_units: 12,
            init_units: 4,
            high_shots: 100,
            low_shots: 10,
            periodic_kernel: true,
            beta: 4.0,
            seed: 3,
        };
        let mut record: *mut BoptRunRecord = ptr::null_mut();
        assert_eq!(
            bopt_optimize(ham, ansatz, &noise, &config, &mut record),
            BoptStatus::Ok
        );
        let len = bopt_run_record_len(record);
        assert_eq!(len, 8);
        assert_eq!(bopt_run_record_theta_dim(record), 2);
        let mut row = BoptRunRow {
            iteration: 0,
            cumulative_cost: 0.0,
            observed_energy: 0.0,
            best_observed: 0.0,
        };
        let mut best = f64::INFINITY;
        for i in 0..len {
            assert_eq!(bopt_run_record_row(record, i, &mut row), BoptStatus::Ok);
            best = best.min(row.observed_energy);
            assert_eq!(row.best_observed, best);
        }
        let mut theta = [0.0; 2];
        assert_eq!(
            bopt_run_record_theta(record, len - 1, theta.as_mut_ptr(), 2),
            BoptStatus::Ok
        );
        assert_eq!(
            bopt_run_record_theta(record, len - 1, theta.as_mut_ptr(), 1),
            BoptStatus::OutOfRange
        );
        assert_eq!(
            bopt_run_record_row(record, len + 5, &mut row),
            BoptStatus::OutOfRange
        );
        // invalid config surfaces as a status, not a panic
        let bad = BoptRunConfig {
            budget_units: 2,
            init_units: 4,
            ..config
        };
        let mut r2: *mut BoptRunRecord = ptr::null_mut();
        assert_eq!(
            bopt_optimize(ham, ansatz, &noise, &bad, &mut r2),
            BoptStatus::RunError
        );
        assert!(last_error().contains("budget"), "{}", last_error());
        bopt_run_record_free(record);
        bopt_ansatz_free(ansatz);
        bopt_hamiltonian_free(ham);
    }
}
