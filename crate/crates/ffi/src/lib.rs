//! C ABI for the bopt toolkit.
//!
//! Opaque handles own the Rust objects; every fallible call returns a
//! [`BoptStatus`] and records a thread-local message retrievable with
//! [`bopt_last_error_message`]. Pointers returned by constructors must be
//! released with the matching `_free` function exactly once.

use bopt::bopt::{bopt_run, AcquisitionKind, BoOptions};
use bopt::experiment::SimObjective;
use bopt::gp::KernelKind;
use bopt::hamiltonian::Hamiltonian;
use bopt::record::RunRecord;
use bopt::sim::{evaluate_energy, expectation_exact, Ansatz, HardwareModel, NoiseModel, ShotMode};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoptStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    DimensionError = 4,
    EvalError = 5,
    ConfigError = 6,
    RunError = 7,
    OutOfRange = 8,
    Panic = 9,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(sanitized).unwrap());
}

/// Message for the most recent error on this thread. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bopt_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

fn guarded(f: impl FnOnce() -> BoptStatus) -> BoptStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            BoptStatus::Panic
        }
    }
}

unsafe fn cstr_arg<'a>(ptr: *const c_char) -> Result<&'a str, BoptStatus> {
    if ptr.is_null() {
        set_error("null string argument");
        return Err(BoptStatus::NullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        BoptStatus::InvalidUtf8
    })
}

/// Opaque Pauli-string Hamiltonian.
pub struct BoptHamiltonian(Hamiltonian);

/// Opaque parameterized ansatz circuit.
pub struct BoptAnsatz(Ansatz);

/// Opaque optimization trace.
pub struct BoptRunRecord(RunRecord);

/// Shot-handling mode of the observation model.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoptShotMode {
    Exact = 0,
    Sampled = 1,
    Gaussian = 2,
}

/// Observation model (plain data; no handle needed).
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct BoptNoiseConfig {
    pub shot_mode: BoptShotMode,
    /// Gaussian-mode scale; the noise std is `sigma_s / sqrt(shots)`.
    pub sigma_s: f64,
    pub hardware_enabled: bool,
    pub hw_bias_slope: f64,
    pub hw_bias_zero: f64,
    pub hw_sigma: f64,
}

impl BoptNoiseConfig {
    fn to_model(self) -> NoiseModel {
        let mut model = NoiseModel {
            shot_mode: match self.shot_mode {
                BoptShotMode::Exact => ShotMode::Exact,
                BoptShotMode::Sampled => ShotMode::Sampled,
                BoptShotMode::Gaussian => ShotMode::Gaussian,
            },
            sigma_s: self.sigma_s,
            hardware: None,
        };
        if self.hardware_enabled {
            model.hardware = Some(HardwareModel {
                bias_slope: self.hw_bias_slope,
                bias_zero: self.hw_bias_zero,
                sigma: self.hw_sigma,
            });
        }
        model
    }
}

/// One logged objective evaluation.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct BoptRunRow {
    pub iteration: usize,
    pub cumulative_cost: f64,
    pub observed_energy: f64,
    pub best_observed: f64,
}

/// Optimization settings for [`bopt_optimize`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct BoptRunConfig {
    /// Total budget in high-shot units.
    pub budget_units: u64,
    /// Low-shot initialization budget (0 disables the topological prior).
    pub init_units: u64,
    pub high_shots: u64,
    pub low_shots: u64,
    /// Use the 2*pi-periodic kernel (otherwise Matérn 5/2).
    pub periodic_kernel: bool,
    /// LCB confidence parameter.
    pub beta: f64,
    pub seed: u64,
}

/// Parse a Hamiltonian from its text format.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bopt_hamiltonian_parse(
    text: *const c_char,
    out: *mut *mut BoptHamiltonian,
) -> BoptStatus {
    guarded(|| {
        if out.is_null() {
            set_error("null output pointer");
            return BoptStatus::NullArgument;
        }
        let text = match cstr_arg(text) {
            Ok(t) => t,
            Err(status) => return status,
        };
        match Hamiltonian::parse_str(text) {
            Ok(h) => {
                *out = Box::into_raw(Box::new(BoptHamiltonian(h)));
                BoptStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                BoptStatus::ParseError
            }
        }
    })
}

/// Load a Hamiltonian file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bopt_hamiltonian_load(
    path: *const c_char,
    out: *mut *mut BoptHamiltonian,
) -> BoptStatus {
    guarded(|| {
        if out.is_null() {
            set_error("null output pointer");
            return BoptStatus::NullArgument;
        }
        let path = match cstr_arg(path) {
            Ok(t) => t,
            Err(status) => return status,
        };
        match Hamiltonian::load(path) {
            Ok(h) => {
                *out = Box::into_raw(Box::new(BoptHamiltonian(h)));
                BoptStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                BoptStatus::ParseError
            }
        }
    })
}

/// # Safety
/// `handle` must come from a `bopt_hamiltonian_*` constructor; passing it
/// twice is undefined behavior.
#[no_mangle]
pub unsafe extern "C" fn bopt_hamiltonian_free(handle: *mut BoptHamiltonian) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// # Safety
/// `handle` must be a live Hamiltonian handle.
#[no_mangle]
pub unsafe extern "C" fn bopt_hamiltonian_n_qubits(handle: *const BoptHamiltonian) -> usize {
    if handle.is_null() {
        return 0;
    }
    (*handle).0.n_qubits()
}

/// # Safety
/// `handle` must be a live Hamiltonian handle.
#[no_mangle]
pub unsafe extern "C" fn bopt_hamiltonian_n_terms(handle: *const BoptHamiltonian) -> usize {
    if handle.is_null() {
        return 0;
    }
    (*handle).0.terms().len()
}

/// Exact minimum eigenvalue via dense diagonalization (up to 12 qubits).
///
/// # Safety
/// `handle` must be a live Hamiltonian handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bopt_hamiltonian_ground_energy(
    handle: *const BoptHamiltonian,
    out: *mut f64,
) -> BoptStatus {
    guarded(|| {
        if handle.is_null() || out.is_null() {
            set_error("null argument");
            return BoptStatus::NullArgument;
        }
        match (*handle).0.ground_energy_exact() {
            Ok(e) => {
                *out = e;
                BoptStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                BoptStatus::EvalError
            }
        }
    })
}

/// Hardware-efficient ansatz: `depth` layers of per-qubit RY rotations and
/// all-pairs CNOTs after X gates on the `hf_bits` occupations.
///
/// # Safety
/// `hf_bits` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bopt_ansatz_hea(
    n_qubits: usize,
    depth: usize,
    hf_bits: *const c_char,
    out: *mut *mut BoptAnsatz,
) -> BoptStatus {
    guarded(|| {
        if out.is_null() {
            set_error("null output pointer");
            return BoptStatus::NullArgument;
        }
        let hf_bits = match cstr_arg(hf_bits) {
            Ok(t) => t,
            Err(status) => return status,
        };
        match Ansatz::hea(n_qubits, depth, hf_bits) {
            Ok(a) => {
                *out = Box::into_raw(Box::new(BoptAnsatz(a)));
                BoptStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                BoptStatus::ConfigError
            }
        }
    })
}

/// Real-amplitudes ansatz: H on every qubit, an RY layer, then `depth`
/// repetitions of a linear CNOT chain plus another RY layer.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bopt_ansatz_real_amplitudes(
    n_qubits: usize,
    depth: usize,
    out: *mut *mut BoptAnsatz,
) -> BoptStatus {
    guarded(|| {
        if out.is_null() {
            set_error("null output pointer");
            return BoptStatus::NullArgument;
        }
        *out = Box::into_raw(Box::new(BoptAnsatz(Ansatz::real_amplitudes(
            n_qubits, depth,
        ))));
        BoptStatus::Ok
    })
}

/// # Safety
/// `handle` must come from a `bopt_ansatz_*` constructor; passing it twice
/// is undefined behavior.
#[no_mangle]
pub unsafe extern "C" fn bopt_ansatz_free(handle: *mut BoptAnsatz) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// # Safety
/// `handle` must be a live ansatz handle.
#[no_mangle]
pub unsafe extern "C" fn bopt_ansatz_param_count(handle: *const BoptAnsatz) -> usize {
    if handle.is_null() {
        return 0;
    }
    (*handle).0.param_count()
}

/// Noise-free energy expectation at the given parameters.
///
/// # Safety
/// `theta` must point to `theta_len` doubles; handles must be live.
#[no_mangle]
pub unsafe extern "C" fn bopt_energy_exact(
    hamiltonian: *const BoptHamiltonian,
    ansatz: *const BoptAnsatz,
    theta: *const f64,
    theta_len: usize,
    out: *mut f64,
) -> BoptStatus {
    guarded(|| {
        if hamiltonian.is_null() || ansatz.is_null() || theta.is_null() || out.is_null() {
            set_error("null argument");
            return BoptStatus::NullArgument;
        }
        let theta = std::slice::from_raw_parts(theta, theta_len);
        match expectation_exact((*ansatz).0.circuit(), theta, &(*hamiltonian).0) {
            Ok(e) => {
                *out = e;
                BoptStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                BoptStatus::DimensionError
            }
        }
    })
}

/// One observed energy under the given shot count and noise model,
/// reproducible from the seed.
///
/// # Safety
/// `theta` must point to `theta_len` doubles; handles must be live; `noise`
/// and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn bopt_energy_observed(
    hamiltonian: *const BoptHamiltonian,
    ansatz: *const BoptAnsatz,
    theta: *const f64,
    theta_len: usize,
    shots: u64,
    noise: *const BoptNoiseConfig,
    seed: u64,
    out: *mut f64,
) -> BoptStatus {
    guarded(|| {
        if hamiltonian.is_null()
            || ansatz.is_null()
            || theta.is_null()
            || noise.is_null()
            || out.is_null()
        {
            set_error("null argument");
            return BoptStatus::NullArgument;
        }
        let theta = std::slice::from_raw_parts(theta, theta_len);
        let model = (*noise).to_model();
        let mut rng = bopt::rng::stream(seed, bopt::rng::StreamId::Objective);
        match evaluate_energy(
            (*ansatz).0.circuit(),
            theta,
            &(*hamiltonian).0,
            shots,
            &model,
            &mut rng,
        ) {
            Ok(e) => {
                *out = e;
                BoptStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                BoptStatus::EvalError
            }
        }
    })
}

/// Run the BOPT loop against the simulated objective and return the trace.
///
/// # Safety
/// Handles must be live; `noise`, `config`, and `out` must be valid
/// pointers.
#[no_mangle]
pub unsafe extern "C" fn bopt_optimize(
    hamiltonian: *const BoptHamiltonian,
    ansatz: *const BoptAnsatz,
    noise: *const BoptNoiseConfig,
    config: *const BoptRunConfig,
    out: *mut *mut BoptRunRecord,
) -> BoptStatus {
    guarded(|| {
        if hamiltonian.is_null()
            || ansatz.is_null()
            || noise.is_null()
            || config.is_null()
            || out.is_null()
        {
            set_error("null argument");
            return BoptStatus::NullArgument;
        }
        let cfg = *config;
        let options = BoOptions {
            budget_units: cfg.budget_units,
            init_units: cfg.init_units,
            high_shots: cfg.high_shots,
            low_shots: cfg.low_shots,
            kernel: if cfg.periodic_kernel {
                KernelKind::periodic_2pi()
            } else {
                KernelKind::Matern25
            },
            acquisition: AcquisitionKind::Lcb { beta: cfg.beta },
            ..Default::default()
        };
        let mut objective = SimObjective::new(
            &(*ansatz).0,
            &(*hamiltonian).0,
            (*noise).to_model(),
            cfg.high_shots,
            cfg.low_shots,
            cfg.seed,
        );
        match bopt_run(&mut objective, &options, cfg.seed) {
            Ok(record) => {
                *out = Box::into_raw(Box::new(BoptRunRecord(record)));
                BoptStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                BoptStatus::RunError
            }
        }
    })
}

/// # Safety
/// `handle` must come from `bopt_optimize`; passing it twice is undefined
/// behavior.
#[no_mangle]
pub unsafe extern "C" fn bopt_run_record_free(handle: *mut BoptRunRecord) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// # Safety
/// `handle` must be a live run-record handle.
#[no_mangle]
pub unsafe extern "C" fn bopt_run_record_len(handle: *const BoptRunRecord) -> usize {
    if handle.is_null() {
        return 0;
    }
    (&(*handle).0.rows).len()
}

/// Number of parameters in each row's theta vector.
///
/// # Safety
/// `handle` must be a live run-record handle.
#[no_mangle]
pub unsafe extern "C" fn bopt_run_record_theta_dim(handle: *const BoptRunRecord) -> usize {
    if handle.is_null() {
        return 0;
    }
    (&(*handle).0.rows).first().map_or(0, |r| r.theta.len())
}

/// Copy row `index` into `out`.
///
/// # Safety
/// `handle` must be a live run-record handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bopt_run_record_row(
    handle: *const BoptRunRecord,
    index: usize,
    out: *mut BoptRunRow,
) -> BoptStatus {
    guarded(|| {
        if handle.is_null() || out.is_null() {
            set_error("null argument");
            return BoptStatus::NullArgument;
        }
        match (&(*handle).0.rows).get(index) {
            Some(row) => {
                *out = BoptRunRow {
                    iteration: row.iteration,
                    cumulative_cost: row.cumulative_cost,
                    observed_energy: row.observed_energy,
                    best_observed: row.best_observed,
                };
                BoptStatus::Ok
            }
            None => {
                set_error("row index out of range");
                BoptStatus::OutOfRange
            }
        }
    })
}

/// Copy row `index`'s parameter vector into `buffer` (`buffer_len` must be
/// at least the theta dimension).
///
/// # Safety
/// `handle` must be a live run-record handle; `buffer` must point to
/// `buffer_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn bopt_run_record_theta(
    handle: *const BoptRunRecord,
    index: usize,
    buffer: *mut f64,
    buffer_len: usize,
) -> BoptStatus {
    guarded(|| {
        if handle.is_null() || buffer.is_null() {
            set_error("null argument");
            return BoptStatus::NullArgument;
        }
        match (&(*handle).0.rows).get(index) {
            Some(row) => {
                if buffer_len < row.theta.len() {
                    set_error("buffer too small for theta");
                    return BoptStatus::OutOfRange;
                }
                std::ptr::copy_nonoverlapping(row.theta.as_ptr(), buffer, row.theta.len());
                BoptStatus::Ok
            }
            None => {
                set_error("row index out of range");
                BoptStatus::OutOfRange
            }
        }
    })
}
