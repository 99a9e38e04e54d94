//! State-vector circuit simulation and noisy energy evaluation.
//!
//! The simulator evolves the full `2^n` amplitude vector through the
//! parameterized ansatz circuits used by the optimizers. Energies come in
//! three flavors selected by [`ShotMode`]:
//!
//! - `Exact`: the noise-free expectation `f(theta)` (infinite-shot limit),
//! - `Sampled`: true per-shot measurement sampling of every Pauli term,
//! - `Gaussian`: `f(theta)` plus `N(0, (sigma_s/sqrt(S))^2)` shot noise,
//!
//! optionally followed by a synthetic hardware corruption
//! `y <- y + a*(y - c) + N(0, hw_sigma^2)` that models the affine bias and
//! small spread seen on real devices. Slopes `a > -1` keep the corrupted
//! objective a strictly increasing function of the true energy, so the
//! location of the minimum is preserved.

use crate::hamiltonian::{Hamiltonian, PauliString, PauliTerm};
use nalgebra::Complex;
use rand::Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};
use std::f64::consts::PI;
use thiserror::Error;

type C64 = Complex<f64>;

const TAU: f64 = 2.0 * PI;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("parameter vector has length {got}, circuit expects {expected}")]
    ParamCount { expected: usize, got: usize },
    #[error("Hamiltonian acts on {ham} qubits, circuit on {circuit}")]
    QubitMismatch { ham: usize, circuit: usize },
    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitIndex { index: usize, n_qubits: usize },
    #[error("shot count must be at least 1")]
    ZeroShots,
    #[error("identity terms are deterministic and cannot be shot-sampled")]
    IdentityTerm,
    #[error("hf_bits '{0}' must be a bitstring matching the qubit count")]
    BadHfBits(String),
    #[error("invalid noise model: {0}")]
    InvalidNoise(String),
}

/// Angles in radians, reduced into `[0, 2*pi)` at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector(Vec<f64>);

impl ParamVector {
    pub fn new(values: impl Into<Vec<f64>>) -> Self {
        let mut values = values.into();
        for v in &mut values {
            *v = v.rem_euclid(TAU);
        }
        Self(values)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::ops::Deref for ParamVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// A single circuit operation. `Ry` reads its angle from a parameter slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    X(usize),
    H(usize),
    Ry { qubit: usize, param: usize },
    Cnot { control: usize, target: usize },
    Cz { a: usize, b: usize },
}

/// An ordered gate list over a fixed qubit count with `param_count` free
/// rotation angles.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    param_count: usize,
}

impl Circuit {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn param_count(&self) -> usize {
        self.param_count
    }
}

/// The ansatz families available to the optimizers.
#[derive(Debug, Clone, PartialEq)]
pub enum AnsatzKind {
    /// Hartree-Fock prep (X on the occupied bits), then `depth` layers of an
    /// RY rotation per qubit followed by CNOTs on all qubit pairs.
    Hea { depth: usize, hf_bits: Vec<bool> },
    /// Equal-superposition prep (H on every qubit), an RY layer, then
    /// `depth` repetitions of a linear CNOT chain plus another RY layer.
    RealAmplitudes { depth: usize },
}

/// A built ansatz: kind, qubit count, and the concrete circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct Ansatz {
    pub kind: AnsatzKind,
    circuit: Circuit,
}

impl Ansatz {
    /// Hardware-efficient ansatz. Parameter slots are ordered layer-major,
    /// qubit-ascending; `d = n_qubits * depth`.
    pub fn hea(n_qubits: usize, depth: usize, hf_bits: &str) -> Result<Self, SimError> {
        if depth == 0 {
            return Err(SimError::BadHfBits("depth must be >= 1".into()));
        }
        if hf_bits.len() != n_qubits || !hf_bits.chars().all(|c| c == '0' || c == '1') {
            return Err(SimError::BadHfBits(hf_bits.to_string()));
        }
        let bits: Vec<bool> = hf_bits.chars().map(|c| c == '1').collect();
        let mut gates = Vec::new();
        for (q, &occupied) in bits.iter().enumerate() {
            if occupied {
                gates.push(Gate::X(q));
            }
        }
        let mut param = 0;
        for _ in 0..depth {
            for q in 0..n_qubits {
                gates.push(Gate::Ry { qubit: q, param });
                param += 1;
            }
            for a in 0..n_qubits {
                for b in (a + 1)..n_qubits {
                    gates.push(Gate::Cnot {
                        control: a,
                        target: b,
                    });
                }
            }
        }
        Ok(Self {
            kind: AnsatzKind::Hea {
                depth,
                hf_bits: bits,
            },
            circuit: Circuit {
                n_qubits,
                gates,
                param_count: param,
            },
        })
    }

    /// Real-amplitudes ansatz; `d = n_qubits * (depth + 1)`.
    pub fn real_amplitudes(n_qubits: usize, depth: usize) -> Self {
        let mut gates = Vec::new();
        for q in 0..n_qubits {
            gates.push(Gate::H(q));
        }
        let mut param = 0;
        for q in 0..n_qubits {
            gates.push(Gate::Ry { qubit: q, param });
            param += 1;
        }
        for _ in 0..depth {
            for q in 0..n_qubits.saturating_sub(1) {
                gates.push(Gate::Cnot {
                    control: q,
                    target: q + 1,
                });
            }
            for q in 0..n_qubits {
                gates.push(Gate::Ry { qubit: q, param });
                param += 1;
            }
        }
        Self {
            kind: AnsatzKind::RealAmplitudes { depth },
            circuit: Circuit {
                n_qubits,
                gates,
                param_count: param,
            },
        }
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn n_qubits(&self) -> usize {
        self.circuit.n_qubits
    }

    pub fn param_count(&self) -> usize {
        self.circuit.param_count
    }
}

/// `2^n` complex amplitudes; qubit 0 is the most significant index bit.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// The all-zeros computational basis state.
    pub fn zero(n_qubits: usize) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = C64::new(1.0, 0.0);
        Self { n_qubits, amps }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn bit_mask(&self, qubit: usize) -> usize {
        1 << (self.n_qubits - 1 - qubit)
    }

    fn apply_single(&mut self, qubit: usize, m: [[C64; 2]; 2]) {
        let mask = self.bit_mask(qubit);
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                let j = i | mask;
                let a0 = self.amps[i];
                let a1 = self.amps[j];
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[j] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    fn apply_x(&mut self, qubit: usize) {
        let mask = self.bit_mask(qubit);
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                self.amps.swap(i, i | mask);
            }
        }
    }

    fn apply_h(&mut self, qubit: usize) {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let h = C64::new(s, 0.0);
        self.apply_single(qubit, [[h, h], [h, -h]]);
    }

    fn apply_ry(&mut self, qubit: usize, angle: f64) {
        let c = C64::new((angle / 2.0).cos(), 0.0);
        let s = C64::new((angle / 2.0).sin(), 0.0);
        self.apply_single(qubit, [[c, -s], [s, c]]);
    }

    fn apply_cnot(&mut self, control: usize, target: usize) {
        let cm = self.bit_mask(control);
        let tm = self.bit_mask(target);
        for i in 0..self.amps.len() {
            if i & cm != 0 && i & tm == 0 {
                self.amps.swap(i, i | tm);
            }
        }
    }

    fn apply_cz(&mut self, a: usize, b: usize) {
        let am = self.bit_mask(a);
        let bm = self.bit_mask(b);
        for i in 0..self.amps.len() {
            if i & am != 0 && i & bm != 0 {
                self.amps[i] = -self.amps[i];
            }
        }
    }

    /// Basis change sending the qubit's Y eigenbasis to the computational
    /// basis: apply S-dagger, then H.
    fn apply_sdg_h(&mut self, qubit: usize) {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let r = C64::new(s, 0.0);
        let mi = C64::new(0.0, -s);
        self.apply_single(qubit, [[r, mi], [r, -mi]]);
    }

    /// Expectation value of a single Pauli string (coefficient 1).
    fn pauli_expectation(&self, string: &PauliString) -> f64 {
        let (flip, phase, y_count) = string.masks();
        let flip = flip as usize;
        let i_powers = [
            C64::new(1.0, 0.0),
            C64::new(0.0, 1.0),
            C64::new(-1.0, 0.0),
            C64::new(0.0, -1.0),
        ];
        let base = i_powers[(y_count % 4) as usize];
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..self.amps.len() {
            let sign = if ((j as u64 & phase).count_ones() & 1) == 1 {
                -1.0
            } else {
                1.0
            };
            acc += self.amps[j ^ flip].conj() * self.amps[j] * sign;
        }
        (acc * base).re
    }
}

fn check_gate_indices(circuit: &Circuit) -> Result<(), SimError> {
    let n = circuit.n_qubits;
    let check = |q: usize| {
        if q >= n {
            Err(SimError::QubitIndex {
                index: q,
                n_qubits: n,
            })
        } else {
            Ok(())
        }
    };
    for gate in &circuit.gates {
        match *gate {
            Gate::X(q) | Gate::H(q) => check(q)?,
            Gate::Ry { qubit, .. } => check(qubit)?,
            Gate::Cnot { control, target } => {
                check(control)?;
                check(target)?;
                if control == target {
                    return Err(SimError::QubitIndex {
                        index: target,
                        n_qubits: n,
                    });
                }
            }
            Gate::Cz { a, b } => {
                check(a)?;
                check(b)?;
                if a == b {
                    return Err(SimError::QubitIndex {
                        index: b,
                        n_qubits: n,
                    });
                }
            }
        }
    }
    Ok(())
}

/// Run a parameterized circuit from the all-zeros state.
pub fn run_circuit(circuit: &Circuit, theta: &[f64]) -> Result<StateVector, SimError> {
    if theta.len() != circuit.param_count {
        return Err(SimError::ParamCount {
            expected: circuit.param_count,
            got: theta.len(),
        });
    }
    check_gate_indices(circuit)?;
    let mut state = StateVector::zero(circuit.n_qubits);
    for gate in &circuit.gates {
        match *gate {
            Gate::X(q) => state.apply_x(q),
            Gate::H(q) => state.apply_h(q),
            Gate::Ry { qubit, param } => state.apply_ry(qubit, theta[param]),
            Gate::Cnot { control, target } => state.apply_cnot(control, target),
            Gate::Cz { a, b } => state.apply_cz(a, b),
        }
    }
    Ok(state)
}

/// The noise-free objective `f(theta)`: the exact energy expectation,
/// computed term-by-term without materializing the dense matrix.
pub fn expectation_exact(
    circuit: &Circuit,
    theta: &[f64],
    h: &Hamiltonian,
) -> Result<f64, SimError> {
    if h.n_qubits() != circuit.n_qubits {
        return Err(SimError::QubitMismatch {
            ham: h.n_qubits(),
            circuit: circuit.n_qubits,
        });
    }
    let state = run_circuit(circuit, theta)?;
    let mut energy = 0.0;
    for term in h.terms() {
        if term.string.is_identity() {
            energy += term.coefficient;
        } else {
            energy += term.coefficient * state.pauli_expectation(&term.string);
        }
    }
    Ok(energy)
}

/// Shot-sample one non-identity Pauli term: rotate to the measurement basis,
/// draw `shots` bitstrings from the Born distribution, and average the
/// resulting eigenvalue estimates, scaled by the term coefficient.
pub fn sample_pauli_term(
    state: &StateVector,
    term: &PauliTerm,
    shots: u64,
    rng: &mut impl Rng,
) -> Result<f64, SimError> {
    if shots == 0 {
        return Err(SimError::ZeroShots);
    }
    if term.string.is_identity() {
        return Err(SimError::IdentityTerm);
    }
    let mut rotated = state.clone();
    for (q, &p) in term.string.ops().iter().enumerate() {
        match p {
            crate::hamiltonian::Pauli::X => rotated.apply_h(q),
            crate::hamiltonian::Pauli::Y => rotated.apply_sdg_h(q),
            _ => {}
        }
    }
    let (flip, phase, _) = term.string.masks();
    let support = flip | phase;

    // Multinomial draw via a chain of binomials over the outcome histogram.
    let dim = rotated.amps.len();
    let mut remaining_shots = shots;
    let mut remaining_prob = 1.0f64;
    let mut eig_sum: i64 = 0;
    for j in 0..dim {
        if remaining_shots == 0 {
            break;
        }
        let p_j = rotated.amps[j].norm_sqr();
        let count = if j + 1 == dim {
            remaining_shots
        } else {
            let frac = (p_j / remaining_prob).clamp(0.0, 1.0);
            let draw = Binomial::new(remaining_shots, frac)
                .expect("valid binomial")
                .sample(rng);
            remaining_prob = (remaining_prob - p_j).max(f64::MIN_POSITIVE);
            draw
        };
        remaining_shots -= count;
        let parity = (j as u64 & support).count_ones() & 1;
        if parity == 1 {
            eig_sum -= count as i64;
        } else {
            eig_sum += count as i64;
        }
    }
    Ok(term.coefficient * eig_sum as f64 / shots as f64)
}

/// How the sample-mean energy estimate is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShotMode {
    /// Infinite-shot limit: return `f(theta)` itself.
    Exact,
    /// Sample each non-identity term with `shots` fresh shots.
    Sampled,
    /// Add `N(0, (sigma_s/sqrt(shots))^2)` to `f(theta)`.
    Gaussian,
}

/// Affine hardware bias plus homoscedastic spread.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct HardwareModel {
    /// Bias slope `a` in `y <- y + a*(y - c)`; must stay above -1.
    pub bias_slope: f64,
    /// Zero-bias crossing `c` (energy where the device reads true).
    pub bias_zero: f64,
    /// Standard deviation of the additive readout spread.
    pub sigma: f64,
}

impl Default for HardwareModel {
    fn default() -> Self {
        // Negative slope: energies below the crossing are reported high,
        // which is the direction real backends drift.
        Self {
            bias_slope: -0.15,
            bias_zero: -0.2,
            sigma: 0.01,
        }
    }
}

/// Full observation model for [`evaluate_energy`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NoiseModel {
    pub shot_mode: ShotMode,
    /// Gaussian-mode scale; the observation noise std is `sigma_s/sqrt(S)`.
    pub sigma_s: f64,
    pub hardware: Option<HardwareModel>,
}

impl NoiseModel {
    pub fn exact() -> Self {
        Self {
            shot_mode: ShotMode::Exact,
            sigma_s: 0.0,
            hardware: None,
        }
    }

    pub fn sampled() -> Self {
        Self {
            shot_mode: ShotMode::Sampled,
            sigma_s: 0.0,
            hardware: None,
        }
    }

    pub fn gaussian(sigma_s: f64) -> Self {
        Self {
            shot_mode: ShotMode::Gaussian,
            sigma_s,
            hardware: None,
        }
    }

    pub fn with_hardware(mut self, hw: HardwareModel) -> Self {
        self.hardware = Some(hw);
        self
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.sigma_s < 0.0 {
            return Err(SimError::InvalidNoise("sigma_s must be >= 0".into()));
        }
        if let Some(hw) = &self.hardware {
            if hw.sigma < 0.0 {
                return Err(SimError::InvalidNoise("hw sigma must be >= 0".into()));
            }
            if hw.bias_slope <= -1.0 {
                return Err(SimError::InvalidNoise(
                    "hw bias slope must be > -1 to preserve the argmin".into(),
                ));
            }
        }
        Ok(())
    }
}

/// One observed energy `y_theta` under the given shot count and noise model.
pub fn evaluate_energy(
    circuit: &Circuit,
    theta: &[f64],
    h: &Hamiltonian,
    shots: u64,
    noise: &NoiseModel,
    rng: &mut impl Rng,
) -> Result<f64, SimError> {
    noise.validate()?;
    if shots == 0 && noise.shot_mode != ShotMode::Exact {
        return Err(SimError::ZeroShots);
    }
    let mut y = match noise.shot_mode {
        ShotMode::Exact => expectation_exact(circuit, theta, h)?,
        ShotMode::Sampled => {
            if h.n_qubits() != circuit.n_qubits {
                return Err(SimError::QubitMismatch {
                    ham: h.n_qubits(),
                    circuit: circuit.n_qubits,
                });
            }
            let state = run_circuit(circuit, theta)?;
            let mut acc = h.identity_offset();
            for term in h.terms() {
                if !term.string.is_identity() {
                    acc += sample_pauli_term(&state, term, shots, rng)?;
                }
            }
            acc
        }
        ShotMode::Gaussian => {
            let exact = expectation_exact(circuit, theta, h)?;
            let std = noise.sigma_s / (shots as f64).sqrt();
            let z: f64 = StandardNormal.sample(rng);
            exact + std * z
        }
    };
    if let Some(hw) = &noise.hardware {
        y += hw.bias_slope * (y - hw.bias_zero);
        if hw.sigma > 0.0 {
            let z: f64 = StandardNormal.sample(rng);
            y += hw.sigma * z;
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, StreamId};
    use proptest::prelude::*;
    use rand::Rng;

    fn ham(text: &str) -> Hamiltonian {
        Hamiltonian::parse_str(text).unwrap()
    }

    #[test]
    fn hea_parameter_counts_match_depth_times_qubits() {
        assert_eq!(Ansatz::hea(4, 4, "1100").unwrap().param_count(), 16);
        assert_eq!(Ansatz::hea(6, 4, "110000").unwrap().param_count(), 24);
    }

    #[test]
    fn smallest_hea_gate_order() {
        let a = Ansatz::hea(2, 1, "10").unwrap();
        assert_eq!(
            a.circuit().gates(),
            &[
                Gate::X(0),
                Gate::Ry { qubit: 0, param: 0 },
                Gate::Ry { qubit: 1, param: 1 },
                Gate::Cnot {
                    control: 0,
                    target: 1
                },
            ]
        );
    }

    #[test]
    fn real_amplitudes_structure() {
        let a = Ansatz::real_amplitudes(4, 1);
        assert_eq!(a.param_count(), 8);
        let cnots = a
            .circuit()
            .gates()
            .iter()
            .filter(|g| matches!(g, Gate::Cnot { .. }))
            .count();
        assert_eq!(cnots, 3);
        // theta = 0: RY(0) is the identity and CNOTs permute equal
        // amplitudes, so the state stays the uniform superposition.
        let state = run_circuit(a.circuit(), &[0.0; 8]).unwrap();
        for amp in state.amplitudes() {
            assert!((amp.re - 0.25).abs() < 1e-12 && amp.im.abs() < 1e-15);
        }
    }

    #[test]
    fn ry_pi_flips_a_qubit() {
        let mut c = Circuit {
            n_qubits: 1,
            gates: vec![Gate::Ry { qubit: 0, param: 0 }],
            param_count: 1,
        };
        let state = run_circuit(&c, &[PI]).unwrap();
        assert!(state.amplitudes()[0].norm() < 1e-12);
        assert!((state.amplitudes()[1].re - 1.0).abs() < 1e-12);

        // RY(2*pi) flips the global sign; expectations are unchanged.
        c.gates = vec![Gate::Ry { qubit: 0, param: 0 }];
        let state = run_circuit(&c, &[2.0 * PI]).unwrap();
        assert!((state.amplitudes()[0].re + 1.0).abs() < 1e-12);
        let h = ham("1.0 Z");
        let e = expectation_exact(&c, &[2.0 * PI], &h).unwrap();
        assert!((e - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hea_at_zero_angles_is_a_basis_state() {
        let a = Ansatz::hea(4, 2, "1100").unwrap();
        let state = run_circuit(a.circuit(), &[0.0; 8]).unwrap();
        let big = state
            .amplitudes()
            .iter()
            .filter(|amp| amp.norm() > 1e-9)
            .count();
        assert_eq!(big, 1);
    }

    #[test]
    fn z_expectations_on_basis_states() {
        let c = Circuit {
            n_qubits: 1,
            gates: vec![Gate::Ry { qubit: 0, param: 0 }],
            param_count: 1,
        };
        let h = ham("1.0 Z");
        assert!((expectation_exact(&c, &[0.0], &h).unwrap() - 1.0).abs() < 1e-12);
        assert!((expectation_exact(&c, &[PI], &h).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn param_length_mismatch_is_an_error() {
        let a = Ansatz::hea(2, 1, "00").unwrap();
        assert!(matches!(
            run_circuit(a.circuit(), &[0.0]),
            Err(SimError::ParamCount {
                expected: 2,
                got: 1
            })
        ));
    }

    #[test]
    fn sampling_deterministic_outcomes() {
        let mut rng = stream(1, StreamId::Objective);
        // Z on |0>: every shot reads +1.
        let state = StateVector::zero(1);
        let term = PauliTerm {
            coefficient: 1.0,
            string: "Z".parse().unwrap(),
        };
        for shots in [1, 7, 1000] {
            let v = sample_pauli_term(&state, &term, shots, &mut rng).unwrap();
            assert_eq!(v, 1.0);
        }
        // X on |+>: rotating to the X basis gives |0>, again deterministic.
        let mut plus = StateVector::zero(1);
        plus.apply_h(0);
        let term = PauliTerm {
            coefficient: 1.0,
            string: "X".parse().unwrap(),
        };
        let v = sample_pauli_term(&plus, &term, 500, &mut rng).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn sampling_z_on_plus_matches_binomial_std() {
        // <Z> on |+> is 0 with per-shot variance 1, so the sample mean over
        // S shots has std 1/sqrt(S) = 0.01 at S = 10^4.
        let mut plus = StateVector::zero(1);
        plus.apply_h(0);
        let term = PauliTerm {
            coefficient: 1.0,
            string: "Z".parse().unwrap(),
        };
        let mut rng = stream(2, StreamId::Objective);
        let shots = 10_000;
        let reps = 300;
        let samples: Vec<f64> = (0..reps)
            .map(|_| sample_pauli_term(&plus, &term, shots, &mut rng).unwrap())
            .collect();
        let mean = samples.iter().sum::<f64>() / reps as f64;
        let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
        let std = var.sqrt();
        assert!(mean.abs() < 4.0 * 0.01 / (reps as f64).sqrt() + 1e-3, "mean {mean}");
        assert!((std - 0.01).abs() < 0.2 * 0.01, "std {std}");
    }

    #[test]
    fn exact_mode_is_reproducible_and_noise_free() {
        let a = Ansatz::hea(2, 1, "10").unwrap();
        let h = ham("0.3 ZZ\n-0.2 XI");
        let theta = [0.7, 1.9];
        let mut rng1 = stream(3, StreamId::Objective);
        let mut rng2 = stream(4, StreamId::Objective);
        let y1 =
            evaluate_energy(a.circuit(), &theta, &h, 1, &NoiseModel::exact(), &mut rng1).unwrap();
        let y2 =
            evaluate_energy(a.circuit(), &theta, &h, 1, &NoiseModel::exact(), &mut rng2).unwrap();
        assert_eq!(y1.to_bits(), y2.to_bits());
        assert_eq!(y1, expectation_exact(a.circuit(), &theta, &h).unwrap());
    }

    #[test]
    fn gaussian_mode_noise_scales_with_sigma_s_over_sqrt_shots() {
        let a = Ansatz::hea(2, 1, "10").unwrap();
        let h = ham("1.0 ZZ");
        let theta = [0.3, 0.4];
        let f = expectation_exact(a.circuit(), &theta, &h).unwrap();
        let mut rng = stream(5, StreamId::Objective);
        let noise = NoiseModel::gaussian(0.4);
        let shots = 16;
        let reps = 4000;
        let mut acc = 0.0;
        let mut acc2 = 0.0;
        for _ in 0..reps {
            let y = evaluate_energy(a.circuit(), &theta, &h, shots, &noise, &mut rng).unwrap();
            acc += y - f;
            acc2 += (y - f) * (y - f);
        }
        let mean = acc / reps as f64;
        let std = (acc2 / reps as f64 - mean * mean).sqrt();
        let expected = 0.4 / (shots as f64).sqrt();
        assert!((std - expected).abs() < 0.1 * expected, "std {std} vs {expected}");
    }

    #[test]
    fn hardware_bias_direction_follows_slope_sign() {
        let a = Ansatz::hea(4, 1, "1100").unwrap();
        let h = crate::hamiltonian::Hamiltonian::load(test_data("h2_sto3g_jw.ham")).unwrap();
        let theta = vec![0.0; 4];
        let f = expectation_exact(a.circuit(), &theta, &h).unwrap();
        assert!(f < -0.2);
        let mut rng = stream(6, StreamId::Objective);
        // Negative slope (the default direction): observations sit above the
        // true energy wherever f < c.
        let up = NoiseModel::exact().with_hardware(HardwareModel {
            bias_slope: -0.15,
            bias_zero: -0.2,
            sigma: 0.0,
        });
        let y = evaluate_energy(a.circuit(), &theta, &h, 1, &up, &mut rng).unwrap();
        assert!(y > f);
        // Positive slope biases the same energies downward instead.
        let down = NoiseModel::exact().with_hardware(HardwareModel {
            bias_slope: 0.15,
            bias_zero: -0.2,
            sigma: 0.0,
        });
        let y = evaluate_energy(a.circuit(), &theta, &h, 1, &down, &mut rng).unwrap();
        assert!(y < f);
    }

    #[test]
    fn affine_bias_preserves_the_argmin() {
        let a = Ansatz::hea(2, 1, "10").unwrap();
        let h = ham("1.0 ZZ\n0.4 XI");
        let noise = NoiseModel::exact().with_hardware(HardwareModel {
            bias_slope: -0.6,
            bias_zero: -0.2,
            sigma: 0.0,
        });
        let mut rng = stream(7, StreamId::Objective);
        let grid: Vec<[f64; 2]> = (0..40)
            .flat_map(|i| (0..40).map(move |j| [i as f64 * TAU / 40.0, j as f64 * TAU / 40.0]))
            .collect();
        let mut best_true = (f64::INFINITY, 0);
        let mut best_noisy = (f64::INFINITY, 0);
        for (k, theta) in grid.iter().enumerate() {
            let f = expectation_exact(a.circuit(), theta, &h).unwrap();
            let y = evaluate_energy(a.circuit(), theta, &h, 1, &noise, &mut rng).unwrap();
            if f < best_true.0 {
                best_true = (f, k);
            }
            if y < best_noisy.0 {
                best_noisy = (y, k);
            }
        }
        assert_eq!(best_true.1, best_noisy.1);
    }

    #[test]
    fn invalid_noise_models_are_rejected() {
        let bad = NoiseModel::exact().with_hardware(HardwareModel {
            bias_slope: -1.0,
            bias_zero: 0.0,
            sigma: 0.0,
        });
        assert!(bad.validate().is_err());
        let bad = NoiseModel {
            shot_mode: ShotMode::Gaussian,
            sigma_s: -1.0,
            hardware: None,
        };
        assert!(bad.validate().is_err());
    }

    pub(crate) fn test_data(name: &str) -> std::path::PathBuf {
        std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("../../data")
            .join(name)
    }

    #[test]
    fn random_h2_energies_respect_the_variational_principle() {
        let h = Hamiltonian::load(test_data("h2_sto3g_jw.ham")).unwrap();
        let e0 = h.ground_energy_exact().unwrap();
        let a = Ansatz::hea(4, 4, "1100").unwrap();
        let mut rng = stream(8, StreamId::Objective);
        for _ in 0..10 {
            let theta: Vec<f64> = (0..16).map(|_| rng.gen_range(0.0..TAU)).collect();
            let f = expectation_exact(a.circuit(), &theta, &h).unwrap();
            assert!(f >= e0 - 1e-10);
        }
    }

    #[test]
    fn expectation_matches_dense_oracle() {
        let mut rng = stream(9, StreamId::Objective);
        for n in 1..=4usize {
            let n_terms = 4;
            let mut text = String::new();
            for _ in 0..n_terms {
                let coeff: f64 = rng.gen_range(-1.0..1.0);
                let s: String = (0..n)
                    .map(|_| ['I', 'X', 'Y', 'Z'][rng.gen_range(0..4)])
                    .collect();
                text.push_str(&format!("{coeff} {s}\n"));
            }
            let h = ham(&text);
            let hf: String = (0..n).map(|q| if q % 2 == 0 { '1' } else { '0' }).collect();
            let a = Ansatz::hea(n, 2, &hf).unwrap();
            let theta: Vec<f64> = (0..a.param_count()).map(|_| rng.gen_range(0.0..TAU)).collect();
            let state = run_circuit(a.circuit(), &theta).unwrap();
            let psi = nalgebra::DVector::from_column_slice(state.amplitudes());
            let dense = (psi.adjoint() * h.matrix().unwrap() * &psi)[(0, 0)].re;
            let fast = expectation_exact(a.circuit(), &theta, &h).unwrap();
            assert!((dense - fast).abs() < 1e-10);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn circuits_preserve_norm(seed in 0u64..500) {
            let mut rng = stream(seed, StreamId::Custom(0));
            let n = rng.gen_range(1..=5usize);
            let hf: String = (0..n).map(|_| if rng.gen::<bool>() { '1' } else { '0' }).collect();
            let a = Ansatz::hea(n, rng.gen_range(1..=3), &hf).unwrap();
            let theta: Vec<f64> = (0..a.param_count()).map(|_| rng.gen_range(-10.0..10.0)).collect();
            let state = run_circuit(a.circuit(), &theta).unwrap();
            prop_assert!((state.norm_sqr() - 1.0).abs() < 1e-10);
        }

        #[test]
        fn energy_is_2pi_periodic(seed in 0u64..500) {
            let mut rng = stream(seed, StreamId::Custom(1));
            let h = ham("0.5 ZZ\n0.25 XY\n-0.3 YX");
            let a = Ansatz::hea(2, 2, "10").unwrap();
            let theta: Vec<f64> = (0..4).map(|_| rng.gen_range(0.0..TAU)).collect();
            let f0 = expectation_exact(a.circuit(), &theta, &h).unwrap();
            for i in 0..4 {
                let mut shifted = theta.clone();
                shifted[i] += TAU;
                let f1 = expectation_exact(a.circuit(), &shifted, &h).unwrap();
                prop_assert!((f0 - f1).abs() < 1e-10);
            }
        }

        #[test]
        fn param_vector_wraps_into_range(v in proptest::collection::vec(-100.0f64..100.0, 1..8)) {
            let p = ParamVector::new(v);
            for &x in p.as_slice() {
                prop_assert!((0.0..TAU).contains(&x));
            }
        }
    }
}
