//! Pauli-string Hamiltonians.
//!
//! A Hamiltonian is a weighted sum of tensor products of single-qubit Pauli
//! operators,
//!
//! ```text
//!   H = sum_k  c_k * P_k,    P_k in {I, X, Y, Z}^n
//! ```
//!
//! read from a plain-text file (one `<coefficient> <pauli_string>` per line).
//! Qubit 0 is the leftmost character of a Pauli string, the leftmost tensor
//! factor of the dense matrix, and the most significant bit of a basis index.
//! The module also provides the exact dense-diagonalization oracle used to
//! pin ground-truth energies in experiments.

use nalgebra::{Complex, DMatrix};
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use thiserror::Error;

type C64 = Complex<f64>;

/// Dense-matrix operations refuse to build anything larger than this.
pub const MAX_DENSE_QUBITS: usize = 12;

#[derive(Debug, Error)]
pub enum HamiltonianError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("no Hamiltonian terms found")]
    Empty,
    #[error("{n_qubits} qubits exceeds the dense-matrix guard of {MAX_DENSE_QUBITS}")]
    TooLarge { n_qubits: usize },
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// Single-qubit Pauli operator label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    fn to_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// A tensor product of Pauli operators, one per qubit.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    ops: Vec<Pauli>,
}

impl PauliString {
    pub fn new(ops: Vec<Pauli>) -> Self {
        Self { ops }
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn ops(&self) -> &[Pauli] {
        &self.ops
    }

    /// True when every factor is the identity.
    pub fn is_identity(&self) -> bool {
        self.ops.iter().all(|&p| p == Pauli::I)
    }

    /// Bit masks describing the string's action on a basis index of
    /// `n = self.len()` bits (qubit 0 = most significant bit):
    /// `(flip, phase, y_count)` where `flip` marks X/Y positions, `phase`
    /// marks Z/Y positions, and `y_count` counts Y factors.
    pub fn masks(&self) -> (u64, u64, u32) {
        let n = self.ops.len();
        let mut flip = 0u64;
        let mut phase = 0u64;
        let mut y_count = 0u32;
        for (q, &p) in self.ops.iter().enumerate() {
            let bit = 1u64 << (n - 1 - q);
            match p {
                Pauli::I => {}
                Pauli::X => flip |= bit,
                Pauli::Y => {
                    flip |= bit;
                    phase |= bit;
                    y_count += 1;
                }
                Pauli::Z => phase |= bit,
            }
        }
        (flip, phase, y_count)
    }
}

impl FromStr for PauliString {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let ops = s
            .chars()
            .map(|c| Pauli::from_char(c).ok_or_else(|| format!("invalid Pauli label '{c}'")))
            .collect::<Result<Vec<_>, _>>()?;
        if ops.is_empty() {
            return Err("empty Pauli string".to_string());
        }
        Ok(Self { ops })
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &p in &self.ops {
            write!(f, "{}", p.to_char())?;
        }
        Ok(())
    }
}

/// One weighted term of a Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliTerm {
    pub coefficient: f64,
    pub string: PauliString,
}

/// A merged, validated sum of Pauli terms on a fixed qubit count.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    n_qubits: usize,
    terms: Vec<PauliTerm>,
}

impl Hamiltonian {
    /// Build from terms, merging duplicate Pauli strings by summing their
    /// coefficients (first-occurrence order is kept).
    pub fn from_terms(terms: Vec<PauliTerm>) -> Result<Self, HamiltonianError> {
        if terms.is_empty() {
            return Err(HamiltonianError::Empty);
        }
        let n_qubits = terms[0].string.len();
        let mut merged: Vec<PauliTerm> = Vec::with_capacity(terms.len());
        for term in terms {
            if term.string.len() != n_qubits {
                return Err(HamiltonianError::Parse {
                    line: 0,
                    msg: format!(
                        "inconsistent Pauli string length {} (expected {})",
                        term.string.len(),
                        n_qubits
                    ),
                });
            }
            if !term.coefficient.is_finite() {
                return Err(HamiltonianError::Parse {
                    line: 0,
                    msg: "non-finite coefficient".to_string(),
                });
            }
            match merged.iter_mut().find(|t| t.string == term.string) {
                Some(existing) => existing.coefficient += term.coefficient,
                None => merged.push(term),
            }
        }
        Ok(Self {
            n_qubits,
            terms: merged,
        })
    }

    /// Parse the text format: one `<coefficient> <pauli_string>` per line,
    /// `#` starts a comment, blank lines are ignored.
    pub fn parse_str(text: &str) -> Result<Self, HamiltonianError> {
        let mut terms = Vec::new();
        let mut expected_len: Option<usize> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let coeff_str = fields.next().unwrap();
            let string_str = fields.next().ok_or_else(|| HamiltonianError::Parse {
                line: line_no,
                msg: "expected `<coefficient> <pauli_string>`".to_string(),
            })?;
            if let Some(extra) = fields.next() {
                return Err(HamiltonianError::Parse {
                    line: line_no,
                    msg: format!("unexpected trailing field '{extra}'"),
                });
            }
            let coefficient: f64 =
                coeff_str.parse().map_err(|_| HamiltonianError::Parse {
                    line: line_no,
                    msg: format!("malformed coefficient '{coeff_str}'"),
                })?;
            if !coefficient.is_finite() {
                return Err(HamiltonianError::Parse {
                    line: line_no,
                    msg: format!("non-finite coefficient '{coeff_str}'"),
                });
            }
            let string =
                PauliString::from_str(string_str).map_err(|msg| HamiltonianError::Parse {
                    line: line_no,
                    msg,
                })?;
            match expected_len {
                None => expected_len = Some(string.len()),
                Some(n) if n != string.len() => {
                    return Err(HamiltonianError::Parse {
                        line: line_no,
                        msg: format!(
                            "Pauli string length {} does not match earlier length {}",
                            string.len(),
                            n
                        ),
                    });
                }
                _ => {}
            }
            terms.push(PauliTerm {
                coefficient,
                string,
            });
        }
        Self::from_terms(terms)
    }

    /// Read and parse a Hamiltonian file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, HamiltonianError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| HamiltonianError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse_str(&text)
    }

    /// Serialize back to the file format (full f64 precision).
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        for term in &self.terms {
            out.push_str(&format!("{:e} {}\n", term.coefficient, term.string));
        }
        out
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    /// Sum of coefficients of identity-only strings (constant energy offset).
    pub fn identity_offset(&self) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.string.is_identity())
            .map(|t| t.coefficient)
            .sum()
    }

    /// Dense Hermitian matrix `sum_k c_k P_k` of size `2^n x 2^n`.
    ///
    /// Each Pauli string is a signed permutation, so the matrix is filled in
    /// `O(terms * 2^n)` without forming Kronecker products.
    pub fn matrix(&self) -> Result<DMatrix<C64>, HamiltonianError> {
        if self.n_qubits > MAX_DENSE_QUBITS {
            return Err(HamiltonianError::TooLarge {
                n_qubits: self.n_qubits,
            });
        }
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::<C64>::zeros(dim, dim);
        let i_powers = [
            C64::new(1.0, 0.0),
            C64::new(0.0, 1.0),
            C64::new(-1.0, 0.0),
            C64::new(0.0, -1.0),
        ];
        for term in &self.terms {
            let (flip, phase, y_count) = term.string.masks();
            let base = i_powers[(y_count % 4) as usize] * term.coefficient;
            for col in 0..dim {
                let row = col ^ (flip as usize);
                let sign = if ((col as u64 & phase).count_ones() & 1) == 1 {
                    -1.0
                } else {
                    1.0
                };
                m[(row, col)] += base * sign;
            }
        }
        Ok(m)
    }

    /// Minimum eigenvalue of [`Self::matrix`], via Hermitian eigensolve.
    pub fn ground_energy_exact(&self) -> Result<f64, HamiltonianError> {
        let m = self.matrix()?;
        let eigenvalues = m.symmetric_eigen().eigenvalues;
        Ok(eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ham(text: &str) -> Hamiltonian {
        Hamiltonian::parse_str(text).unwrap()
    }

    #[test]
    fn parses_single_term() {
        let h = ham("1.0 ZI");
        assert_eq!(h.n_qubits(), 2);
        assert_eq!(h.terms().len(), 1);
        assert_eq!(h.terms()[0].coefficient, 1.0);
        assert_eq!(h.terms()[0].string.to_string(), "ZI");
    }

    #[test]
    fn merges_duplicate_strings() {
        let h = ham("0.5 XX\n0.5 XX");
        assert_eq!(h.terms().len(), 1);
        assert!((h.terms()[0].coefficient - 1.0).abs() < 1e-15);
    }

    #[test]
    fn handles_comments_blank_lines_and_scientific_notation() {
        let h = ham("# header\n\n  2.5e-1 XY  # trailing comment\n-1e0 ZZ\n");
        assert_eq!(h.terms().len(), 2);
        assert_eq!(h.terms()[0].coefficient, 0.25);
        assert_eq!(h.terms()[1].coefficient, -1.0);
    }

    #[test]
    fn parse_errors_name_the_line() {
        let err = Hamiltonian::parse_str("1.0 ZZ\noops XX").unwrap_err();
        assert!(matches!(err, HamiltonianError::Parse { line: 2, .. }), "{err}");
        let err = Hamiltonian::parse_str("1.0 ZZ\n1.0 ZZZ").unwrap_err();
        assert!(matches!(err, HamiltonianError::Parse { line: 2, .. }), "{err}");
        let err = Hamiltonian::parse_str("1.0 ZQ").unwrap_err();
        assert!(matches!(err, HamiltonianError::Parse { line: 1, .. }), "{err}");
        let err = Hamiltonian::parse_str("# nothing\n").unwrap_err();
        assert!(matches!(err, HamiltonianError::Empty));
    }

    #[test]
    fn single_qubit_matrices() {
        let z = ham("1.0 Z").matrix().unwrap();
        assert_eq!(z[(0, 0)].re, 1.0);
        assert_eq!(z[(1, 1)].re, -1.0);
        assert_eq!(z[(0, 1)].norm(), 0.0);

        let x = ham("1.0 X").matrix().unwrap();
        assert_eq!(x[(0, 1)].re, 1.0);
        assert_eq!(x[(1, 0)].re, 1.0);
        assert_eq!(x[(0, 0)].norm(), 0.0);

        let y = ham("1.0 Y").matrix().unwrap();
        assert_eq!(y[(1, 0)].im, 1.0);
        assert_eq!(y[(0, 1)].im, -1.0);
    }

    #[test]
    fn zz_matrix_is_tensor_of_diagonals() {
        let m = ham("0.5 ZZ").matrix().unwrap();
        let expected = [0.5, -0.5, -0.5, 0.5];
        for (i, &e) in expected.iter().enumerate() {
            assert!((m[(i, i)].re - e).abs() < 1e-15);
        }
    }

    #[test]
    fn qubit_zero_is_most_significant() {
        // ZI acts on qubit 0: diag(+1, +1, -1, -1) over indices 00,01,10,11.
        let m = ham("1.0 ZI").matrix().unwrap();
        assert_eq!(m[(0, 0)].re, 1.0);
        assert_eq!(m[(1, 1)].re, 1.0);
        assert_eq!(m[(2, 2)].re, -1.0);
        assert_eq!(m[(3, 3)].re, -1.0);
    }

    #[test]
    fn ground_energies_of_small_systems() {
        assert!((ham("1.0 Z").ground_energy_exact().unwrap() + 1.0).abs() < 1e-12);
        let h = ham("1.0 X\n1.0 Z");
        let e0 = h.ground_energy_exact().unwrap();
        assert!((e0 + 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn dense_guard_rejects_large_systems() {
        let s: String = std::iter::repeat('Z').take(13).collect();
        let h = ham(&format!("1.0 {s}"));
        assert!(matches!(
            h.ground_energy_exact(),
            Err(HamiltonianError::TooLarge { n_qubits: 13 })
        ));
    }

    fn random_hamiltonian(n_qubits: usize, n_terms: usize, seed: u64) -> Hamiltonian {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut terms = Vec::new();
        for _ in 0..n_terms {
            let ops = (0..n_qubits)
                .map(|_| match rng.gen_range(0..4) {
                    0 => Pauli::I,
                    1 => Pauli::X,
                    2 => Pauli::Y,
                    _ => Pauli::Z,
                })
                .collect();
            terms.push(PauliTerm {
                coefficient: rng.gen_range(-1.0..1.0),
                string: PauliString::new(ops),
            });
        }
        Hamiltonian::from_terms(terms).unwrap()
    }

    #[test]
    fn matrix_is_hermitian() {
        for seed in 0..5 {
            let h = random_hamiltonian(4, 8, seed);
            let m = h.matrix().unwrap();
            let diff = (&m - m.adjoint()).map(|c| c.norm()).max();
            assert!(diff < 1e-12, "max |M - M^H| = {diff}");
        }
    }

    #[test]
    fn variational_principle_holds_for_random_states() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let h = random_hamiltonian(3, 6, 1);
        let m = h.matrix().unwrap();
        let e0 = h.ground_energy_exact().unwrap();
        let dim = 1 << 3;
        for _ in 0..20 {
            let mut psi = nalgebra::DVector::<C64>::from_fn(dim, |_, _| {
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            psi /= C64::new(psi.norm(), 0.0);
            let rayleigh = (psi.adjoint() * &m * &psi)[(0, 0)].re;
            assert!(e0 <= rayleigh + 1e-10);
        }
    }

    proptest! {
        #[test]
        fn parse_serialize_roundtrip(coeffs in proptest::collection::vec(-10.0f64..10.0, 1..6), seed in 0u64..1000) {
            use rand::Rng;
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let text: String = coeffs
                .iter()
                .map(|c| {
                    let s: String = (0..3)
                        .map(|_| ['I', 'X', 'Y', 'Z'][rng.gen_range(0..4)])
                        .collect();
                    format!("{c} {s}\n")
                })
                .collect();
            let h = Hamiltonian::parse_str(&text).unwrap();
            let h2 = Hamiltonian::parse_str(&h.to_file_string()).unwrap();
            prop_assert_eq!(h, h2);
        }
    }
}
