//! Parity analysis: noisy observations against exact re-evaluations.

use super::ExperimentError;
use crate::hamiltonian::Hamiltonian;
use crate::record::RunRecord;
use crate::sim::{expectation_exact, Ansatz};

/// One observation paired with its exact energy.
#[derive(Debug, Clone, PartialEq)]
pub struct ParityRow {
    /// `arm:seed:iteration`
    pub id: String,
    pub exact_energy: f64,
    pub noisy_energy: f64,
    /// `noisy - exact`
    pub error: f64,
}

/// Equal-width histogram summary (`edges.len() == counts.len() + 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn from_values(values: &[f64], bins: usize) -> Self {
        assert!(!values.is_empty() && bins >= 1);
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if max <= min {
            // degenerate spread: a single bin holds everything
            return Self {
                edges: vec![min, min],
                counts: vec![values.len() as u64],
            };
        }
        let width = (max - min) / bins as f64;
        let edges: Vec<f64> = (0..=bins).map(|i| min + i as f64 * width).collect();
        let mut counts = vec![0u64; bins];
        for &v in values {
            let mut idx = ((v - min) / width) as usize;
            if idx >= bins {
                idx = bins - 1;
            }
            counts[idx] += 1;
        }
        Self { edges, counts }
    }

    pub fn sample_std(&self, values: &[f64]) -> f64 {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    }
}

/// Ordinary least squares `y = slope * x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Re-evaluate every observation in the records exactly and pair it with
/// the recorded (noisy) energy.
pub fn emit_parity_data(
    records: &[RunRecord],
    hamiltonian: &Hamiltonian,
    ansatz: &Ansatz,
) -> Result<(Vec<ParityRow>, Histogram), ExperimentError> {
    let expected = ansatz.param_count();
    let mut rows = Vec::new();
    for record in records {
        for row in &record.rows {
            if row.theta.len() != expected {
                return Err(ExperimentError::DimensionMismatch {
                    expected,
                    got: row.theta.len(),
                });
            }
            let exact = expectation_exact(ansatz.circuit(), &row.theta, hamiltonian)?;
            rows.push(ParityRow {
                id: format!("{}:{}:{}", record.arm, record.seed, row.iteration),
                exact_energy: exact,
                noisy_energy: row.observed_energy,
                error: row.observed_energy - exact,
            });
        }
    }
    if rows.is_empty() {
        return Err(ExperimentError::Data(
            "no observations to pair for the parity analysis".to_string(),
        ));
    }
    let errors: Vec<f64> = rows.iter().map(|r| r.error).collect();
    let hist = Histogram::from_values(&errors, 30);
    Ok((rows, hist))
}

pub fn parity_csv(rows: &[ParityRow]) -> String {
    let mut out = String::from("# schema: bopt-parity-v1\n");
    out.push_str("theta_id,exact_energy,noisy_energy,error\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.id, r.exact_energy, r.noisy_energy, r.error
        ));
    }
    out
}

pub fn histogram_csv(hist: &Histogram) -> String {
    let mut out = String::from("# schema: bopt-parity-hist-v1\n");
    out.push_str("bin_lo,bin_hi,count\n");
    for (i, &count) in hist.counts.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{}\n",
            hist.edges[i],
            hist.edges[i + 1],
            count
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record::IterationRow;
    use crate::rng::{stream, StreamId};
    use crate::sim::{evaluate_energy, HardwareModel, NoiseModel};
    use rand::Rng;

    fn h2() -> Hamiltonian {
        let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("../../data/h2_sto3g_jw.ham");
        Hamiltonian::load(path).unwrap()
    }

    fn noisy_record(noise: &NoiseModel, n: usize, seed: u64) -> (RunRecord, Ansatz, Hamiltonian) {
        let hamiltonian = h2();
        let ansatz = Ansatz::hea(4, 1, "1100").unwrap();
        let mut rng = stream(seed, StreamId::Objective);
        let mut theta_rng = stream(seed, StreamId::Custom(4));
        let mut rows = Vec::new();
        let mut best = f64::INFINITY;
        for i in 0..n {
            let theta: Vec<f64> = (0..4)
                .map(|_| theta_rng.gen_range(0.0..std::f64::consts::TAU))
                .collect();
            let y = evaluate_energy(ansatz.circuit(), &theta, &hamiltonian, 100, noise, &mut rng)
                .unwrap();
            best = best.min(y);
            rows.push(IterationRow {
                iteration: i + 1,
                cumulative_cost: (i + 1) as f64,
                theta,
                observed_energy: y,
                best_observed: best,
                incumbent_eta: None,
            });
        }
        (
            RunRecord {
                arm: "bopt".into(),
                seed,
                rows,
            },
            ansatz,
            hamiltonian,
        )
    }

    #[test]
    fn zero_noise_gives_zero_errors_and_a_single_bin() {
        let (record, ansatz, hamiltonian) = noisy_record(&NoiseModel::exact(), 8, 1);
        let (rows, hist) = emit_parity_data(&[record], &hamiltonian, &ansatz).unwrap();
        for r in &rows {
            assert!(r.error.abs() < 1e-12);
        }
        assert_eq!(hist.counts.len(), 1);
        assert_eq!(hist.counts[0], 8);
    }

    #[test]
    fn affine_bias_is_recovered_by_least_squares() {
        let noise = NoiseModel::exact().with_hardware(HardwareModel {
            bias_slope: 0.15,
            bias_zero: -0.2,
            sigma: 0.0,
        });
        let (record, ansatz, hamiltonian) = noisy_record(&noise, 40, 2);
        let (rows, _) = emit_parity_data(&[record], &hamiltonian, &ansatz).unwrap();
        let xs: Vec<f64> = rows.iter().map(|r| r.exact_energy).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.error).collect();
        let (slope, intercept) = linear_fit(&xs, &ys);
        assert!((slope - 0.15).abs() < 1e-6, "slope {slope}");
        let zero_crossing = -intercept / slope;
        assert!((zero_crossing - (-0.2)).abs() < 1e-6, "crossing {zero_crossing}");
    }

    #[test]
    fn histogram_spread_matches_the_injected_sigma() {
        let noise = NoiseModel::exact().with_hardware(HardwareModel {
            bias_slope: 0.0,
            bias_zero: 0.0,
            sigma: 0.01,
        });
        let (record, ansatz, hamiltonian) = noisy_record(&noise, 600, 3);
        let (rows, hist) = emit_parity_data(&[record], &hamiltonian, &ansatz).unwrap();
        let errors: Vec<f64> = rows.iter().map(|r| r.error).collect();
        let std = hist.sample_std(&errors);
        assert!((std - 0.01).abs() < 0.15 * 0.01, "std {std}");
    }

    #[test]
    fn csv_emission_is_stable() {
        let (record, ansatz, hamiltonian) = noisy_record(&NoiseModel::exact(), 3, 4);
        let (rows, hist) = emit_parity_data(&[record], &hamiltonian, &ansatz).unwrap();
        let a = parity_csv(&rows);
        let b = parity_csv(&rows);
        assert_eq!(a, b);
        assert!(a.starts_with("# schema: bopt-parity-v1\n"));
        assert!(histogram_csv(&hist).contains("bin_lo,bin_hi,count"));
    }
}
