//! Marginal-likelihood hyperparameter learning.
//!
//! Targets are standardized internally (zero mean, unit variance) before the
//! negative marginal log-likelihood is minimized over log-hyperparameters;
//! the selected values are mapped back to output units, so the returned
//! model predicts on the raw scale. The optimizer is multi-start Adam with
//! analytic gradients, projected into fixed log-space bounds, warm-started
//! from the previous optimum when one is supplied.

use super::kernel::{KernelKind, KernelParams};
use super::model::{chol_with_jitter, GpModel, PriorMean};
use super::GpError;
use crate::opt::{halton_points, Adam};
use nalgebra::{DMatrix, DVector};

/// Log-space box for `[ln sigma_k^2, ln rho_1.., ln sigma^2]`, in
/// standardized target units.
pub struct HyperBounds {
    pub signal_variance: (f64, f64),
    pub inv_sq_lengthscale: (f64, f64),
    pub noise_variance: (f64, f64),
}

pub const HYPER_BOUNDS: HyperBounds = HyperBounds {
    signal_variance: (1e-4, 1e4),
    inv_sq_lengthscale: (1e-3, 1e3),
    noise_variance: (1e-8, 1e1),
};

/// Controls the fit effort. The defaults trade accuracy against the cost of
/// refitting after every observation inside an optimization loop.
#[derive(Debug, Clone)]
pub struct FitConfig {
    /// Low-discrepancy restarts in addition to the default, heuristic, and
    /// warm starts.
    pub restarts: usize,
    /// Adam steps per restart.
    pub restart_steps: usize,
    /// Extra Adam steps from the best restart.
    pub polish_steps: usize,
    pub learning_rate: f64,
    /// Pin the observation noise variance (output units) instead of
    /// learning it.
    pub fixed_noise: Option<f64>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            restarts: 8,
            restart_steps: 25,
            polish_steps: 60,
            learning_rate: 0.08,
            fixed_noise: None,
        }
    }
}

struct NlmlProblem<'a> {
    inputs: &'a [Vec<f64>],
    targets: DVector<f64>,
    kind: KernelKind,
    dim: usize,
    fixed_noise: Option<f64>,
}

impl NlmlProblem<'_> {
    fn unpack(&self, u: &[f64]) -> (KernelParams, f64) {
        let kernel = KernelParams::new(
            self.kind,
            u[0].exp(),
            u[1..=self.dim].iter().map(|v| v.exp()).collect(),
        );
        let noise = self.fixed_noise.unwrap_or_else(|| u[self.dim + 1].exp());
        (kernel, noise)
    }

    /// NLML and its gradient with respect to the log-hyperparameters.
    /// Returns `None` when the covariance cannot be factorized.
    fn eval(&self, u: &[f64]) -> Option<(f64, Vec<f64>)> {
        let n = self.inputs.len();
        let (kernel, noise) = self.unpack(u);
        let mut kmat = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let k = kernel.eval(&self.inputs[i], &self.inputs[j]);
                kmat[(i, j)] = k;
                kmat[(j, i)] = k;
            }
        }
        let mut sigma = kmat.clone();
        for i in 0..n {
            sigma[(i, i)] += noise;
        }
        let (chol, _) = chol_with_jitter(&sigma, kernel.signal_variance).ok()?;
        let alpha = chol.solve(&self.targets);
        let log_det: f64 = chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum();
        let nlml = 0.5 * self.targets.dot(&alpha)
            + log_det
            + 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();
        if !nlml.is_finite() {
            return None;
        }

        // d NLML / d gamma = 1/2 tr((Sigma^-1 - alpha alpha^T) dSigma)
        let p = chol.inverse() - &alpha * alpha.transpose();
        let mut grad = vec![0.0; u.len()];
        for i in 0..n {
            // signal variance: dSigma/d ln sigma_k^2 = K
            grad[0] += 0.5 * p[(i, i)] * kmat[(i, i)];
            for j in 0..i {
                grad[0] += p[(i, j)] * kmat[(i, j)];
            }
        }
        let mut kbuf = vec![0.0; self.dim];
        for i in 0..n {
            for j in 0..i {
                kernel.eval_grad_log_rho(&self.inputs[i], &self.inputs[j], &mut kbuf);
                let w = p[(i, j)];
                for (g, &dk) in grad[1..=self.dim].iter_mut().zip(&kbuf) {
                    *g += w * dk;
                }
            }
        }
        if self.fixed_noise.is_none() {
            let trace_p: f64 = (0..n).map(|i| p[(i, i)]).sum();
            grad[self.dim + 1] = 0.5 * noise * trace_p;
        }
        Some((nlml, grad))
    }
}

fn clamp_to_bounds(u: &mut [f64], dim: usize, fixed_noise: bool) {
    let b = &HYPER_BOUNDS;
    u[0] = u[0].clamp(b.signal_variance.0.ln(), b.signal_variance.1.ln());
    for v in &mut u[1..=dim] {
        *v = v.clamp(b.inv_sq_lengthscale.0.ln(), b.inv_sq_lengthscale.1.ln());
    }
    if !fixed_noise {
        u[dim + 1] = u[dim + 1].clamp(b.noise_variance.0.ln(), b.noise_variance.1.ln());
    }
}

fn adam_minimize(
    problem: &NlmlProblem,
    start: Vec<f64>,
    steps: usize,
    lr: f64,
) -> Option<(f64, Vec<f64>)> {
    let dim = problem.dim;
    let fixed = problem.fixed_noise.is_some();
    let mut u = start;
    clamp_to_bounds(&mut u, dim, fixed);
    let (mut best_val, _) = problem.eval(&u)?;
    let mut best_u = u.clone();
    let mut adam = Adam::new(u.len(), lr);
    for _ in 0..steps {
        let Some((val, mut grad)) = problem.eval(&u) else {
            break;
        };
        if val < best_val {
            best_val = val;
            best_u = u.clone();
        }
        if fixed {
            grad[dim + 1] = 0.0;
        }
        adam.step(&mut u, &grad);
        clamp_to_bounds(&mut u, dim, fixed);
    }
    if let Some((val, _)) = problem.eval(&u) {
        if val < best_val {
            best_val = val;
            best_u = u;
        }
    }
    Some((best_val, best_u))
}

/// Median of per-dimension squared coordinate differences, for the
/// inverse-median length-scale heuristic start. Capped at 4000 sampled
/// pairs so large training sets stay cheap.
fn median_sq_diff(inputs: &[Vec<f64>], dim: usize) -> Vec<f64> {
    let n = inputs.len();
    let stride = (n * (n - 1) / 2 / 4000).max(1);
    (0..dim)
        .map(|k| {
            let mut diffs: Vec<f64> = (0..n)
                .flat_map(|i| (0..i).map(move |j| (i, j)))
                .step_by(stride)
                .map(|(i, j)| (inputs[i][k] - inputs[j][k]).powi(2))
                .filter(|d| *d > 0.0)
                .collect();
            if diffs.is_empty() {
                return 1.0;
            }
            diffs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            diffs[diffs.len() / 2]
        })
        .collect()
}

impl GpModel {
    /// Learn hyperparameters on `(inputs, outputs)` under the given prior
    /// mean and kernel family, and return the conditioned model.
    ///
    /// With fewer than two observations the defaults are kept (unit signal
    /// variance and length scales, noise 1e-4, standardized units).
    pub fn fit(
        inputs: Vec<Vec<f64>>,
        outputs: Vec<f64>,
        prior_mean: PriorMean,
        kind: KernelKind,
        dim: usize,
        config: &FitConfig,
        warm_start: Option<(&KernelParams, f64)>,
    ) -> Result<Self, GpError> {
        if inputs.len() != outputs.len() {
            return Err(GpError::LengthMismatch {
                inputs: inputs.len(),
                outputs: outputs.len(),
            });
        }
        let n = inputs.len();
        let resid: Vec<f64> = inputs
            .iter()
            .zip(&outputs)
            .map(|(x, y)| y - prior_mean.eval(x))
            .collect();
        let mean_r = if n == 0 {
            0.0
        } else {
            resid.iter().sum::<f64>() / n as f64
        };
        let var_r = if n == 0 {
            0.0
        } else {
            resid.iter().map(|r| (r - mean_r).powi(2)).sum::<f64>() / n as f64
        };
        let std_r = if var_r.sqrt() > 1e-12 { var_r.sqrt() } else { 1.0 };

        if n < 2 {
            let mut kernel = KernelParams::default_for(kind, dim);
            kernel.signal_variance = std_r * std_r;
            let noise = config.fixed_noise.unwrap_or(1e-4 * std_r * std_r);
            return Self::with_params_offset(inputs, outputs, prior_mean, mean_r, kernel, noise);
        }

        let targets = DVector::from_fn(n, |i, _| (resid[i] - mean_r) / std_r);
        let problem = NlmlProblem {
            inputs: &inputs,
            targets,
            kind,
            dim,
            fixed_noise: config.fixed_noise.map(|v| v / (std_r * std_r)),
        };
        let b = &HYPER_BOUNDS;
        let mut starts: Vec<Vec<f64>> = Vec::new();
        // default point: dimension-aware length scales (see
        // `KernelParams::default_for`)
        let mut default = vec![0.0; dim + 2];
        for v in default[1..=dim].iter_mut() {
            *v = (1.0 / dim as f64).ln();
        }
        default[dim + 1] = (1e-4f64).ln();
        starts.push(default);
        // inverse-median heuristic, normalized so the total weighted
        // distance at the median separation is O(1)
        let med = median_sq_diff(&inputs, dim);
        let mut heuristic = vec![0.0; dim + 2];
        for (i, m) in med.iter().enumerate() {
            heuristic[1 + i] = (1.0 / (m * dim as f64)).ln();
        }
        heuristic[dim + 1] = (1e-2f64).ln();
        starts.push(heuristic);
        if let Some((kernel, noise)) = warm_start {
            let mut u = vec![0.0; dim + 2];
            u[0] = (kernel.signal_variance / (std_r * std_r)).max(1e-300).ln();
            for (i, &rho) in kernel.inv_sq_lengthscales.iter().enumerate() {
                u[1 + i] = rho.max(1e-300).ln();
            }
            u[dim + 1] = (noise / (std_r * std_r)).max(1e-300).ln();
            starts.push(u);
        }
        for point in halton_points(config.restarts, dim + 2, None) {
            let mut u = vec![0.0; dim + 2];
            u[0] = b.signal_variance.0.ln()
                + point[0] * (b.signal_variance.1.ln() - b.signal_variance.0.ln());
            for i in 0..dim {
                u[1 + i] = b.inv_sq_lengthscale.0.ln()
                    + point[1 + i] * (b.inv_sq_lengthscale.1.ln() - b.inv_sq_lengthscale.0.ln());
            }
            u[dim + 1] = b.noise_variance.0.ln()
                + point[dim + 1] * (b.noise_variance.1.ln() - b.noise_variance.0.ln());
            starts.push(u);
        }

        let mut best: Option<(f64, Vec<f64>)> = None;
        for start in starts {
            if let Some((val, u)) = adam_minimize(&problem, start, config.restart_steps, config.learning_rate)
            {
                match &best {
                    Some((bv, _)) if *bv <= val => {}
                    _ => best = Some((val, u)),
                }
            }
        }
        let (_, u) = best.ok_or_else(|| {
            GpError::FitFailed("no restart produced a positive-definite covariance".into())
        })?;
        let (_, u) = adam_minimize(&problem, u, config.polish_steps, config.learning_rate * 0.4)
            .expect("polish from a feasible point");

        let (kernel_std, noise_std) = problem.unpack(&u);
        let kernel = KernelParams::new(
            kind,
            kernel_std.signal_variance * std_r * std_r,
            kernel_std.inv_sq_lengthscales,
        );
        let noise = noise_std * std_r * std_r;
        Self::with_params_offset(inputs, outputs, prior_mean, mean_r, kernel, noise)
    }
}
