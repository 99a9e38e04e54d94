//! Posterior inference for a fixed set of hyperparameters.

use super::kernel::KernelParams;
use super::GpError;
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use std::fmt;
use std::sync::Arc;

/// Prior mean function `mu_0(theta)`.
#[derive(Clone)]
pub enum PriorMean {
    Zero,
    Function(Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>),
}

impl PriorMean {
    pub fn eval(&self, theta: &[f64]) -> f64 {
        match self {
            PriorMean::Zero => 0.0,
            PriorMean::Function(f) => f(theta),
        }
    }

    /// Central-difference gradient; exact (zero) for the zero mean.
    pub fn eval_grad(&self, theta: &[f64], grad: &mut [f64]) -> f64 {
        match self {
            PriorMean::Zero => {
                grad.fill(0.0);
                0.0
            }
            PriorMean::Function(f) => {
                let h = 1e-6;
                let mut probe = theta.to_vec();
                for i in 0..theta.len() {
                    probe[i] = theta[i] + h;
                    let up = f(&probe);
                    probe[i] = theta[i] - h;
                    let down = f(&probe);
                    probe[i] = theta[i];
                    grad[i] = (up - down) / (2.0 * h);
                }
                f(theta)
            }
        }
    }
}

impl fmt::Debug for PriorMean {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PriorMean::Zero => write!(f, "PriorMean::Zero"),
            PriorMean::Function(_) => write!(f, "PriorMean::Function(..)"),
        }
    }
}

/// Mean, variance, and their gradients at a query point.
#[derive(Debug, Clone)]
pub struct PosteriorEval {
    pub mean: f64,
    pub variance: f64,
    pub mean_grad: Vec<f64>,
    pub variance_grad: Vec<f64>,
}

/// A GP conditioned on `n` observations, with a cached Cholesky factor of
/// `K + sigma^2 I`. Immutable once constructed; queries are read-only.
#[derive(Debug, Clone)]
pub struct GpModel {
    inputs: Vec<Vec<f64>>,
    outputs: Vec<f64>,
    prior_mean: PriorMean,
    /// Constant shift added to the prior mean (captures the training-target
    /// centering performed by `fit`).
    mean_offset: f64,
    kernel: KernelParams,
    noise_variance: f64,
    chol: Option<Cholesky<f64, Dyn>>,
    alpha: DVector<f64>,
    jitter: f64,
}

/// Cholesky of `sigma` after escalating jitter from 1e-10 by factors of 10
/// up to `1e-6 * signal_variance`.
pub(super) fn chol_with_jitter(
    sigma: &DMatrix<f64>,
    signal_variance: f64,
) -> Result<(Cholesky<f64, Dyn>, f64), GpError> {
    if let Some(c) = Cholesky::new(sigma.clone()) {
        return Ok((c, 0.0));
    }
    let cap = 1e-6 * signal_variance;
    let mut jitter = 1e-10;
    while jitter <= cap {
        let mut m = sigma.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += jitter;
        }
        if let Some(c) = Cholesky::new(m) {
            return Ok((c, jitter));
        }
        jitter *= 10.0;
    }
    Err(GpError::NotPositiveDefinite { max_jitter: cap })
}

impl GpModel {
    /// Condition on data with the given hyperparameters, as-is (no target
    /// standardization, no hyperparameter learning).
    pub fn with_params(
        inputs: Vec<Vec<f64>>,
        outputs: Vec<f64>,
        prior_mean: PriorMean,
        kernel: KernelParams,
        noise_variance: f64,
    ) -> Result<Self, GpError> {
        Self::with_params_offset(inputs, outputs, prior_mean, 0.0, kernel, noise_variance)
    }

    pub(super) fn with_params_offset(
        inputs: Vec<Vec<f64>>,
        outputs: Vec<f64>,
        prior_mean: PriorMean,
        mean_offset: f64,
        kernel: KernelParams,
        noise_variance: f64,
    ) -> Result<Self, GpError> {
        if inputs.len() != outputs.len() {
            return Err(GpError::LengthMismatch {
                inputs: inputs.len(),
                outputs: outputs.len(),
            });
        }
        for x in &inputs {
            if x.len() != kernel.dim() {
                return Err(GpError::DimMismatch {
                    expected: kernel.dim(),
                    got: x.len(),
                });
            }
        }
        let n = inputs.len();
        if n == 0 {
            return Ok(Self {
                inputs,
                outputs,
                prior_mean,
                mean_offset,
                kernel,
                noise_variance,
                chol: None,
                alpha: DVector::zeros(0),
                jitter: 0.0,
            });
        }
        let mut sigma = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let k = kernel.eval(&inputs[i], &inputs[j]);
                sigma[(i, j)] = k;
                sigma[(j, i)] = k;
            }
            sigma[(i, i)] += noise_variance;
        }
        let (chol, jitter) = chol_with_jitter(&sigma, kernel.signal_variance)?;
        let resid = DVector::from_fn(n, |i, _| {
            outputs[i] - prior_mean.eval(&inputs[i]) - mean_offset
        });
        let alpha = chol.solve(&resid);
        Ok(Self {
            inputs,
            outputs,
            prior_mean,
            mean_offset,
            kernel,
            noise_variance,
            chol: Some(chol),
            alpha,
            jitter,
        })
    }

    pub fn n(&self) -> usize {
        self.inputs.len()
    }

    pub fn dim(&self) -> usize {
        self.kernel.dim()
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[f64] {
        &self.outputs
    }

    pub fn kernel(&self) -> &KernelParams {
        &self.kernel
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn prior_mean(&self) -> &PriorMean {
        &self.prior_mean
    }

    pub fn mean_offset(&self) -> f64 {
        self.mean_offset
    }

    /// Diagonal jitter that was added to factorize the covariance.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    fn kvec(&self, theta: &[f64]) -> DVector<f64> {
        DVector::from_fn(self.n(), |i, _| self.kernel.eval(theta, &self.inputs[i]))
    }

    /// Posterior `(mean, variance)` at a test point. With no observations
    /// this is the prior `(mu_0 + offset, signal_variance)`.
    pub fn posterior(&self, theta: &[f64]) -> (f64, f64) {
        let prior = self.prior_mean.eval(theta) + self.mean_offset;
        let k_diag = self.kernel.eval(theta, theta);
        match &self.chol {
            None => (prior, k_diag),
            Some(chol) => {
                let kv = self.kvec(theta);
                let mean = prior + kv.dot(&self.alpha);
                let w = chol.solve(&kv);
                let variance = (k_diag - kv.dot(&w)).max(0.0);
                (mean, variance)
            }
        }
    }

    /// Posterior mean/variance plus their gradients with respect to theta.
    pub fn posterior_with_grad(&self, theta: &[f64]) -> PosteriorEval {
        let d = self.dim();
        let mut mean_grad = vec![0.0; d];
        let prior = self.prior_mean.eval_grad(theta, &mut mean_grad) + self.mean_offset;
        let k_diag = self.kernel.eval(theta, theta);
        match &self.chol {
            None => PosteriorEval {
                mean: prior,
                variance: k_diag,
                mean_grad,
                variance_grad: vec![0.0; d],
            },
            Some(chol) => {
                let n = self.n();
                let mut kv = DVector::zeros(n);
                let mut kgrads = vec![0.0; n * d];
                let mut buf = vec![0.0; d];
                for i in 0..n {
                    kv[i] = self
                        .kernel
                        .eval_grad_input(theta, &self.inputs[i], &mut buf);
                    kgrads[i * d..(i + 1) * d].copy_from_slice(&buf);
                }
                let w = chol.solve(&kv);
                let mean = prior + kv.dot(&self.alpha);
                let variance = (k_diag - kv.dot(&w)).max(0.0);
                let mut variance_grad = vec![0.0; d];
                for i in 0..n {
                    let g = &kgrads[i * d..(i + 1) * d];
                    for j in 0..d {
                        mean_grad[j] += g[j] * self.alpha[i];
                        variance_grad[j] -= 2.0 * g[j] * w[i];
                    }
                }
                PosteriorEval {
                    mean,
                    variance,
                    mean_grad,
                    variance_grad,
                }
            }
        }
    }

    /// Negative marginal log-likelihood at the model's own hyperparameters:
    /// `1/2 r^T S^{-1} r + 1/2 log|S| + n/2 log(2 pi)` with
    /// `S = K + sigma^2 I` and `r` the prior-mean-subtracted targets.
    pub fn nlml(&self) -> Result<f64, GpError> {
        let chol = self.chol.as_ref().ok_or(GpError::Unfitted)?;
        let n = self.n() as f64;
        let resid = DVector::from_fn(self.n(), |i, _| {
            self.outputs[i] - self.prior_mean.eval(&self.inputs[i]) - self.mean_offset
        });
        let data_fit = 0.5 * resid.dot(&self.alpha);
        let log_det: f64 = chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum();
        Ok(data_fit + log_det + 0.5 * n * (2.0 * std::f64::consts::PI).ln())
    }

    /// NLML of this model's data under different hyperparameters.
    pub fn nlml_at(&self, kernel: &KernelParams, noise_variance: f64) -> Result<f64, GpError> {
        let probe = GpModel::with_params_offset(
            self.inputs.clone(),
            self.outputs.clone(),
            self.prior_mean.clone(),
            self.mean_offset,
            kernel.clone(),
            noise_variance,
        )?;
        probe.nlml()
    }
}
