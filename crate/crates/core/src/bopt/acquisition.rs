//! Acquisition functions and their optimization over the periodic box.

use super::gptp::GpTpModel;
use crate::opt::{gradient_descent, halton_points, scale_points, DescentOptions};
use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::function::erf::erfc;
use std::f64::consts::TAU;

/// Which acquisition drives the loop. All three are expressed in
/// minimization sense internally (EI variants are negated).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum AcquisitionKind {
    /// Lower confidence bound `mu - sqrt(beta) sigma`, minimized.
    Lcb { beta: f64 },
    /// Analytic expected improvement against the best posterior mean.
    Ei,
    /// Monte-Carlo expected improvement over joint posterior samples,
    /// robust to observation noise.
    NoisyEi { mc_samples: usize },
}

impl Default for AcquisitionKind {
    fn default() -> Self {
        AcquisitionKind::Lcb { beta: 4.0 }
    }
}

/// Standard normal CDF.
fn phi_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Standard normal PDF.
fn phi_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `mu(theta) - sqrt(beta) sigma(theta)`.
pub fn acq_lcb(model: &GpTpModel, theta: &[f64], beta: f64) -> f64 {
    let (mean, var) = model.posterior(theta);
    mean - beta.sqrt() * var.max(0.0).sqrt()
}

/// Analytic EI for minimization: `sigma (z Phi(z) + phi(z))` with
/// `z = (eta - mu)/sigma`, degrading to `max(eta - mu, 0)` as sigma -> 0.
pub fn acq_ei(model: &GpTpModel, theta: &[f64], eta: f64) -> f64 {
    let (mean, var) = model.posterior(theta);
    ei_value(mean, var.max(0.0).sqrt(), eta)
}

fn ei_value(mean: f64, sigma: f64, eta: f64) -> f64 {
    if sigma < 1e-12 {
        return (eta - mean).max(0.0);
    }
    let z = (eta - mean) / sigma;
    sigma * (z * phi_cdf(z) + phi_pdf(z))
}

/// d EI / d mu and d EI / d sigma.
fn ei_grad(mean: f64, sigma: f64, eta: f64) -> (f64, f64) {
    if sigma < 1e-12 {
        return (if eta > mean { -1.0 } else { 0.0 }, 0.0);
    }
    let z = (eta - mean) / sigma;
    (-phi_cdf(z), phi_pdf(z))
}

/// Precomputed state for the Monte-Carlo noisy-EI landscape of one
/// iteration: a joint posterior factorization over the observed inputs plus
/// fixed base draws, so the acquisition surface is deterministic and can be
/// optimized with multi-start refinement.
pub struct NoisyEiState {
    mc_samples: usize,
    /// Cholesky of the posterior covariance at the observed inputs.
    l_obs: DMatrix<f64>,
    /// `Sigma^{-1} = (K + sigma^2 I)^{-1}` of the residual GP.
    sigma_inv: DMatrix<f64>,
    k_obs: DMatrix<f64>,
    /// Base draws: `mc x (n+1)` standard normals.
    z_obs: DMatrix<f64>,
    z_tail: DVector<f64>,
    /// Per-sample minimum over the sampled observed values.
    sample_mins: DVector<f64>,
}

impl NoisyEiState {
    /// Draw `mc_samples` base samples and factorize the joint posterior at
    /// the model's observed inputs. The model must hold at least one
    /// observation.
    pub fn prepare(model: &GpTpModel, mc_samples: usize, rng: &mut impl Rng) -> Self {
        let gp = model.residual_gp();
        let inputs = gp.inputs();
        let n = inputs.len();
        assert!(n >= 1, "noisy EI needs at least one observation");
        let kernel = gp.kernel();
        let mut k_obs = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                k_obs[(i, j)] = kernel.eval(&inputs[i], &inputs[j]);
            }
        }
        let mut sigma = k_obs.clone();
        for i in 0..n {
            sigma[(i, i)] += gp.noise_variance();
        }
        let sigma_inv = Cholesky::new(sigma.clone())
            .or_else(|| {
                let mut s = sigma.clone();
                for i in 0..n {
                    s[(i, i)] += 1e-10;
                }
                Cholesky::new(s)
            })
            .expect("residual covariance factorizes")
            .inverse();
        // posterior covariance at the observed inputs
        let c_obs = &k_obs - &k_obs * &sigma_inv * &k_obs;
        let l_obs = chol_with_escalation(&c_obs, kernel.signal_variance);

        let z_obs = DMatrix::from_fn(mc_samples, n, |_, _| StandardNormal.sample(rng));
        let z_tail = DVector::from_fn(mc_samples, |_, _| StandardNormal.sample(rng));
        let means: Vec<f64> = inputs.iter().map(|x| model.posterior(x).0).collect();
        let mut sample_mins = DVector::zeros(mc_samples);
        for s in 0..mc_samples {
            let mut min = f64::INFINITY;
            for i in 0..n {
                let mut f = means[i];
                for j in 0..n {
                    f += l_obs[(i, j)] * z_obs[(s, j)];
                }
                min = min.min(f);
            }
            sample_mins[s] = min;
        }
        Self {
            mc_samples,
            l_obs,
            sigma_inv,
            k_obs,
            z_obs,
            z_tail,
            sample_mins,
        }
    }

    /// Average improvement `max(min_observed_sample - f(theta), 0)` over the
    /// fixed base draws.
    pub fn value(&self, model: &GpTpModel, theta: &[f64]) -> f64 {
        let gp = model.residual_gp();
        let inputs = gp.inputs();
        let n = inputs.len();
        let kernel = gp.kernel();
        let kv = DVector::from_fn(n, |i, _| kernel.eval(theta, &inputs[i]));
        let w = &self.sigma_inv * &kv;
        // cross-covariance and conditional scale
        let c_cross = &kv - &self.k_obs * &w;
        let b = self
            .l_obs
            .solve_lower_triangular(&c_cross)
            .expect("triangular solve");
        let c_self = kernel.eval(theta, theta) - kv.dot(&w);
        let s = (c_self - b.norm_squared()).max(0.0).sqrt();
        let (mean, _) = model.posterior(theta);
        let mut acc = 0.0;
        for j in 0..self.mc_samples {
            let mut f = mean + s * self.z_tail[j];
            for i in 0..n {
                f += b[i] * self.z_obs[(j, i)];
            }
            acc += (self.sample_mins[j] - f).max(0.0);
        }
        acc / self.mc_samples as f64
    }
}

fn chol_with_escalation(m: &DMatrix<f64>, scale: f64) -> DMatrix<f64> {
    let n = m.nrows();
    let mut jitter = 1e-12 * scale.max(1e-12);
    loop {
        let mut probe = m.clone();
        for i in 0..n {
            probe[(i, i)] += jitter;
        }
        if let Some(c) = Cholesky::new(probe) {
            let l: DMatrix<f64> = c.l();
            return l;
        }
        jitter *= 10.0;
        assert!(
            jitter < 1e6 * scale.max(1e-12),
            "posterior covariance cannot be factorized"
        );
    }
}

/// Best posterior-mean value and its location.
#[derive(Debug, Clone, PartialEq)]
pub struct Incumbent {
    pub eta: f64,
    pub theta: Vec<f64>,
}

/// Options for the multi-start acquisition optimizer.
#[derive(Debug, Clone)]
pub struct AcqOptOptions {
    pub n_starts: usize,
    pub max_steps: usize,
    pub tol: f64,
}

impl Default for AcqOptOptions {
    fn default() -> Self {
        Self {
            n_starts: 32,
            max_steps: 200,
            tol: 1e-6,
        }
    }
}

/// An acquisition with its per-iteration state, exposed to the optimizer as
/// a minimization score with gradients.
pub enum PreparedAcquisition {
    Lcb { beta: f64 },
    Ei { eta: f64 },
    NoisyEi { state: NoisyEiState },
}

impl PreparedAcquisition {
    /// Score in minimization sense (EI variants negated).
    pub fn score(&self, model: &GpTpModel, theta: &[f64]) -> f64 {
        match self {
            PreparedAcquisition::Lcb { beta } => acq_lcb(model, theta, *beta),
            PreparedAcquisition::Ei { eta } => -acq_ei(model, theta, *eta),
            PreparedAcquisition::NoisyEi { state } => -state.value(model, theta),
        }
    }

    fn score_with_grad(&self, model: &GpTpModel, theta: &[f64]) -> (f64, Vec<f64>) {
        match self {
            PreparedAcquisition::Lcb { beta } => {
                let eval = model.posterior_with_grad(theta);
                let sigma = eval.variance.max(0.0).sqrt();
                let sqrt_beta = beta.sqrt();
                let value = eval.mean - sqrt_beta * sigma;
                let grad = if sigma < 1e-12 {
                    eval.mean_grad
                } else {
                    eval.mean_grad
                        .iter()
                        .zip(&eval.variance_grad)
                        .map(|(m, v)| m - sqrt_beta * v / (2.0 * sigma))
                        .collect()
                };
                (value, grad)
            }
            PreparedAcquisition::Ei { eta } => {
                let eval = model.posterior_with_grad(theta);
                let sigma = eval.variance.max(0.0).sqrt();
                let value = ei_value(eval.mean, sigma, *eta);
                let (d_mu, d_sigma) = ei_grad(eval.mean, sigma, *eta);
                let grad: Vec<f64> = if sigma < 1e-12 {
                    eval.mean_grad.iter().map(|m| -(d_mu * m)).collect()
                } else {
                    eval.mean_grad
                        .iter()
                        .zip(&eval.variance_grad)
                        .map(|(m, v)| -(d_mu * m + d_sigma * v / (2.0 * sigma)))
                        .collect()
                };
                (-value, grad)
            }
            PreparedAcquisition::NoisyEi { state } => {
                // deterministic surface; central finite differences
                let value = -state.value(model, theta);
                let h = 1e-5;
                let mut probe = theta.to_vec();
                let mut grad = vec![0.0; theta.len()];
                for i in 0..theta.len() {
                    probe[i] = theta[i] + h;
                    let up = -state.value(model, &probe);
                    probe[i] = theta[i] - h;
                    let down = -state.value(model, &probe);
                    probe[i] = theta[i];
                    grad[i] = (up - down) / (2.0 * h);
                }
                (value, grad)
            }
        }
    }
}

/// Multi-start local refinement over `[0, 2*pi)^d`: low-discrepancy starts
/// (rotated by an rng draw) plus the five best observed points, each refined
/// by wrapped gradient descent; ties break toward the lowest start index.
pub fn optimize_acquisition(
    model: &GpTpModel,
    prepared: &PreparedAcquisition,
    observed: &[(Vec<f64>, f64)],
    options: &AcqOptOptions,
    rng: &mut impl Rng,
) -> Vec<f64> {
    let dim = model.dim();
    let shift: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
    let mut starts = halton_points(options.n_starts, dim, Some(&shift));
    scale_points(&mut starts, 0.0, TAU);
    let mut ranked: Vec<&(Vec<f64>, f64)> = observed.iter().collect();
    ranked.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    for (theta, _) in ranked.into_iter().take(5) {
        starts.push(theta.clone());
    }
    let opts = DescentOptions {
        max_steps: options.max_steps,
        tol: options.tol,
        initial_step: 0.3,
        wrap: Some(TAU),
    };
    let f = |theta: &[f64]| prepared.score_with_grad(model, theta);
    let mut best: Option<(Vec<f64>, f64)> = None;
    for start in &starts {
        let (theta, value) = gradient_descent(f, start, &opts);
        match &best {
            Some((_, bv)) if *bv <= value => {}
            _ => best = Some((theta, value)),
        }
    }
    best.expect("at least one start").0
}

/// Minimize the posterior mean with the same multi-start scheme.
pub fn incumbent_eta(
    model: &GpTpModel,
    observed: &[(Vec<f64>, f64)],
    options: &AcqOptOptions,
    rng: &mut impl Rng,
) -> Incumbent {
    let dim = model.dim();
    let shift: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
    let mut starts = halton_points(options.n_starts, dim, Some(&shift));
    scale_points(&mut starts, 0.0, TAU);
    let mut ranked: Vec<&(Vec<f64>, f64)> = observed.iter().collect();
    ranked.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    for (theta, _) in ranked.into_iter().take(5) {
        starts.push(theta.clone());
    }
    let opts = DescentOptions {
        max_steps: options.max_steps,
        tol: options.tol,
        initial_step: 0.3,
        wrap: Some(TAU),
    };
    let f = |theta: &[f64]| {
        let eval = model.posterior_with_grad(theta);
        (eval.mean, eval.mean_grad)
    };
    let mut best: Option<(Vec<f64>, f64)> = None;
    for start in &starts {
        let (theta, value) = gradient_descent(f, start, &opts);
        match &best {
            Some((_, bv)) if *bv <= value => {}
            _ => best = Some((theta, value)),
        }
    }
    let (theta, eta) = best.expect("at least one start");
    Incumbent { eta, theta }
}
