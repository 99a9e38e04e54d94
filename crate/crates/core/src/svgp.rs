//! Sparse variational Gaussian processes.
//!
//! An [`SvgpModel`] approximates a GP posterior over a large, noisy dataset
//! through a small set of inducing points. The variational distribution is
//! kept in whitened form `u = L_z eps`, `q(eps) = N(m_w, L_s L_s^T)`, which
//! makes the prior-matching state simply `(0, I)` and keeps the evidence
//! lower bound well conditioned for first-order ascent.
//!
//! Training maximizes the mini-batched ELBO
//!
//! ```text
//!   (m/|B|) * sum_{i in B} E_q[log N(y_i | f(x_i), sigma^2)] - KL(q || p)
//! ```
//!
//! over kernel hyperparameters, likelihood noise, inducing locations, and
//! the variational parameters, with analytic reverse-mode gradients
//! (including the Cholesky backward pass for the whitening factor).
//!
//! The trained posterior mean is the "topological prior" consumed by the
//! optimization loop: a cheap deterministic stand-in for the expensive
//! objective, learned from low-shot observations.

use crate::gp::{GpError, KernelKind, KernelParams, HYPER_BOUNDS};
use crate::opt::Adam;
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SvgpError {
    #[error("training data is empty")]
    EmptyData,
    #[error("inducing count {requested} must be between 1 and the data size {m}")]
    BadInducingCount { requested: usize, m: usize },
    #[error("inputs and targets disagree in length ({inputs} vs {targets})")]
    LengthMismatch { inputs: usize, targets: usize },
    #[error("ELBO became non-finite at step {step}")]
    Diverged { step: usize },
    #[error(transparent)]
    Gp(#[from] GpError),
}

/// Training options. The defaults are sized for a few thousand low-shot
/// observations on a single desk-scale core.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SvgpConfig {
    pub steps: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub learn_hyperparams: bool,
    pub learn_noise: bool,
    pub learn_inducing: bool,
}

impl Default for SvgpConfig {
    fn default() -> Self {
        Self {
            steps: 3000,
            batch_size: 256,
            learning_rate: 1e-2,
            learn_hyperparams: true,
            learn_noise: true,
            learn_inducing: true,
        }
    }
}

/// Serializable model state (whitened variational form).
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SvgpSnapshot {
    pub kernel: KernelParams,
    pub noise_variance: f64,
    pub inducing: Vec<Vec<f64>>,
    pub whitened_mean: Vec<f64>,
    /// Lower-triangular rows, row i holding i+1 entries.
    pub whitened_cov_factor: Vec<Vec<f64>>,
    pub y_mean: f64,
    pub y_std: f64,
    pub data_size: usize,
}

/// A sparse variational GP. Immutable after training; mean/variance queries
/// are read-only and cheap (`O(l)` / `O(l^2)`).
#[derive(Debug, Clone)]
pub struct SvgpModel {
    kernel: KernelParams,
    noise_variance: f64,
    inducing: Vec<Vec<f64>>,
    whitened_mean: DVector<f64>,
    whitened_cov_factor: DMatrix<f64>,
    y_mean: f64,
    y_std: f64,
    data_size: usize,
    /// Batch ELBO per training step (standardized units).
    elbo_trace: Vec<f64>,
    chol_zz: Cholesky<f64, Dyn>,
    /// `L_z^{-T} m_w`, so the predictive mean is `k_z(theta) . weights`.
    predict_weights: DVector<f64>,
}

/// Greedy farthest-point subset of `inputs` (Euclidean metric, ties to the
/// lowest index, seeded at index 0).
fn farthest_point_indices(inputs: &[Vec<f64>], count: usize) -> Vec<usize> {
    let mut chosen = vec![0usize];
    let mut min_d2: Vec<f64> = inputs
        .iter()
        .map(|x| sq_dist(x, &inputs[0]))
        .collect();
    while chosen.len() < count {
        let (best, _) = min_d2
            .iter()
            .enumerate()
            .fold((0usize, -1.0f64), |acc, (i, &d)| {
                if d > acc.1 {
                    (i, d)
                } else {
                    acc
                }
            });
        chosen.push(best);
        for (i, d) in min_d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(&inputs[i], &inputs[best]));
        }
    }
    chosen
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index bookkeeping for the flat training-parameter vector:
/// `[ln sigma_k^2, ln rho.., ln sigma^2, m_w.., tril(L_s).., Z..]`
/// with the `L_s` diagonal stored as logs.
#[derive(Clone, Copy)]
struct Packing {
    d: usize,
    l: usize,
}

impl Packing {
    fn len(self) -> usize {
        self.d + 2 + self.l + self.l * (self.l + 1) / 2 + self.l * self.d
    }
    fn sigma_k(self) -> usize {
        0
    }
    fn rho(self, r: usize) -> usize {
        1 + r
    }
    fn noise(self) -> usize {
        self.d + 1
    }
    fn mw(self, i: usize) -> usize {
        self.d + 2 + i
    }
    fn ls(self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i);
        self.d + 2 + self.l + i * (i + 1) / 2 + j
    }
    fn z(self, i: usize, r: usize) -> usize {
        self.d + 2 + self.l + self.l * (self.l + 1) / 2 + i * self.d + r
    }
}

struct Unpacked {
    kernel: KernelParams,
    noise: f64,
    m_w: DVector<f64>,
    l_s: DMatrix<f64>,
    z: Vec<Vec<f64>>,
}

fn unpack(p: Packing, u: &[f64], kind: KernelKind) -> Unpacked {
    let kernel = KernelParams::new(
        kind,
        u[p.sigma_k()].exp(),
        (0..p.d).map(|r| u[p.rho(r)].exp()).collect(),
    );
    let noise = u[p.noise()].exp();
    let m_w = DVector::from_fn(p.l, |i, _| u[p.mw(i)]);
    let mut l_s = DMatrix::zeros(p.l, p.l);
    for i in 0..p.l {
        for j in 0..i {
            l_s[(i, j)] = u[p.ls(i, j)];
        }
        l_s[(i, i)] = u[p.ls(i, i)].exp();
    }
    let z = (0..p.l)
        .map(|i| (0..p.d).map(|r| u[p.z(i, r)]).collect())
        .collect();
    Unpacked {
        kernel,
        noise,
        m_w,
        l_s,
        z,
    }
}

/// Reverse-mode sensitivity of a Cholesky factorization: given `L` with
/// `Sigma = L L^T` and the adjoint `dL`, return the symmetric `dSigma`.
fn chol_rev(l: &DMatrix<f64>, dl: &DMatrix<f64>) -> DMatrix<f64> {
    let n = l.nrows();
    let mut p = l.tr_mul(dl); // L^T dL
    // Phi: lower triangle with halved diagonal
    for i in 0..n {
        p[(i, i)] *= 0.5;
        for j in (i + 1)..n {
            p[(i, j)] = 0.0;
        }
    }
    let sym = &p + p.transpose();
    // dSigma = 0.5 * L^{-T} (P + P^T) L^{-1}
    let x = l
        .tr_solve_lower_triangular(&sym)
        .expect("triangular solve");
    let xt = x.transpose();
    let y = l
        .tr_solve_lower_triangular(&xt)
        .expect("triangular solve");
    0.5 * y.transpose()
}

struct ElboEval {
    elbo: f64,
    /// Gradient of the ELBO with respect to the packed parameters.
    grad: Vec<f64>,
}

/// One ELBO + gradient evaluation on a mini-batch (standardized targets).
#[allow(clippy::too_many_arguments)]
fn elbo_and_grad(
    p: Packing,
    u: &[f64],
    kind: KernelKind,
    batch_x: &[&[f64]],
    batch_y: &[f64],
    m_total: usize,
    config: &SvgpConfig,
    want_grad: bool,
) -> Option<ElboEval> {
    let Unpacked {
        kernel,
        noise,
        m_w,
        l_s,
        z,
    } = unpack(p, u, kind);
    let l = p.l;
    let d = p.d;
    let b = batch_x.len();
    let scale = m_total as f64 / b as f64;
    let sigma_k2 = kernel.signal_variance;

    // K_zz with jitter proportional to the signal variance, so the jitter's
    // contribution folds into the ln sigma_k^2 gradient exactly.
    let jitter = 1e-8 * sigma_k2;
    let mut k_zz = DMatrix::zeros(l, l);
    for i in 0..l {
        for j in 0..=i {
            let v = kernel.eval(&z[i], &z[j]);
            k_zz[(i, j)] = v;
            k_zz[(j, i)] = v;
        }
        k_zz[(i, i)] += jitter;
    }
    let chol = Cholesky::new(k_zz.clone())?;
    let l_z: DMatrix<f64> = chol.l();

    let mut k_zx = DMatrix::zeros(l, b);
    for i in 0..l {
        for j in 0..b {
            k_zx[(i, j)] = kernel.eval(&z[i], batch_x[j]);
        }
    }
    let a = l_z.solve_lower_triangular(&k_zx)?;
    let mu = a.tr_mul(&m_w); // b-vector
    let t = l_s.tr_mul(&a); // l x b
    let mut v = vec![0.0; b];
    for j in 0..b {
        let mut na = 0.0;
        let mut nt = 0.0;
        for i in 0..l {
            na += a[(i, j)] * a[(i, j)];
            nt += t[(i, j)] * t[(i, j)];
        }
        v[j] = sigma_k2 - na + nt;
    }

    let ln_2pi_s2 = (2.0 * std::f64::consts::PI * noise).ln();
    let mut ell = 0.0;
    for j in 0..b {
        let e = batch_y[j] - mu[j];
        ell += -0.5 * ln_2pi_s2 - (e * e + v[j]) / (2.0 * noise);
    }
    let mut kl = 0.0;
    for i in 0..l {
        kl += m_w[i] * m_w[i];
        for j in 0..=i {
            kl += l_s[(i, j)] * l_s[(i, j)];
        }
        kl -= 2.0 * l_s[(i, i)].ln();
    }
    kl = 0.5 * (kl - l as f64);
    let elbo = scale * ell - kl;
    if !elbo.is_finite() {
        return None;
    }
    if !want_grad {
        return Some(ElboEval {
            elbo,
            grad: Vec::new(),
        });
    }

    let mut grad = vec![0.0; p.len()];
    let dv = -scale / (2.0 * noise);
    let dmu = DVector::from_fn(b, |j, _| scale * (batch_y[j] - mu[j]) / noise);
    if config.learn_noise {
        let mut g = 0.0;
        for j in 0..b {
            let e = batch_y[j] - mu[j];
            g += -0.5 + (e * e + v[j]) / (2.0 * noise);
        }
        grad[p.noise()] = scale * g;
    }
    // variational mean
    let dm_w = &a * &dmu - &m_w;
    for i in 0..l {
        grad[p.mw(i)] = dm_w[i];
    }
    // variational factor: 2 dv A T^T - (L_s - diag(1/L_ii)), lower triangle
    let a_tt = &a * t.transpose();
    for i in 0..l {
        for j in 0..=i {
            let mut g = 2.0 * dv * a_tt[(i, j)] - l_s[(i, j)];
            if i == j {
                g += 1.0 / l_s[(i, i)];
                g *= l_s[(i, i)]; // log-diagonal reparameterization
            }
            grad[p.ls(i, j)] = g;
        }
    }
    // dA = m_w dmu^T + 2 dv (L_s T - A)
    let da = &m_w * dmu.transpose() + 2.0 * dv * (&l_s * &t - &a);
    // dK_zx = L_z^{-T} dA ; dL_z = -dK_zx A^T
    let dk_zx = l_z.tr_solve_lower_triangular(&da)?;
    let mut dl_z = -(&dk_zx * a.transpose());
    for i in 0..l {
        for j in (i + 1)..l {
            dl_z[(i, j)] = 0.0;
        }
    }
    let dk_zz = chol_rev(&l_z, &dl_z);

    let learn_h = config.learn_hyperparams;
    let learn_z = config.learn_inducing;
    if learn_h {
        // k(x, x) = sigma_k^2 contributes dv per batch point
        let mut g = b as f64 * dv * sigma_k2;
        for i in 0..l {
            for j in 0..l {
                g += dk_zz[(i, j)] * k_zz[(i, j)];
            }
        }
        for i in 0..l {
            for j in 0..b {
                g += dk_zx[(i, j)] * k_zx[(i, j)];
            }
        }
        grad[p.sigma_k()] = g;
    }
    if learn_h || learn_z {
        let mut g_rho = vec![0.0; d];
        let mut g_in = vec![0.0; d];
        for i in 0..l {
            for j in 0..i {
                let w = 2.0 * dk_zz[(i, j)];
                kernel.eval_all_grads(&z[i], &z[j], &mut g_rho, &mut g_in);
                if learn_h {
                    for r in 0..d {
                        grad[p.rho(r)] += w * g_rho[r];
                    }
                }
                if learn_z {
                    for r in 0..d {
                        grad[p.z(i, r)] += w * g_in[r];
                        grad[p.z(j, r)] -= w * g_in[r];
                    }
                }
            }
        }
        for i in 0..l {
            for j in 0..b {
                let w = dk_zx[(i, j)];
                kernel.eval_all_grads(&z[i], batch_x[j], &mut g_rho, &mut g_in);
                if learn_h {
                    for r in 0..d {
                        grad[p.rho(r)] += w * g_rho[r];
                    }
                }
                if learn_z {
                    for r in 0..d {
                        grad[p.z(i, r)] += w * g_in[r];
                    }
                }
            }
        }
    }
    Some(ElboEval { elbo, grad })
}

impl SvgpModel {
    /// Initialize from data: inducing locations by farthest-point selection,
    /// variational state at the whitened prior `(0, I)`, hyperparameters at
    /// their defaults (standardized target units).
    pub fn init(
        inputs: &[Vec<f64>],
        targets: &[f64],
        n_inducing: usize,
        kind: KernelKind,
    ) -> Result<Self, SvgpError> {
        if inputs.is_empty() {
            return Err(SvgpError::EmptyData);
        }
        if inputs.len() != targets.len() {
            return Err(SvgpError::LengthMismatch {
                inputs: inputs.len(),
                targets: targets.len(),
            });
        }
        if n_inducing == 0 || n_inducing > inputs.len() {
            return Err(SvgpError::BadInducingCount {
                requested: n_inducing,
                m: inputs.len(),
            });
        }
        let m = inputs.len();
        let dim = inputs[0].len();
        let y_mean = targets.iter().sum::<f64>() / m as f64;
        let var = targets.iter().map(|y| (y - y_mean).powi(2)).sum::<f64>() / m as f64;
        let y_std = if var.sqrt() > 1e-12 { var.sqrt() } else { 1.0 };
        let inducing: Vec<Vec<f64>> = farthest_point_indices(inputs, n_inducing)
            .into_iter()
            .map(|i| inputs[i].clone())
            .collect();
        let kernel = KernelParams::default_for(kind, dim);
        let mut model = Self {
            kernel,
            noise_variance: 1e-2,
            whitened_mean: DVector::zeros(n_inducing),
            whitened_cov_factor: DMatrix::identity(n_inducing, n_inducing),
            y_mean,
            y_std,
            data_size: m,
            elbo_trace: Vec::new(),
            chol_zz: Cholesky::new(DMatrix::identity(n_inducing, n_inducing)).unwrap(),
            predict_weights: DVector::zeros(n_inducing),
            inducing,
        };
        model.rebuild_cache()?;
        Ok(model)
    }

    fn rebuild_cache(&mut self) -> Result<(), SvgpError> {
        let l = self.inducing.len();
        let jitter = 1e-8 * self.kernel.signal_variance;
        let mut k_zz = DMatrix::zeros(l, l);
        for i in 0..l {
            for j in 0..=i {
                let v = self.kernel.eval(&self.inducing[i], &self.inducing[j]);
                k_zz[(i, j)] = v;
                k_zz[(j, i)] = v;
            }
            k_zz[(i, i)] += jitter;
        }
        let chol = Cholesky::new(k_zz).ok_or(GpError::NotPositiveDefinite {
            max_jitter: jitter,
        })?;
        let lt: DMatrix<f64> = chol.l();
        self.predict_weights = lt
            .tr_solve_lower_triangular(&self.whitened_mean)
            .expect("triangular solve");
        self.chol_zz = chol;
        Ok(())
    }

    /// Maximize the ELBO with mini-batched Adam. The learning rate decays by
    /// 0.3 at 60% and again at 85% of the step budget. Deterministic given
    /// `(rng state, data order)`.
    pub fn train(
        &mut self,
        inputs: &[Vec<f64>],
        targets: &[f64],
        config: &SvgpConfig,
        rng: &mut impl Rng,
    ) -> Result<(), SvgpError> {
        if inputs.len() != targets.len() {
            return Err(SvgpError::LengthMismatch {
                inputs: inputs.len(),
                targets: targets.len(),
            });
        }
        if inputs.is_empty() {
            return Err(SvgpError::EmptyData);
        }
        let m = inputs.len();
        self.data_size = m;
        if config.steps == 0 {
            return Ok(());
        }
        let d = inputs[0].len();
        let l = self.inducing.len();
        let p = Packing { d, l };
        let std_y: Vec<f64> = targets.iter().map(|y| (y - self.y_mean) / self.y_std).collect();

        let mut u = vec![0.0; p.len()];
        u[p.sigma_k()] = self.kernel.signal_variance.ln();
        for r in 0..d {
            u[p.rho(r)] = self.kernel.inv_sq_lengthscales[r].ln();
        }
        u[p.noise()] = self.noise_variance.ln();
        for i in 0..l {
            u[p.mw(i)] = self.whitened_mean[i];
            for j in 0..i {
                u[p.ls(i, j)] = self.whitened_cov_factor[(i, j)];
            }
            u[p.ls(i, i)] = self.whitened_cov_factor[(i, i)].ln();
        }
        for i in 0..l {
            for r in 0..d {
                u[p.z(i, r)] = self.inducing[i][r];
            }
        }

        let clamp = |u: &mut Vec<f64>| {
            let b = &HYPER_BOUNDS;
            u[p.sigma_k()] = u[p.sigma_k()].clamp(b.signal_variance.0.ln(), b.signal_variance.1.ln());
            for r in 0..d {
                u[p.rho(r)] =
                    u[p.rho(r)].clamp(b.inv_sq_lengthscale.0.ln(), b.inv_sq_lengthscale.1.ln());
            }
            u[p.noise()] = u[p.noise()].clamp(b.noise_variance.0.ln(), b.noise_variance.1.ln());
        };

        let mut adam = Adam::new(p.len(), config.learning_rate);
        let full_batch = config.batch_size >= m;
        let mut trace = Vec::with_capacity(config.steps);
        for step in 0..config.steps {
            if step == (config.steps * 3) / 5 || step == (config.steps * 17) / 20 {
                let progress = step as f64 / config.steps.max(1) as f64;
                let factor = if progress < 0.85 { 0.3 } else { 0.09 };
                adam.set_lr(config.learning_rate * factor);
            }
            let (bx, by): (Vec<&[f64]>, Vec<f64>) = if full_batch {
                (inputs.iter().map(|x| x.as_slice()).collect(), std_y.clone())
            } else {
                let idx = rand::seq::index::sample(rng, m, config.batch_size);
                (
                    idx.iter().map(|i| inputs[i].as_slice()).collect(),
                    idx.iter().map(|i| std_y[i]).collect(),
                )
            };
            let eval = elbo_and_grad(p, &u, self.kernel.kind, &bx, &by, m, config, true)
                .ok_or(SvgpError::Diverged { step })?;
            trace.push(eval.elbo);
            let mut neg_grad: Vec<f64> = eval.grad.iter().map(|g| -g).collect();
            if !config.learn_hyperparams {
                neg_grad[p.sigma_k()] = 0.0;
                for r in 0..d {
                    neg_grad[p.rho(r)] = 0.0;
                }
            }
            if !config.learn_noise {
                neg_grad[p.noise()] = 0.0;
            }
            if !config.learn_inducing {
                for i in 0..l {
                    for r in 0..d {
                        neg_grad[p.z(i, r)] = 0.0;
                    }
                }
            }
            adam.step(&mut u, &neg_grad);
            clamp(&mut u);
        }

        let unpacked = unpack(p, &u, self.kernel.kind);
        self.kernel = unpacked.kernel;
        self.noise_variance = unpacked.noise;
        self.whitened_mean = unpacked.m_w;
        self.whitened_cov_factor = unpacked.l_s;
        self.inducing = unpacked.z;
        self.elbo_trace = trace;
        self.rebuild_cache()?;
        Ok(())
    }

    /// Mini-batch ELBO estimate `(m/|batch|) sum ELL - KL`, on raw targets
    /// (standardized internally with the model's stored statistics).
    pub fn elbo(&self, batch_inputs: &[Vec<f64>], batch_targets: &[f64]) -> f64 {
        let d = self.dim();
        let l = self.inducing.len();
        let p = Packing { d, l };
        let mut u = vec![0.0; p.len()];
        u[p.sigma_k()] = self.kernel.signal_variance.ln();
        for r in 0..d {
            u[p.rho(r)] = self.kernel.inv_sq_lengthscales[r].ln();
        }
        u[p.noise()] = self.noise_variance.ln();
        for i in 0..l {
            u[p.mw(i)] = self.whitened_mean[i];
            for j in 0..i {
                u[p.ls(i, j)] = self.whitened_cov_factor[(i, j)];
            }
            u[p.ls(i, i)] = self.whitened_cov_factor[(i, i)].ln();
        }
        for i in 0..l {
            for r in 0..d {
                u[p.z(i, r)] = self.inducing[i][r];
            }
        }
        let bx: Vec<&[f64]> = batch_inputs.iter().map(|x| x.as_slice()).collect();
        let by: Vec<f64> = batch_targets
            .iter()
            .map(|y| (y - self.y_mean) / self.y_std)
            .collect();
        elbo_and_grad(
            p,
            &u,
            self.kernel.kind,
            &bx,
            &by,
            self.data_size,
            &SvgpConfig::default(),
            false,
        )
        .map(|e| e.elbo)
        .unwrap_or(f64::NEG_INFINITY)
    }

    /// `KL(q(u) || p(u))` in whitened form; zero when `q` equals the prior.
    pub fn kl(&self) -> f64 {
        let l = self.inducing.len();
        let mut kl = 0.0;
        for i in 0..l {
            kl += self.whitened_mean[i] * self.whitened_mean[i];
            for j in 0..=i {
                kl += self.whitened_cov_factor[(i, j)] * self.whitened_cov_factor[(i, j)];
            }
            kl -= 2.0 * self.whitened_cov_factor[(i, i)].ln();
        }
        0.5 * (kl - l as f64)
    }

    /// Posterior mean at `theta`, in output units. Pure and thread-safe.
    pub fn mean(&self, theta: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (i, z) in self.inducing.iter().enumerate() {
            acc += self.kernel.eval(theta, z) * self.predict_weights[i];
        }
        self.y_mean + self.y_std * acc
    }

    /// Posterior mean and its gradient with respect to `theta`.
    pub fn mean_grad(&self, theta: &[f64]) -> (f64, Vec<f64>) {
        let d = self.dim();
        let mut grad = vec![0.0; d];
        let mut buf = vec![0.0; d];
        let mut acc = 0.0;
        for (i, z) in self.inducing.iter().enumerate() {
            let k = self.kernel.eval_grad_input(theta, z, &mut buf);
            let w = self.predict_weights[i];
            acc += k * w;
            for r in 0..d {
                grad[r] += buf[r] * w;
            }
        }
        for g in &mut grad {
            *g *= self.y_std;
        }
        (self.y_mean + self.y_std * acc, grad)
    }

    /// Predictive variance of the latent function (diagnostics only).
    pub fn variance(&self, theta: &[f64]) -> f64 {
        let l = self.inducing.len();
        let kv = DVector::from_fn(l, |i, _| self.kernel.eval(theta, &self.inducing[i]));
        let lz: DMatrix<f64> = self.chol_zz.l();
        let a = lz
            .solve_lower_triangular(&kv)
            .expect("triangular solve");
        let t = self.whitened_cov_factor.tr_mul(&a);
        let v = self.kernel.signal_variance - a.norm_squared() + t.norm_squared();
        self.y_std * self.y_std * v.max(0.0)
    }

    pub fn kernel(&self) -> &KernelParams {
        &self.kernel
    }

    pub fn kernel_mut(&mut self) -> &mut KernelParams {
        &mut self.kernel
    }

    /// Replace kernel and likelihood noise (standardized units), e.g. to pin
    /// them to a dense model's values before variational-only training.
    pub fn set_hyperparams(&mut self, kernel: KernelParams, noise_variance: f64) -> Result<(), SvgpError> {
        self.kernel = kernel;
        self.noise_variance = noise_variance;
        self.rebuild_cache()?;
        Ok(())
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn inducing(&self) -> &[Vec<f64>] {
        &self.inducing
    }

    pub fn dim(&self) -> usize {
        self.inducing[0].len()
    }

    pub fn data_size(&self) -> usize {
        self.data_size
    }

    /// `(y_mean, y_std)` used to standardize targets internally.
    pub fn standardization(&self) -> (f64, f64) {
        (self.y_mean, self.y_std)
    }

    pub fn elbo_trace(&self) -> &[f64] {
        &self.elbo_trace
    }

    pub fn snapshot(&self) -> SvgpSnapshot {
        let l = self.inducing.len();
        SvgpSnapshot {
            kernel: self.kernel.clone(),
            noise_variance: self.noise_variance,
            inducing: self.inducing.clone(),
            whitened_mean: self.whitened_mean.iter().cloned().collect(),
            whitened_cov_factor: (0..l)
                .map(|i| (0..=i).map(|j| self.whitened_cov_factor[(i, j)]).collect())
                .collect(),
            y_mean: self.y_mean,
            y_std: self.y_std,
            data_size: self.data_size,
        }
    }

    pub fn from_snapshot(snap: SvgpSnapshot) -> Result<Self, SvgpError> {
        let l = snap.inducing.len();
        if l == 0 {
            return Err(SvgpError::EmptyData);
        }
        let mut l_s = DMatrix::zeros(l, l);
        for (i, row) in snap.whitened_cov_factor.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                l_s[(i, j)] = v;
            }
        }
        let mut model = Self {
            kernel: snap.kernel,
            noise_variance: snap.noise_variance,
            whitened_mean: DVector::from_vec(snap.whitened_mean),
            whitened_cov_factor: l_s,
            y_mean: snap.y_mean,
            y_std: snap.y_std,
            data_size: snap.data_size,
            elbo_trace: Vec::new(),
            chol_zz: Cholesky::new(DMatrix::identity(l, l)).unwrap(),
            predict_weights: DVector::zeros(l),
            inducing: snap.inducing,
        };
        model.rebuild_cache()?;
        Ok(model)
    }
}
