//! The GP with a surface-topology prior.

use crate::gp::{FitConfig, GpModel, KernelKind, KernelParams, PosteriorEval, PriorMean};
use crate::svgp::SvgpModel;
use std::fmt;
use std::sync::Arc;

use super::BoptError;

/// The frozen prior mean: the zero function (standard BO), an arbitrary
/// deterministic function, or a trained sparse-GP posterior mean.
#[derive(Clone)]
pub enum TopologicalPrior {
    Zero,
    Function(Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>),
    Surrogate(Arc<SvgpModel>),
}

impl TopologicalPrior {
    pub fn mean(&self, theta: &[f64]) -> f64 {
        match self {
            TopologicalPrior::Zero => 0.0,
            TopologicalPrior::Function(f) => f(theta),
            TopologicalPrior::Surrogate(model) => model.mean(theta),
        }
    }

    /// Prior mean and its gradient (finite differences for opaque
    /// functions, analytic for the surrogate).
    pub fn mean_grad(&self, theta: &[f64], grad: &mut [f64]) -> f64 {
        match self {
            TopologicalPrior::Zero => {
                grad.fill(0.0);
                0.0
            }
            TopologicalPrior::Function(f) => {
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
            TopologicalPrior::Surrogate(model) => {
                let (value, g) = model.mean_grad(theta);
                grad.copy_from_slice(&g);
                value
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, TopologicalPrior::Zero)
    }
}

impl fmt::Debug for TopologicalPrior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TopologicalPrior::Zero => write!(f, "TopologicalPrior::Zero"),
            TopologicalPrior::Function(_) => write!(f, "TopologicalPrior::Function(..)"),
            TopologicalPrior::Surrogate(_) => write!(f, "TopologicalPrior::Surrogate(..)"),
        }
    }
}

/// A zero-mean residual GP stacked on a frozen topological prior. The
/// posterior mean is `prior(theta) + residual_mean(theta)`; the posterior
/// variance is the residual GP's variance.
#[derive(Debug, Clone)]
pub struct GpTpModel {
    prior: TopologicalPrior,
    residual_gp: GpModel,
}

impl GpTpModel {
    /// Fit the residual GP on `{theta_i, y_i - prior(theta_i)}`.
    pub fn fit(
        prior: TopologicalPrior,
        inputs: Vec<Vec<f64>>,
        outputs: &[f64],
        kind: KernelKind,
        dim: usize,
        config: &FitConfig,
        warm_start: Option<(&KernelParams, f64)>,
    ) -> Result<Self, BoptError> {
        let residuals: Vec<f64> = inputs
            .iter()
            .zip(outputs)
            .map(|(x, y)| y - prior.mean(x))
            .collect();
        let residual_gp = GpModel::fit(
            inputs,
            residuals,
            PriorMean::Zero,
            kind,
            dim,
            config,
            warm_start,
        )?;
        Ok(Self { prior, residual_gp })
    }

    pub fn from_parts(prior: TopologicalPrior, residual_gp: GpModel) -> Self {
        Self { prior, residual_gp }
    }

    pub fn prior(&self) -> &TopologicalPrior {
        &self.prior
    }

    pub fn residual_gp(&self) -> &GpModel {
        &self.residual_gp
    }

    pub fn n(&self) -> usize {
        self.residual_gp.n()
    }

    pub fn dim(&self) -> usize {
        self.residual_gp.dim()
    }

    pub fn posterior(&self, theta: &[f64]) -> (f64, f64) {
        let (res_mean, res_var) = self.residual_gp.posterior(theta);
        (self.prior.mean(theta) + res_mean, res_var)
    }

    pub fn posterior_with_grad(&self, theta: &[f64]) -> PosteriorEval {
        let mut eval = self.residual_gp.posterior_with_grad(theta);
        let mut prior_grad = vec![0.0; theta.len()];
        let prior_mean = self.prior.mean_grad(theta, &mut prior_grad);
        eval.mean += prior_mean;
        for (g, p) in eval.mean_grad.iter_mut().zip(&prior_grad) {
            *g += p;
        }
        eval
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::FitConfig;
    use rand::Rng;
    use rand::SeedableRng;

    #[test]
    fn residual_identity_against_prior_mean_gp() {
        // Stacking a zero-mean GP on residuals must equal fitting a dense GP
        // whose prior mean is the same frozen function.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(61);
        let prior_fn = |t: &[f64]| (t[0]).sin() - 0.3 * t[0];
        let inputs: Vec<Vec<f64>> = (0..14).map(|_| vec![rng.gen_range(0.0..6.28)]).collect();
        let outputs: Vec<f64> = inputs
            .iter()
            .map(|x| prior_fn(x) + 0.2 * (3.0 * x[0]).cos() + 0.01 * rng.gen_range(-1.0..1.0))
            .collect();

        let gptp = GpTpModel::fit(
            TopologicalPrior::Function(Arc::new(prior_fn)),
            inputs.clone(),
            &outputs,
            KernelKind::periodic_2pi(),
            1,
            &FitConfig::default(),
            None,
        )
        .unwrap();
        let dense = GpModel::fit(
            inputs,
            outputs,
            PriorMean::Function(Arc::new(prior_fn)),
            KernelKind::periodic_2pi(),
            1,
            &FitConfig::default(),
            None,
        )
        .unwrap();
        for i in 0..30 {
            let theta = vec![i as f64 * 0.21];
            let (m1, v1) = gptp.posterior(&theta);
            let (m2, v2) = dense.posterior(&theta);
            assert!((m1 - m2).abs() < 1e-10, "{m1} vs {m2}");
            assert!((v1 - v2).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_prior_reduces_to_the_residual_gp() {
        let inputs = vec![vec![0.2], vec![1.4]];
        let outputs = [0.5, -0.5];
        let gptp = GpTpModel::fit(
            TopologicalPrior::Zero,
            inputs.clone(),
            &outputs,
            KernelKind::Matern25,
            1,
            &FitConfig::default(),
            None,
        )
        .unwrap();
        let (mean, var) = gptp.posterior(&[0.8]);
        let (rm, rv) = gptp.residual_gp().posterior(&[0.8]);
        assert_eq!(mean, rm);
        assert_eq!(var, rv);
    }

    #[test]
    fn gradients_include_the_prior_term() {
        let prior_fn = |t: &[f64]| 2.0 * t[0];
        let gptp = GpTpModel::fit(
            TopologicalPrior::Function(Arc::new(prior_fn)),
            vec![vec![0.0], vec![1.0]],
            &[0.1, 2.2],
            KernelKind::Matern25,
            1,
            &FitConfig::default(),
            None,
        )
        .unwrap();
        let theta = [0.4];
        let eval = gptp.posterior_with_grad(&theta);
        let h = 1e-6;
        let (up, _) = gptp.posterior(&[theta[0] + h]);
        let (dn, _) = gptp.posterior(&[theta[0] - h]);
        let fd = (up - dn) / (2.0 * h);
        assert!((eval.mean_grad[0] - fd).abs() < 1e-5);
    }
}
