//! Covariance functions.

use std::f64::consts::{PI, TAU};

const SQRT5: f64 = 2.23606797749979;

/// Kernel family.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum KernelKind {
    /// Matérn with smoothness 5/2 in its closed form, using the ARD metric
    /// `r = sqrt(sum_i rho_i (a_i - b_i)^2)`.
    Matern25,
    /// `sigma_k^2 exp(-2 sum_i rho_i sin^2(pi (a_i - b_i) / p))`.
    Periodic { period: f64 },
}

impl KernelKind {
    /// Periodic kernel with the circuit-parameter period `2*pi`.
    pub fn periodic_2pi() -> Self {
        KernelKind::Periodic { period: TAU }
    }
}

/// A kernel with its hyperparameters: signal variance and per-dimension
/// inverse squared length scales (all strictly positive).
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct KernelParams {
    pub kind: KernelKind,
    pub signal_variance: f64,
    pub inv_sq_lengthscales: Vec<f64>,
}

impl KernelParams {
    pub fn new(kind: KernelKind, signal_variance: f64, inv_sq_lengthscales: Vec<f64>) -> Self {
        Self {
            kind,
            signal_variance,
            inv_sq_lengthscales,
        }
    }

    /// Default hyperparameters for a `dim`-dimensional input space. The
    /// inverse-squared length scales start at `1/dim` so that the total
    /// weighted distance between typical points is O(1) regardless of the
    /// dimension; with per-dimension unit scales a high-dimensional kernel
    /// would start out numerically zero everywhere and gradients would
    /// vanish.
    pub fn default_for(kind: KernelKind, dim: usize) -> Self {
        Self::new(kind, 1.0, vec![1.0 / dim.max(1) as f64; dim])
    }

    pub fn dim(&self) -> usize {
        self.inv_sq_lengthscales.len()
    }

    /// Covariance `k(a, b)`.
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), self.dim());
        debug_assert_eq!(b.len(), self.dim());
        match self.kind {
            KernelKind::Matern25 => {
                let r2: f64 = self
                    .inv_sq_lengthscales
                    .iter()
                    .zip(a.iter().zip(b))
                    .map(|(&rho, (&x, &y))| rho * (x - y) * (x - y))
                    .sum();
                let r = r2.sqrt();
                self.signal_variance * (1.0 + SQRT5 * r + 5.0 * r2 / 3.0) * (-SQRT5 * r).exp()
            }
            KernelKind::Periodic { period } => {
                let s: f64 = self
                    .inv_sq_lengthscales
                    .iter()
                    .zip(a.iter().zip(b))
                    .map(|(&rho, (&x, &y))| {
                        let sin = (PI * (x - y) / period).sin();
                        rho * sin * sin
                    })
                    .sum();
                self.signal_variance * (-2.0 * s).exp()
            }
        }
    }

    /// `k(a, b)` together with the partial derivatives with respect to the
    /// log inverse-squared length scales.
    pub fn eval_grad_log_rho(&self, a: &[f64], b: &[f64], grad: &mut [f64]) -> f64 {
        match self.kind {
            KernelKind::Matern25 => {
                let r2: f64 = self
                    .inv_sq_lengthscales
                    .iter()
                    .zip(a.iter().zip(b))
                    .map(|(&rho, (&x, &y))| rho * (x - y) * (x - y))
                    .sum();
                let r = r2.sqrt();
                let e = (-SQRT5 * r).exp();
                let k = self.signal_variance * (1.0 + SQRT5 * r + 5.0 * r2 / 3.0) * e;
                // dk/dr = -sigma^2 (5r/3)(1 + sqrt5 r) e^{-sqrt5 r}; the
                // factor w = dk/dr / (2r) stays finite as r -> 0.
                let w = -self.signal_variance * (5.0 / 6.0) * (1.0 + SQRT5 * r) * e;
                for (i, &rho) in self.inv_sq_lengthscales.iter().enumerate() {
                    let d = a[i] - b[i];
                    grad[i] = w * rho * d * d;
                }
                k
            }
            KernelKind::Periodic { period } => {
                let k = self.eval(a, b);
                for (i, &rho) in self.inv_sq_lengthscales.iter().enumerate() {
                    let sin = (PI * (a[i] - b[i]) / period).sin();
                    grad[i] = -2.0 * k * rho * sin * sin;
                }
                k
            }
        }
    }

    /// `k(a, b)` with both the log-rho gradient and the gradient with
    /// respect to `a`, sharing the distance computation.
    pub fn eval_all_grads(
        &self,
        a: &[f64],
        b: &[f64],
        grad_log_rho: &mut [f64],
        grad_a: &mut [f64],
    ) -> f64 {
        match self.kind {
            KernelKind::Matern25 => {
                let r2: f64 = self
                    .inv_sq_lengthscales
                    .iter()
                    .zip(a.iter().zip(b))
                    .map(|(&rho, (&x, &y))| rho * (x - y) * (x - y))
                    .sum();
                let r = r2.sqrt();
                let e = (-SQRT5 * r).exp();
                let k = self.signal_variance * (1.0 + SQRT5 * r + 5.0 * r2 / 3.0) * e;
                let w = -self.signal_variance * (5.0 / 6.0) * (1.0 + SQRT5 * r) * e;
                for (i, &rho) in self.inv_sq_lengthscales.iter().enumerate() {
                    let d = a[i] - b[i];
                    grad_log_rho[i] = w * rho * d * d;
                    grad_a[i] = 2.0 * w * rho * d;
                }
                k
            }
            KernelKind::Periodic { period } => {
                let k = self.eval(a, b);
                let c = PI / period;
                for (i, &rho) in self.inv_sq_lengthscales.iter().enumerate() {
                    let sin = (c * (a[i] - b[i])).sin();
                    grad_log_rho[i] = -2.0 * k * rho * sin * sin;
                    grad_a[i] = -2.0 * k * rho * c * (2.0 * c * (a[i] - b[i])).sin();
                }
                k
            }
        }
    }

    /// `k(a, b)` together with the gradient with respect to `a`.
    pub fn eval_grad_input(&self, a: &[f64], b: &[f64], grad: &mut [f64]) -> f64 {
        match self.kind {
            KernelKind::Matern25 => {
                let r2: f64 = self
                    .inv_sq_lengthscales
                    .iter()
                    .zip(a.iter().zip(b))
                    .map(|(&rho, (&x, &y))| rho * (x - y) * (x - y))
                    .sum();
                let r = r2.sqrt();
                let e = (-SQRT5 * r).exp();
                let k = self.signal_variance * (1.0 + SQRT5 * r + 5.0 * r2 / 3.0) * e;
                let w = -self.signal_variance * (5.0 / 6.0) * (1.0 + SQRT5 * r) * e;
                for (i, &rho) in self.inv_sq_lengthscales.iter().enumerate() {
                    grad[i] = 2.0 * w * rho * (a[i] - b[i]);
                }
                k
            }
            KernelKind::Periodic { period } => {
                let k = self.eval(a, b);
                let c = PI / period;
                for (i, &rho) in self.inv_sq_lengthscales.iter().enumerate() {
                    grad[i] = -2.0 * k * rho * c * (2.0 * c * (a[i] - b[i])).sin();
                }
                k
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_equals_signal_variance() {
        let x = [0.3, -1.2, 4.0];
        for kind in [KernelKind::Matern25, KernelKind::periodic_2pi()] {
            let k = KernelParams::new(kind, 2.5, vec![0.7, 1.3, 0.2]);
            assert!((k.eval(&x, &x) - 2.5).abs() < 1e-14);
        }
    }

    #[test]
    fn periodic_kernel_is_exactly_periodic() {
        let k = KernelParams::new(KernelKind::periodic_2pi(), 1.7, vec![0.5, 2.0]);
        let a = [0.4, 5.1];
        for i in 0..2 {
            let mut b = a;
            b[i] += TAU;
            assert!((k.eval(&a, &b) - k.eval(&a, &a)).abs() < 1e-12);
        }
    }

    #[test]
    fn matern25_matches_the_closed_form_scalar_check() {
        // 1-D, unit hyperparameters, |a - b| = 1:
        // (1 + sqrt5 + 5/3) exp(-sqrt5) = 0.52399411...
        let k = KernelParams::new(KernelKind::Matern25, 1.0, vec![1.0]);
        let expected = (1.0 + SQRT5 + 5.0 / 3.0) * (-SQRT5).exp();
        assert!((expected - 0.52399).abs() < 1e-5);
        assert!((k.eval(&[0.0], &[1.0]) - expected).abs() < 1e-15);
    }

    #[test]
    fn kernel_gradients_match_finite_differences() {
        let a = [0.3, 1.9];
        let b = [-0.6, 0.4];
        let h: f64 = 1e-6;
        for kind in [KernelKind::Matern25, KernelKind::periodic_2pi()] {
            let k = KernelParams::new(kind, 1.4, vec![0.8, 1.7]);
            let mut grad = [0.0; 2];
            k.eval_grad_log_rho(&a, &b, &mut grad);
            for i in 0..2 {
                let mut kp = k.clone();
                kp.inv_sq_lengthscales[i] *= (h).exp();
                let mut km = k.clone();
                km.inv_sq_lengthscales[i] *= (-h).exp();
                let fd = (kp.eval(&a, &b) - km.eval(&a, &b)) / (2.0 * h);
                assert!((grad[i] - fd).abs() < 1e-6, "{kind:?} rho[{i}]: {} vs {fd}", grad[i]);
            }
            let mut grad = [0.0; 2];
            k.eval_grad_input(&a, &b, &mut grad);
            for i in 0..2 {
                let mut ap = a;
                ap[i] += h;
                let mut am = a;
                am[i] -= h;
                let fd = (k.eval(&ap, &b) - k.eval(&am, &b)) / (2.0 * h);
                assert!((grad[i] - fd).abs() < 1e-6, "{kind:?} input[{i}]: {} vs {fd}", grad[i]);
            }
        }
    }
}
