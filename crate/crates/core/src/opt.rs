//! Shared optimization utilities: low-discrepancy sequences, Adam, and a
//! backtracking gradient-descent refiner used for hyperparameter fits and
//! acquisition optimization.

/// First `n` primes (Halton bases).
fn primes(n: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(n);
    let mut candidate = 2u64;
    while out.len() < n {
        if out.iter().all(|&p| candidate % p != 0) {
            out.push(candidate);
        }
        candidate += 1;
    }
    out
}

/// Radical-inverse of `index` in the given base (van der Corput).
fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let mut result = 0.0;
    let mut frac = 1.0 / base as f64;
    while index > 0 {
        result += (index % base) as f64 * frac;
        index /= base;
        frac /= base as f64;
    }
    result
}

/// `count` Halton points in `[0, 1)^dim`, optionally rotated modulo 1 by a
/// per-dimension shift (a Cranley-Patterson rotation keeps the low
/// discrepancy while decorrelating repeated uses).
pub fn halton_points(count: usize, dim: usize, shift: Option<&[f64]>) -> Vec<Vec<f64>> {
    let bases = primes(dim);
    (0..count)
        .map(|i| {
            bases
                .iter()
                .enumerate()
                .map(|(j, &b)| {
                    let mut u = radical_inverse(i as u64 + 1, b);
                    if let Some(s) = shift {
                        u = (u + s[j]).fract();
                    }
                    u
                })
                .collect()
        })
        .collect()
}

/// Scale unit-cube points into `[lo, hi)^dim`.
pub fn scale_points(points: &mut [Vec<f64>], lo: f64, hi: f64) {
    for p in points.iter_mut() {
        for x in p.iter_mut() {
            *x = lo + *x * (hi - lo);
        }
    }
}

/// Adam with the usual bias correction; `step` moves `params` downhill.
#[derive(Debug, Clone)]
pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Adam {
    pub fn new(dim: usize, lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; dim],
            v: vec![0.0; dim],
            t: 0,
        }
    }

    pub fn set_lr(&mut self, lr: f64) {
        self.lr = lr;
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let b1t = 1.0 - self.beta1.powi(self.t as i32);
        let b2t = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grad[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grad[i] * grad[i];
            let m_hat = self.m[i] / b1t;
            let v_hat = self.v[i] / b2t;
            params[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

/// Options for [`gradient_descent`].
#[derive(Debug, Clone)]
pub struct DescentOptions {
    pub max_steps: usize,
    /// Stop when the accepted step moves less than this (L2 norm).
    pub tol: f64,
    pub initial_step: f64,
    /// Wrap every coordinate modulo this period after each step.
    pub wrap: Option<f64>,
}

impl Default for DescentOptions {
    fn default() -> Self {
        Self {
            max_steps: 200,
            tol: 1e-6,
            initial_step: 0.25,
            wrap: None,
        }
    }
}

/// Gradient descent with a backtracking (Armijo) line search.
///
/// `f` returns `(value, gradient)`. Returns the best point seen and its
/// value. Deterministic: no randomness is consumed.
pub fn gradient_descent<F>(f: F, start: &[f64], opts: &DescentOptions) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let wrap = |x: &mut Vec<f64>| {
        if let Some(p) = opts.wrap {
            for xi in x.iter_mut() {
                *xi = xi.rem_euclid(p);
            }
        }
    };
    let mut x = start.to_vec();
    wrap(&mut x);
    let (mut fx, mut gx) = f(&x);
    let mut step = opts.initial_step;
    for _ in 0..opts.max_steps {
        let g_norm_sq: f64 = gx.iter().map(|g| g * g).sum();
        if g_norm_sq.sqrt() < 1e-14 {
            break;
        }
        let mut accepted = false;
        let mut t = step;
        for _ in 0..25 {
            let mut cand: Vec<f64> = x.iter().zip(&gx).map(|(xi, gi)| xi - t * gi).collect();
            wrap(&mut cand);
            let (fc, gc) = f(&cand);
            if fc <= fx - 1e-4 * t * g_norm_sq {
                let moved: f64 = x
                    .iter()
                    .zip(&cand)
                    .map(|(a, b)| {
                        let mut d = (a - b).abs();
                        if let Some(p) = opts.wrap {
                            d = d.min(p - d);
                        }
                        d * d
                    })
                    .sum::<f64>()
                    .sqrt();
                x = cand;
                fx = fc;
                gx = gc;
                accepted = true;
                step = (t * 1.6).min(opts.initial_step * 8.0);
                if moved < opts.tol {
                    return (x, fx);
                }
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (x, fx)
}

/// Run [`gradient_descent`] from every start and keep the best result;
/// ties break toward the lowest start index.
pub fn multistart_minimize<F>(
    f: &F,
    starts: &[Vec<f64>],
    opts: &DescentOptions,
) -> Option<(Vec<f64>, f64)>
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let mut best: Option<(Vec<f64>, f64)> = None;
    for start in starts {
        let (x, fx) = gradient_descent(&f, start, opts);
        match &best {
            Some((_, fb)) if *fb <= fx => {}
            _ => best = Some((x, fx)),
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halton_is_deterministic_and_in_range() {
        let a = halton_points(100, 5, None);
        let b = halton_points(100, 5, None);
        assert_eq!(a, b);
        for p in &a {
            for &x in p {
                assert!((0.0..1.0).contains(&x));
            }
        }
        // base 2 first coordinate: 1/2, 1/4, 3/4, ...
        assert!((a[0][0] - 0.5).abs() < 1e-15);
        assert!((a[1][0] - 0.25).abs() < 1e-15);
        assert!((a[2][0] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn descent_finds_quadratic_minimum() {
        let f = |x: &[f64]| {
            let v = (x[0] - 1.5).powi(2) + 2.0 * (x[1] + 0.5).powi(2);
            (v, vec![2.0 * (x[0] - 1.5), 4.0 * (x[1] + 0.5)])
        };
        let (x, _) = gradient_descent(f, &[4.0, 4.0], &DescentOptions::default());
        assert!((x[0] - 1.5).abs() < 1e-5 && (x[1] + 0.5).abs() < 1e-5);
    }

    #[test]
    fn adam_reduces_a_convex_loss() {
        let mut params = vec![3.0, -2.0];
        let mut adam = Adam::new(2, 0.1);
        for _ in 0..400 {
            let grad = vec![2.0 * params[0], 2.0 * params[1]];
            adam.step(&mut params, &grad);
        }
        assert!(params[0].abs() < 1e-2 && params[1].abs() < 1e-2);
    }
}
