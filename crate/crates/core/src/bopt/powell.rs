//! Powell's conjugate-direction method, budgeted by objective evaluations.
//!
//! Cycles of line minimizations along a direction set initialized to the
//! coordinate axes; after each cycle the direction of largest decrease may
//! be replaced by the cycle's net displacement (the standard Powell update).
//! Line searches use golden-section bracketing with a hard cap on
//! evaluations. Every objective call is logged; the run stops exactly at
//! `max_evals` calls, restarting with fresh axes if it converges early so a
//! budgeted benchmark keeps sampling.

use super::engine::{Fidelity, Objective};
use super::BoptError;
use crate::record::{IterationRow, RunRecord};

const GOLD: f64 = 1.618033988749895;
const INV_GOLD: f64 = 0.6180339887498949;

#[derive(Debug, Clone)]
pub struct PowellOptions {
    /// Total number of objective evaluations (each costs one budget unit).
    pub max_evals: usize,
    /// Initial bracketing step along each direction.
    pub initial_step: f64,
    /// Positional tolerance of each golden-section search.
    pub line_tol: f64,
    /// Evaluation cap per line search.
    pub max_line_evals: usize,
}

impl Default for PowellOptions {
    fn default() -> Self {
        Self {
            max_evals: 150,
            initial_step: 1.0,
            line_tol: 1e-8,
            max_line_evals: 40,
        }
    }
}

struct Recorder<'a, O: Objective> {
    objective: &'a mut O,
    max_evals: usize,
    rows: Vec<IterationRow>,
    best: f64,
}

impl<O: Objective> Recorder<'_, O> {
    fn eval(&mut self, theta: &[f64]) -> Option<f64> {
        if self.rows.len() >= self.max_evals {
            return None;
        }
        let y = self.objective.eval(theta, Fidelity::High);
        self.best = self.best.min(y);
        self.rows.push(IterationRow {
            iteration: self.rows.len() + 1,
            cumulative_cost: (self.rows.len() + 1) as f64,
            theta: theta.to_vec(),
            observed_energy: y,
            best_observed: self.best,
            incumbent_eta: None,
        });
        Some(y)
    }
}

/// Minimize along `p + t*dir`; moves `p` to the best point and returns its
/// value. `None` means the evaluation budget ran out mid-search.
fn line_minimize<O: Objective>(
    rec: &mut Recorder<O>,
    p: &mut [f64],
    fp: f64,
    dir: &[f64],
    options: &PowellOptions,
) -> Option<f64> {
    let at = |p: &[f64], t: f64| -> Vec<f64> {
        p.iter().zip(dir).map(|(x, d)| x + t * d).collect()
    };
    let mut evals = 0usize;
    let budgeted =
        |rec: &mut Recorder<O>, evals: &mut usize, t: f64, p: &[f64]| -> Option<f64> {
            *evals += 1;
            rec.eval(&at(p, t))
        };

    // bracket the minimum: walk downhill with golden expansion
    let mut a = 0.0;
    let mut fa = fp;
    let mut b = options.initial_step;
    let mut fb = budgeted(rec, &mut evals, b, p)?;
    if fb > fa {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let mut c = b + GOLD * (b - a);
    let mut fc = budgeted(rec, &mut evals, c, p)?;
    while fc < fb && evals < options.max_line_evals {
        let step = c + GOLD * (c - b);
        a = b;
        fa = fb;
        b = c;
        fb = fc;
        c = step;
        fc = budgeted(rec, &mut evals, c, p)?;
    }
    let _ = fa;

    // golden-section inside [a, c] (fb <= fa, fb <= fc)
    let (mut lo, mut hi) = if a < c { (a, c) } else { (c, a) };
    let mut x1 = hi - INV_GOLD * (hi - lo);
    let mut x2 = lo + INV_GOLD * (hi - lo);
    let mut f1 = budgeted(rec, &mut evals, x1, p)?;
    let mut f2 = budgeted(rec, &mut evals, x2, p)?;
    while (hi - lo).abs() > options.line_tol && evals < options.max_line_evals {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_GOLD * (hi - lo);
            f1 = budgeted(rec, &mut evals, x1, p)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_GOLD * (hi - lo);
            f2 = budgeted(rec, &mut evals, x2, p)?;
        }
    }
    let (t_best, f_best) = if f1 < f2 { (x1, f1) } else { (x2, f2) };
    let (t_best, f_best) = if fb < f_best { (b, fb) } else { (t_best, f_best) };
    if f_best <= fp {
        let moved = at(p, t_best);
        p.copy_from_slice(&moved);
        Some(f_best)
    } else {
        Some(fp)
    }
}

/// Run Powell's method from `theta0` for exactly `max_evals` objective
/// calls, logging every call.
pub fn powell_run<O: Objective>(
    objective: &mut O,
    theta0: &[f64],
    options: &PowellOptions,
) -> Result<RunRecord, BoptError> {
    let dim = objective.dim();
    if options.max_evals < dim + 1 {
        return Err(BoptError::Config(format!(
            "max_evals {} must be at least dim + 1 = {}",
            options.max_evals,
            dim + 1
        )));
    }
    let mut rec = Recorder {
        objective,
        max_evals: options.max_evals,
        rows: Vec::new(),
        best: f64::INFINITY,
    };
    let axes = |scale: f64| -> Vec<Vec<f64>> {
        (0..dim)
            .map(|i| {
                let mut e = vec![0.0; dim];
                e[i] = scale;
                e
            })
            .collect()
    };

    'outer: loop {
        let mut dirs = axes(1.0);
        let mut p = theta0.to_vec();
        if !rec.rows.is_empty() {
            // restart from the best point seen so far
            let best_row = rec
                .rows
                .iter()
                .min_by(|a, b| a.observed_energy.partial_cmp(&b.observed_energy).unwrap())
                .unwrap();
            p = best_row.theta.clone();
        }
        let Some(mut fp) = rec.eval(&p) else {
            break 'outer;
        };
        loop {
            let p_start = p.clone();
            let f_start = fp;
            let mut biggest_drop = 0.0;
            let mut drop_index = 0;
            for (i, dir) in dirs.iter().enumerate() {
                let f_before = fp;
                let Some(f_new) = line_minimize(&mut rec, &mut p, fp, dir, options) else {
                    break 'outer;
                };
                fp = f_new;
                if f_before - fp > biggest_drop {
                    biggest_drop = f_before - fp;
                    drop_index = i;
                }
            }
            // converged within this direction set: restart with fresh axes
            if 2.0 * (f_start - fp) <= 1e-12 * (f_start.abs() + fp.abs()) + 1e-300 {
                continue 'outer;
            }
            // Powell's direction-replacement test on the extrapolated point
            let extrapolated: Vec<f64> = p
                .iter()
                .zip(&p_start)
                .map(|(x, x0)| 2.0 * x - x0)
                .collect();
            let Some(f_e) = rec.eval(&extrapolated) else {
                break 'outer;
            };
            if f_e < f_start {
                let t = 2.0 * (f_start - 2.0 * fp + f_e)
                    * (f_start - fp - biggest_drop).powi(2)
                    - biggest_drop * (f_start - f_e).powi(2);
                if t < 0.0 {
                    let new_dir: Vec<f64> =
                        p.iter().zip(&p_start).map(|(x, x0)| x - x0).collect();
                    let Some(f_new) = line_minimize(&mut rec, &mut p, fp, &new_dir, options)
                    else {
                        break 'outer;
                    };
                    fp = f_new;
                    dirs.remove(drop_index);
                    dirs.push(new_dir);
                }
            }
        }
    }
    Ok(RunRecord {
        arm: String::new(),
        seed: 0,
        rows: rec.rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bopt::FnObjective;

    #[test]
    fn quadratic_line_converges_to_the_vertex() {
        let mut objective = FnObjective {
            dim: 1,
            f: |t: &[f64], _| (t[0] - 1.0).powi(2),
        };
        let options = PowellOptions {
            max_evals: 200,
            ..Default::default()
        };
        let record = powell_run(&mut objective, &[4.0], &options).unwrap();
        let best = record
            .rows
            .iter()
            .min_by(|a, b| a.observed_energy.partial_cmp(&b.observed_energy).unwrap())
            .unwrap();
        assert!((best.theta[0] - 1.0).abs() < 1e-6, "{}", best.theta[0]);
        assert!(best.observed_energy < 1e-12);
    }

    #[test]
    fn rosenbrock_reaches_the_known_minimum() {
        let mut objective = FnObjective {
            dim: 2,
            f: |t: &[f64], _| (1.0 - t[0]).powi(2) + 100.0 * (t[1] - t[0] * t[0]).powi(2),
        };
        let options = PowellOptions {
            max_evals: 1500,
            ..Default::default()
        };
        let record = powell_run(&mut objective, &[-1.2, 1.0], &options).unwrap();
        let best = record.rows.last().unwrap().best_observed;
        assert!(best < 1e-4, "best {best}");
    }

    #[test]
    fn every_call_is_logged_and_budget_is_exact() {
        let mut calls = 0usize;
        let mut objective = FnObjective {
            dim: 2,
            f: |t: &[f64], _| {
                calls += 1;
                t[0].sin() + t[1].cos()
            },
        };
        let options = PowellOptions {
            max_evals: 77,
            ..Default::default()
        };
        let record = powell_run(&mut objective, &[0.3, 0.4], &options).unwrap();
        assert_eq!(calls, 77);
        assert_eq!(record.rows.len(), 77);
        assert_eq!(record.rows.last().unwrap().cumulative_cost, 77.0);
        let mut best = f64::INFINITY;
        for row in &record.rows {
            best = best.min(row.observed_energy);
            assert_eq!(row.best_observed, best);
        }
    }

    #[test]
    fn budget_below_dimension_is_rejected() {
        let mut objective = FnObjective {
            dim: 4,
            f: |_: &[f64], _| 0.0,
        };
        let options = PowellOptions {
            max_evals: 4,
            ..Default::default()
        };
        assert!(matches!(
            powell_run(&mut objective, &[0.0; 4], &options),
            Err(BoptError::Config(_))
        ));
    }
}
