//! Levenberg-Marquardt with non-negativity bounds on selected constants.
//!
//! Points where a trial parameter vector drives a logarithm argument to or
//! below zero get a fixed penalty residual, so the objective stays finite and
//! such steps are simply rejected.

use super::{DataPoint, FitOptions};
use crate::linalg;
use crate::model::{predict_with_gradient, ModelKind, ModelParams};
use crate::scalar::Scalar;

pub(crate) struct Problem<'a, T> {
    pub kind: ModelKind,
    pub points: &'a [DataPoint<T>],
    /// `bounded[j]`: constant `j` must stay `>= 0`.
    pub bounded: Vec<bool>,
    pub penalty: T,
}

pub(crate) struct Evaluation<T> {
    pub residuals: Vec<T>,
    /// Row-major `n x k` Jacobian of the model (not of the residuals).
    pub jacobian: Vec<T>,
    pub rss: T,
    pub feasible: bool,
}

#[derive(Debug, Clone)]
pub(crate) struct Outcome<T> {
    pub theta: Vec<T>,
    pub rss: T,
    pub iterations: usize,
    pub converged: bool,
}

impl<T: Scalar> Problem<'_, T> {
    pub fn evaluate(&self, theta: &[T]) -> Evaluation<T> {
        let k = theta.len();
        let params = ModelParams::new(self.kind, theta).expect("theta length matches kind");
        let mut residuals = Vec::with_capacity(self.points.len());
        let mut jacobian = Vec::with_capacity(self.points.len() * k);
        let mut feasible = true;
        for p in self.points {
            match predict_with_gradient(&params, &p.condition) {
                Ok((mt, grad)) if mt.is_finite() => {
                    residuals.push(p.mean_mt - mt);
                    jacobian.extend_from_slice(&grad[..k]);
                }
                _ => {
                    feasible = false;
                    residuals.push(self.penalty);
                    jacobian.extend(std::iter::repeat_n(T::zero(), k));
                }
            }
        }
        let rss = residuals.iter().map(|&r| r * r).sum();
        Evaluation {
            residuals,
            jacobian,
            rss,
            feasible,
        }
    }

    pub fn project(&self, theta: &mut [T]) {
        for (v, &b) in theta.iter_mut().zip(&self.bounded) {
            if b && *v < T::zero() {
                *v = T::zero();
            }
        }
    }
}

pub(crate) fn levenberg_marquardt<T: Scalar>(
    problem: &Problem<'_, T>,
    start: Vec<T>,
    opts: &FitOptions<T>,
) -> Outcome<T> {
    let k = start.len();
    let ftol = opts.tolerance.max(T::epsilon() * T::lit(4.0));
    let mut theta = start;
    problem.project(&mut theta);
    let mut eval = problem.evaluate(&theta);
    let mut lambda = T::lit(1e-3);
    let lambda_max = T::lit(1e20);

    for iteration in 0..opts.max_iterations {
        if eval.rss == T::zero() {
            return Outcome {
                theta,
                rss: eval.rss,
                iterations: iteration,
                converged: true,
            };
        }
        let n = eval.residuals.len();
        let mut g = vec![T::zero(); k];
        let mut h = vec![T::zero(); k * k];
        for i in 0..n {
            let row = &eval.jacobian[i * k..(i + 1) * k];
            let r = eval.residuals[i];
            for a in 0..k {
                g[a] = g[a] + row[a] * r;
                for b in 0..k {
                    h[a * k + b] = h[a * k + b] + row[a] * row[b];
                }
            }
        }
        // Constants pinned at their bound with the descent direction pointing out.
        let free: Vec<usize> = (0..k)
            .filter(|&j| !(problem.bounded[j] && theta[j] <= T::zero() && g[j] <= T::zero()))
            .collect();
        if free.is_empty() || free.iter().all(|&j| g[j] == T::zero()) {
            return Outcome {
                theta,
                rss: eval.rss,
                iterations: iteration,
                converged: true,
            };
        }

        loop {
            let m = free.len();
            let mut a = vec![T::zero(); m * m];
            let mut rhs = vec![T::zero(); m];
            for (ri, &i) in free.iter().enumerate() {
                rhs[ri] = g[i];
                for (ci, &j) in free.iter().enumerate() {
                    a[ri * m + ci] = h[i * k + j];
                }
                let diag = h[i * k + i].max(T::min_positive_value().sqrt());
                a[ri * m + ri] = a[ri * m + ri] + lambda * diag;
            }
            let Some(delta) = linalg::solve(a, rhs) else {
                lambda = lambda * T::lit(10.0);
                if lambda > lambda_max {
                    return Outcome {
                        theta,
                        rss: eval.rss,
                        iterations: iteration,
                        converged: true,
                    };
                }
                continue;
            };
            let mut trial = theta.clone();
            for (&j, &d) in free.iter().zip(&delta) {
                trial[j] = trial[j] + d;
            }
            problem.project(&mut trial);
            let next = problem.evaluate(&trial);
            if next.rss < eval.rss {
                let decrease = (eval.rss - next.rss) / eval.rss;
                let step = trial.iter().zip(&theta).fold(T::zero(), |acc, (&x, &y)| {
                    acc.max((x - y).abs() / (y.abs() + T::one()))
                });
                theta = trial;
                eval = next;
                lambda = (lambda / T::lit(10.0)).max(T::lit(1e-12));
                if decrease <= ftol || step <= ftol {
                    return Outcome {
                        theta,
                        rss: eval.rss,
                        iterations: iteration + 1,
                        converged: true,
                    };
                }
                break;
            }
            lambda = lambda * T::lit(10.0);
            if lambda > lambda_max {
                return Outcome {
                    theta,
                    rss: eval.rss,
                    iterations: iteration + 1,
                    converged: true,
                };
            }
        }
    }
    Outcome {
        theta,
        rss: eval.rss,
        iterations: opts.max_iterations,
        converged: false,
    }
}
