//! Least-squares fitting of the movement-time formulas to condition means,
//! with adjusted R², AIC, leave-one-condition-out cross-validation and
//! Δ-AIC model comparison.
//!
//! The optimizer is a deterministic multi-start Levenberg-Marquardt. Each
//! start fixes the constants that enter non-linearly (width shrink, distance
//! shift) at a grid value and solves the remaining, linear constants by
//! ordinary least squares; the best local optimum over all starts wins. The
//! grid contains the all-zero point, whose linear solve is the plain Fitts
//! regression, so an extended formula never fits worse than its base.
//!
//! AIC uses the least-squares form `n ln(rss/n) + 2(k+1)`; only differences
//! between models fitted to the same data are meaningful.

mod compare;
mod cv;
mod optimizer;

pub use compare::{
    compare, compare_reports, support_category, ComparisonEntry, ComparisonReport, Support,
};
pub use cv::{loocv, CvFold, CvReport};

use serde::{Deserialize, Serialize};

use crate::error::FitError;
use crate::linalg;
use crate::model::{predict_with_gradient, ModelKind, ModelParams, TaskCondition};
use crate::scalar::Scalar;
use optimizer::{levenberg_marquardt, Problem};

/// Grid of starting values for the blur coefficients.
pub const BLUR_COEFFICIENT_GRID: [f64; 7] = [0.0, 0.05, 0.1, 0.5, 1.0, 2.0, 5.0];

/// Extra shrink starts as fractions of the largest admissible shrink.
const SHRINK_FRACTIONS: [f64; 4] = [0.25, 0.5, 0.75, 0.9];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DataPoint<T> {
    pub condition: TaskCondition<T>,
    /// Mean movement time over error-free trials, ms.
    pub mean_mt: T,
    pub n_trials: usize,
}

/// Condition-level means to be fitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset<T> {
    pub label: String,
    points: Vec<DataPoint<T>>,
}

impl<T: Scalar> Dataset<T> {
    /// Conditions must be unique.
    pub fn new(label: impl Into<String>, points: Vec<DataPoint<T>>) -> Result<Self, FitError> {
        for (i, p) in points.iter().enumerate() {
            if points[..i].iter().any(|q| q.condition == p.condition) {
                return Err(FitError::DuplicateCondition {
                    distance: p.condition.distance.to_f64_lossy(),
                    width: p.condition.width.to_f64_lossy(),
                    blur: p.condition.blur.to_f64_lossy(),
                });
            }
        }
        Ok(Self {
            label: label.into(),
            points,
        })
    }

    pub fn points(&self) -> &[DataPoint<T>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The dataset with point `index` removed.
    pub fn without(&self, index: usize) -> Self {
        let mut points = self.points.clone();
        points.remove(index);
        Self {
            label: self.label.clone(),
            points,
        }
    }

    /// Sum of squares of `mean_mt` about its mean.
    pub fn total_sum_of_squares(&self) -> T {
        let n = T::lit(self.points.len() as f64);
        let mean = self.points.iter().map(|p| p.mean_mt).sum::<T>() / n;
        self.points.iter().map(|p| (p.mean_mt - mean).powi(2)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions<T> {
    pub max_iterations: usize,
    /// Relative decrease of the residual sum of squares that ends a local run.
    pub tolerance: T,
    /// Residual assigned to a point whose effective width or distance is not
    /// positive, ms.
    pub penalty: T,
}

impl<T: Scalar> Default for FitOptions<T> {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            tolerance: T::lit(1e-15),
            penalty: T::lit(1e7),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct FitReport<T> {
    pub model: ModelKind,
    pub params: ModelParams<T>,
    pub rss: T,
    /// `None` when undefined (too few points or constant data).
    pub adj_r2: Option<T>,
    /// `-inf` for a perfect fit.
    #[serde(with = "crate::json_float")]
    pub aic: T,
    pub n_points: usize,
    pub iterations: usize,
    pub starts: usize,
}

/// `1 - (1 - R²)(n - 1)/(n - k - 1)` with `R² = 1 - rss/SS_tot`.
pub fn adjusted_r2<T: Scalar>(rss: T, data: &Dataset<T>, k: usize) -> Result<T, FitError> {
    let n = data.len();
    if n <= k + 1 {
        return Err(FitError::Domain(format!(
            "adjusted R\u{b2} needs more than {} points, got {n}",
            k + 1
        )));
    }
    let ss_tot = data.total_sum_of_squares();
    if ss_tot == T::zero() {
        return Err(FitError::ConstantData);
    }
    let r2 = T::one() - rss / ss_tot;
    let n = T::lit(n as f64);
    let k = T::lit(k as f64);
    Ok(T::one() - (T::one() - r2) * (n - T::one()) / (n - k - T::one()))
}

/// Least-squares AIC `n ln(rss/n) + 2(k + 1)`; `-inf` when `rss == 0`.
pub fn aic<T: Scalar>(rss: T, n: usize, k: usize) -> Result<T, FitError> {
    if n == 0 || rss < T::zero() || rss.is_nan() {
        return Err(FitError::Domain(format!(
            "AIC needs n > 0 and rss >= 0 (n={n}, rss={rss})"
        )));
    }
    if rss == T::zero() {
        return Ok(T::neg_infinity());
    }
    let nf = T::lit(n as f64);
    Ok(nf * (rss / nf).ln() + T::lit(2.0 * (k as f64 + 1.0)))
}

/// Fits `kind` to `data` by multi-start bounded Levenberg-Marquardt.
pub fn fit<T: Scalar>(
    kind: ModelKind,
    data: &Dataset<T>,
    opts: &FitOptions<T>,
) -> Result<FitReport<T>, FitError> {
    let k = kind.param_count();
    if data.len() < k + 1 {
        return Err(FitError::TooFewPoints {
            kind: kind.name(),
            needed: k + 1,
            got: data.len(),
        });
    }
    let mut bounded = vec![false; k];
    for s in kind.blur_slots() {
        bounded[s] = true;
    }
    let problem = Problem {
        kind,
        points: data.points(),
        bounded,
        penalty: opts.penalty,
    };

    let mut best: Option<optimizer::Outcome<T>> = None;
    let mut starts = 0;
    let mut any_feasible = false;
    let mut all_unconverged = true;
    for start in start_points(kind, data) {
        if !problem.evaluate(&start).feasible {
            continue;
        }
        any_feasible = true;
        starts += 1;
        let outcome = levenberg_marquardt(&problem, start, opts);
        if !outcome.converged || !problem.evaluate(&outcome.theta).feasible {
            continue;
        }
        all_unconverged = false;
        if best.as_ref().is_none_or(|b| outcome.rss < b.rss) {
            best = Some(outcome);
        }
    }
    let best = match best {
        Some(b) => b,
        None if !any_feasible => return Err(FitError::NoFeasibleStart),
        None if all_unconverged => return Err(FitError::NotConverged(opts.max_iterations)),
        None => return Err(FitError::NoFeasibleStart),
    };

    let params = ModelParams::new(kind, &best.theta).expect("length matches kind");
    let adj_r2 = adjusted_r2(best.rss, data, k).ok();
    Ok(FitReport {
        model: kind,
        params,
        rss: best.rss,
        adj_r2,
        aic: aic(best.rss, data.len(), k)?,
        n_points: data.len(),
        iterations: best.iterations,
        starts,
    })
}

/// Deterministic start vectors: grid over the non-linear constants, linear
/// constants from ordinary least squares given those.
fn start_points<T: Scalar>(kind: ModelKind, data: &Dataset<T>) -> Vec<Vec<T>> {
    let k = kind.param_count();
    let nonlinear: Vec<usize> = [kind.shrink_slot(), kind.shift_slot()]
        .into_iter()
        .flatten()
        .collect();
    let linear: Vec<usize> = (0..k).filter(|s| !nonlinear.contains(s)).collect();

    let max_shrink = data
        .points()
        .iter()
        .filter(|p| p.condition.blur_excess() > T::zero())
        .map(|p| p.condition.width / p.condition.blur_excess())
        .fold(T::infinity(), T::min);
    let grid_for = |slot: usize| -> Vec<T> {
        if Some(slot) != kind.shrink_slot() {
            return BLUR_COEFFICIENT_GRID.iter().map(|&v| T::lit(v)).collect();
        }
        if !max_shrink.is_finite() {
            return vec![T::zero()];
        }
        let mut values: Vec<T> = BLUR_COEFFICIENT_GRID
            .iter()
            .map(|&v| T::lit(v))
            .filter(|&v| v < max_shrink * T::lit(0.95))
            .collect();
        values.extend(SHRINK_FRACTIONS.iter().map(|&f| max_shrink * T::lit(f)));
        values
    };

    let mut combos: Vec<Vec<T>> = vec![vec![]];
    for &slot in &nonlinear {
        let grid = grid_for(slot);
        combos = combos
            .into_iter()
            .flat_map(|prefix| {
                grid.iter().map(move |&v| {
                    let mut next = prefix.clone();
                    next.push(v);
                    next
                })
            })
            .collect();
    }

    combos
        .into_iter()
        .map(|values| {
            let mut theta = vec![T::zero(); k];
            for (&slot, &v) in nonlinear.iter().zip(&values) {
                theta[slot] = v;
            }
            if let Some(lin) = solve_linear(kind, data, &theta, &linear) {
                for (&slot, v) in linear.iter().zip(lin) {
                    theta[slot] = v;
                }
            }
            theta
        })
        .collect()
}

/// With the non-linear constants fixed the formula is linear in the rest,
/// and its gradient with respect to those is the regressor row.
fn solve_linear<T: Scalar>(
    kind: ModelKind,
    data: &Dataset<T>,
    theta: &[T],
    linear: &[usize],
) -> Option<Vec<T>> {
    let params = ModelParams::new(kind, theta).ok()?;
    let mut rows = Vec::with_capacity(data.len());
    let mut y = Vec::with_capacity(data.len());
    for p in data.points() {
        let (offset, grad) = predict_with_gradient(&params, &p.condition).ok()?;
        rows.push(linear.iter().map(|&s| grad[s]).collect::<Vec<T>>());
        y.push(p.mean_mt - offset);
    }
    linalg::least_squares(&rows, &y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::predict_mt;
    use approx::assert_abs_diff_eq;

    fn exp1_grid() -> Vec<TaskCondition<f64>> {
        let mut out = Vec::new();
        for a in [300.0, 500.0] {
            for w in [12.0, 18.0, 36.0, 78.0] {
                for b in [1.0, 21.0, 41.0, 61.0, 81.0, 101.0] {
                    out.push(TaskCondition::new(a, w, b).unwrap());
                }
            }
        }
        out
    }

    fn synth(kind: ModelKind, v: &[f64]) -> Dataset<f64> {
        let p = ModelParams::new(kind, v).unwrap();
        let points = exp1_grid()
            .into_iter()
            .map(|c| DataPoint {
                condition: c,
                mean_mt: predict_mt(&p, &c).unwrap().ms(),
                n_trials: 21,
            })
            .collect();
        Dataset::new("synthetic", points).unwrap()
    }

    #[test]
    fn adjusted_r2_fixtures() {
        let data = synth(ModelKind::OnePart, &[28.6, 237.0]);
        let ss = data.total_sum_of_squares();
        assert_eq!(adjusted_r2(0.0, &data, 2).unwrap(), 1.0);
        assert_abs_diff_eq!(adjusted_r2(ss, &data, 2).unwrap(), -0.0444, epsilon = 1e-4);
        assert_abs_diff_eq!(
            adjusted_r2(0.1 * ss, &data, 4).unwrap(),
            0.8907,
            epsilon = 1e-4
        );

        let flat: Vec<DataPoint<f64>> = data
            .points()
            .iter()
            .map(|p| DataPoint {
                mean_mt: 500.0,
                ..*p
            })
            .collect();
        let flat = Dataset::new("flat", flat).unwrap();
        assert_eq!(adjusted_r2(1.0, &flat, 2), Err(FitError::ConstantData));
    }

    #[test]
    fn aic_fixtures() {
        assert_eq!(aic(48.0, 48, 2).unwrap(), 6.0);
        assert_eq!(aic(123.0, 48, 4).unwrap() - aic(123.0, 48, 2).unwrap(), 4.0);
        assert!(aic(10.0, 48, 3).unwrap() < aic(11.0, 48, 3).unwrap());
        assert_eq!(aic(0.0, 48, 2).unwrap(), f64::NEG_INFINITY);
        assert!(aic(1.0, 0, 2).is_err());
    }

    #[test]
    fn recovers_one_part_exactly() {
        let data = synth(ModelKind::OnePart, &[28.6, 237.0]);
        let r = fit(ModelKind::OnePart, &data, &FitOptions::default()).unwrap();
        assert!(r.rss < 1e-12);
        assert_abs_diff_eq!(r.params.a(), 28.6, epsilon = 28.6 * 1e-6);
        assert_abs_diff_eq!(r.params.b(), 237.0, epsilon = 237.0 * 1e-6);
    }

    #[test]
    fn recovers_distance_and_width_model() {
        let truth = [56.8, 200.0, 0.0738, 1.88];
        let data = synth(ModelKind::OnePartABShift, &truth);
        let r = fit(ModelKind::OnePartABShift, &data, &FitOptions::default()).unwrap();
        for (got, want) in r.params.values().iter().zip(truth) {
            assert_abs_diff_eq!(*got, want, epsilon = want.abs() * 1e-3);
        }
    }

    #[test]
    fn too_few_points() {
        let data = synth(ModelKind::OnePart, &[28.6, 237.0]);
        let small = Dataset::new("small", data.points()[..4].to_vec()).unwrap();
        assert!(matches!(
            fit(ModelKind::TwoPartABShift, &small, &FitOptions::default()),
            Err(FitError::TooFewPoints {
                needed: 6,
                got: 4,
                ..
            })
        ));
    }

    #[test]
    fn duplicate_conditions_rejected() {
        let data = synth(ModelKind::OnePart, &[28.6, 237.0]);
        let mut pts = data.points()[..3].to_vec();
        pts.push(pts[0]);
        assert!(matches!(
            Dataset::new("dup", pts),
            Err(FitError::DuplicateCondition { .. })
        ));
    }

    #[test]
    fn fit_is_deterministic() {
        let mut data = synth(
            ModelKind::TwoPartABShift,
            &[-31.6, 204.0, 1.67, 153.0, 0.0812],
        );
        for (i, p) in data.points.iter_mut().enumerate() {
            p.mean_mt += ((i * 37 % 11) as f64 - 5.0) * 6.0;
        }
        let opts = FitOptions::default();
        let a = fit(ModelKind::TwoPartABShift, &data, &opts).unwrap();
        let b = fit(ModelKind::TwoPartABShift, &data, &opts).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn translation_changes_only_intercept() {
        let mut data = synth(ModelKind::OnePartABShift, &[56.8, 200.0, 0.0738, 1.88]);
        for (i, p) in data.points.iter_mut().enumerate() {
            p.mean_mt += ((i * 7 % 5) as f64 - 2.0) * 9.0;
        }
        let mut shifted = data.clone();
        for p in &mut shifted.points {
            p.mean_mt += 250.0;
        }
        for kind in ModelKind::ALL {
            let base = fit(kind, &data, &FitOptions::default()).unwrap();
            let moved = fit(kind, &shifted, &FitOptions::default()).unwrap();
            assert_abs_diff_eq!(
                moved.params.a() - base.params.a(),
                250.0,
                epsilon = 1e-6 * 250.0
            );
            for (x, y) in base
                .params
                .values()
                .iter()
                .zip(moved.params.values())
                .skip(1)
            {
                assert_abs_diff_eq!(*x, y, epsilon = 1e-6 * x.abs().max(1.0));
            }
        }
    }

    #[test]
    fn boundary_optimum_is_reached() {
        // Truth has no distance shift; the fit must sit on d = 0, not below.
        let data = synth(ModelKind::OnePartABShift, &[90.0, 210.0, 0.05, 0.0]);
        let r = fit(ModelKind::OnePartABShift, &data, &FitOptions::default()).unwrap();
        assert!(r.params.d().unwrap() >= 0.0);
        assert!(r.params.d().unwrap() < 1e-6);
        assert!(r.rss < 1e-8);
    }

    #[test]
    fn report_json_round_trip() {
        let data = synth(ModelKind::OnePart, &[28.6, 237.0]);
        let r = fit(ModelKind::OnePart, &data, &FitOptions::default()).unwrap();
        let s = serde_json::to_string(&r).unwrap();
        let back: FitReport<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }
}
