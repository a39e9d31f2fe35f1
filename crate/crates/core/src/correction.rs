//! Target-size and target-distance corrections that make the predicted
//! movement time under blur equal to the unblurred prediction.
//!
//! Only the distance-and-width blur model ([`ModelKind::OnePartABShift`]) has
//! closed-form corrections:
//!
//! * width only: `dW = (B-1)(cA + dW) / A`
//! * distance only: `dA = (B-1)(d + cA/W)`
//! * joint: any pair with `dW = -(W/A) dA + (B-1)(cA + dW)/A`, which keeps
//!   `A/W = (A' + d(B-1)) / (W' - c(B-1))`.
//!
//! The closed forms need only field arithmetic and also accept exact
//! rationals. [`delta_w_numeric`] solves the equal-time condition by
//! bisection and serves as an independent check.

use serde::{Deserialize, Serialize};

use crate::error::{CorrectionError, ModelError};
use crate::model::{predict_mt, ModelKind, ModelParams, TaskCondition};
use crate::scalar::{Field, Scalar};

/// How the blur penalty is compensated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CorrectionPolicy<T> {
    WidthOnly,
    DistanceOnly,
    /// Reduce the distance by `delta_a` and make up the rest with width.
    Joint {
        delta_a: T,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrectionResult<T> {
    pub condition: TaskCondition<T>,
    pub policy: CorrectionPolicy<T>,
    pub delta_w: T,
    pub delta_a: T,
    #[serde(rename = "corrected_W")]
    pub corrected_width: T,
    #[serde(rename = "corrected_A")]
    pub corrected_distance: T,
    /// `corrected_width` rounded to the nearest pixel, ties away from zero.
    #[serde(rename = "rounded_W")]
    pub rounded_width: i64,
    pub feasible: bool,
}

struct Coefficients<T> {
    shrink: T,
    shift: T,
}

fn coefficients<T: Copy>(params: &ModelParams<T>) -> Result<Coefficients<T>, CorrectionError> {
    match (params.kind(), params.c(), params.d()) {
        (ModelKind::OnePartABShift, Some(shrink), Some(shift)) => {
            Ok(Coefficients { shrink, shift })
        }
        (kind, _, _) => Err(CorrectionError::UnsupportedModel(kind.name())),
    }
}

/// Width increase that restores the unblurred movement time.
pub fn delta_w_closed_form<T: Field>(
    params: &ModelParams<T>,
    cond: &TaskCondition<T>,
) -> Result<T, CorrectionError> {
    let k = coefficients(params)?;
    if cond.distance == T::zero() {
        return Err(CorrectionError::Domain(
            "distance A must be non-zero".into(),
        ));
    }
    Ok(cond.blur_excess() * (k.shrink * cond.distance + k.shift * cond.width) / cond.distance)
}

/// Distance reduction that restores the unblurred movement time with `W` fixed.
pub fn delta_a<T: Field>(
    params: &ModelParams<T>,
    cond: &TaskCondition<T>,
) -> Result<T, CorrectionError> {
    let k = coefficients(params)?;
    if cond.width == T::zero() {
        return Err(CorrectionError::Domain("width W must be non-zero".into()));
    }
    Ok(cond.blur_excess() * (k.shift + k.shrink * cond.distance / cond.width))
}

/// Width change that complements a chosen distance reduction `delta_a`.
pub fn delta_w_given_delta_a<T: Field>(
    params: &ModelParams<T>,
    cond: &TaskCondition<T>,
    delta_a: T,
) -> Result<T, CorrectionError> {
    let full = delta_w_closed_form(params, cond)?;
    Ok(full - cond.width / cond.distance * delta_a)
}

/// Solves `MT(A, W + dW, B) = MT(A, W, 1)` for `dW` by bisection on
/// `[0, 10 W B]`.
pub fn delta_w_numeric<T: Scalar>(
    params: &ModelParams<T>,
    cond: &TaskCondition<T>,
) -> Result<T, CorrectionError> {
    coefficients(params)?;
    if !(cond.distance > T::zero()) {
        return Err(CorrectionError::Domain(
            "distance A must be positive".into(),
        ));
    }
    let target = predict_mt(params, &cond.with_blur(T::one()))?.ms();
    let gap = |dw: T| -> Result<T, CorrectionError> {
        match predict_mt(params, &cond.with_width(cond.width + dw)) {
            Ok(mt) => Ok(mt.ms() - target),
            // Collapsed width: the movement time is unbounded, i.e. above target.
            Err(ModelError::EffectiveWidth { .. }) => Ok(T::infinity()),
            Err(e) => Err(e.into()),
        }
    };

    let tol = T::lit(1e-12).max(T::epsilon() * target.abs() * T::lit(8.0));
    let mut lo = T::zero();
    let mut hi = T::lit(10.0) * cond.width * cond.blur;
    let f_lo = gap(lo)?;
    if f_lo.abs() <= tol {
        return Ok(lo);
    }
    let f_hi = gap(hi)?;
    if f_lo.signum() == f_hi.signum() {
        return Err(CorrectionError::Solver(format!(
            "no sign change on [0, {}]: f(lo)={}, f(hi)={}",
            hi.to_f64_lossy(),
            f_lo.to_f64_lossy(),
            f_hi.to_f64_lossy()
        )));
    }
    let lo_positive = f_lo > T::zero();
    for _ in 0..300 {
        let mid = (lo + hi) / (T::one() + T::one());
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let f_mid = gap(mid)?;
        if f_mid.abs() <= tol {
            return Ok(mid);
        }
        if (f_mid > T::zero()) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) / (T::one() + T::one()))
}

/// Applies a correction policy and records the outcome. Infeasible
/// corrections are returned with `feasible == false`, never clamped.
pub fn correct_condition<T: Scalar>(
    params: &ModelParams<T>,
    cond: &TaskCondition<T>,
    policy: CorrectionPolicy<T>,
) -> Result<CorrectionResult<T>, CorrectionError> {
    let k = coefficients(params)?;
    let (delta_w, delta_a) = match policy {
        CorrectionPolicy::WidthOnly => (delta_w_closed_form(params, cond)?, T::zero()),
        CorrectionPolicy::DistanceOnly => (T::zero(), delta_a(params, cond)?),
        CorrectionPolicy::Joint { delta_a } => {
            (delta_w_given_delta_a(params, cond, delta_a)?, delta_a)
        }
    };
    let corrected_width = cond.width + delta_w;
    let corrected_distance = cond.distance - delta_a;
    let effective = corrected_width - k.shrink * cond.blur_excess();
    let feasible = corrected_distance > T::zero() && effective > T::zero();
    let rounded_width = corrected_width
        .round()
        .to_i64()
        .ok_or_else(|| CorrectionError::Domain("corrected width is not finite".into()))?;
    Ok(CorrectionResult {
        condition: *cond,
        policy,
        delta_w,
        delta_a,
        corrected_width,
        corrected_distance,
        rounded_width,
        feasible,
    })
}
