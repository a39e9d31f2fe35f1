//! Task conditions, blur levels and the eight movement-time formulas.
//!
//! Distances and widths are in pixels, the blur level `B` is the Gaussian
//! kernel size in pixels and movement times are in milliseconds. Every
//! blur-extended formula collapses to its base formula at `B = 1`.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Term};
use crate::scalar::{Field, Scalar};

/// One `(A, W, B)` cell of an experimental design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskCondition<T> {
    /// Center-to-center target distance `A`, pixels.
    #[serde(rename = "A")]
    pub distance: T,
    /// Target diameter `W`, pixels.
    #[serde(rename = "W")]
    pub width: T,
    /// Blur level `B` as kernel size, pixels.
    #[serde(rename = "B")]
    pub blur: T,
}

impl<T: Field> TaskCondition<T> {
    /// Validated constructor: `A > 0`, `W > 0`, `B` an odd integer `>= 1`.
    pub fn new(distance: T, width: T, blur: T) -> Result<Self, ModelError> {
        let cond = Self::new_unchecked(distance, width, blur);
        cond.validate()?;
        Ok(cond)
    }

    /// No validation; `predict_mt` accepts fractional or even blur values.
    pub const fn new_unchecked(distance: T, width: T, blur: T) -> Self {
        Self {
            distance,
            width,
            blur,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let zero = T::zero();
        let one = T::one();
        if !(self.distance > zero) {
            return Err(ModelError::Domain(format!(
                "distance A must be positive, got {:?}",
                self.distance
            )));
        }
        if !(self.width > zero) {
            return Err(ModelError::Domain(format!(
                "width W must be positive, got {:?}",
                self.width
            )));
        }
        if !(self.blur >= one) || self.blur % crate::scalar::two() != one {
            return Err(ModelError::Domain(format!(
                "blur B must be an odd integer >= 1, got {:?}",
                self.blur
            )));
        }
        Ok(())
    }

    /// `B - 1`, the factor every blur term scales with.
    #[inline]
    pub fn blur_excess(&self) -> T {
        self.blur - T::one()
    }

    pub fn with_width(self, width: T) -> Self {
        Self { width, ..self }
    }

    pub fn with_distance(self, distance: T) -> Self {
        Self { distance, ..self }
    }

    pub fn with_blur(self, blur: T) -> Self {
        Self { blur, ..self }
    }
}

impl<T: Scalar> TaskCondition<T> {
    pub fn index_of_difficulty(&self) -> Result<T, ModelError> {
        index_of_difficulty(self.distance, self.width)
    }
}

/// Shannon index of difficulty `log2(A/W + 1)` in bits.
pub fn index_of_difficulty<T: Scalar>(distance: T, width: T) -> Result<T, ModelError> {
    if !(distance > T::zero()) || !(width > T::zero()) {
        return Err(ModelError::Domain(format!(
            "index of difficulty needs A > 0 and W > 0, got A={distance}, W={width}"
        )));
    }
    Ok((distance / width + T::one()).log2())
}

/// Width left after blur shrinkage, `W - c(B - 1)`. May be non-positive;
/// consumers that take a logarithm must reject that case.
#[inline]
pub fn effective_width<T: Field>(width: T, blur: T, coefficient: T) -> T {
    width - coefficient * (blur - T::one())
}

/// A Gaussian blur level specified by its (odd) kernel size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct BlurLevel(u32);

impl BlurLevel {
    pub fn new(ksize: u32) -> Result<Self, ModelError> {
        if ksize == 0 || ksize.is_multiple_of(2) {
            return Err(ModelError::Domain(format!(
                "kernel size must be an odd positive integer, got {ksize}"
            )));
        }
        Ok(Self(ksize))
    }

    pub fn ksize(self) -> u32 {
        self.0
    }

    /// Standard deviation of the matching Gaussian kernel.
    pub fn sigma<T: Scalar>(self) -> T {
        // 0.3((k-1)/2 - 1) + 0.8 == (3k + 7) / 20; the integer form rounds once.
        T::lit(f64::from(3 * self.0 + 7)) / T::lit(20.0)
    }

    pub fn sigma_exact(self) -> Ratio<i64> {
        Ratio::new(3 * i64::from(self.0) + 7, 20)
    }
}

impl TryFrom<u32> for BlurLevel {
    type Error = ModelError;

    fn try_from(value: u32) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<BlurLevel> for u32 {
    fn from(value: BlurLevel) -> Self {
        value.0
    }
}

/// Gaussian standard deviation for an odd kernel size.
pub fn sigma_from_ksize<T: Scalar>(ksize: i64) -> Result<T, ModelError> {
    let level = u32::try_from(ksize)
        .map_err(|_| ModelError::Domain(format!("kernel size out of range: {ksize}")))
        .and_then(BlurLevel::new)?;
    Ok(level.sigma())
}

/// Exact rational form of [`sigma_from_ksize`].
pub fn sigma_from_ksize_exact(ksize: i64) -> Result<Ratio<i64>, ModelError> {
    let level = u32::try_from(ksize)
        .map_err(|_| ModelError::Domain(format!("kernel size out of range: {ksize}")))
        .and_then(BlurLevel::new)?;
    Ok(level.sigma_exact())
}

/// The eight movement-time formulas.
///
/// | kind | formula |
/// |---|---|
/// | `OnePart` | `a + b log2(A/W + 1)` |
/// | `OnePartLinB` | `a + b log2(A/W + 1) + c(B-1)` |
/// | `OnePartWShrink` | `a + b log2(A/(W - c(B-1)) + 1)` |
/// | `OnePartABShift` | `a + b log2((A + d(B-1))/(W - c(B-1)) + 1)` |
/// | `TwoPart` | `a + b log2 A - c log2 W` |
/// | `TwoPartLinB` | `a + b log2 A - c log2 W + d(B-1)` |
/// | `TwoPartWShrink` | `a + b log2 A - c log2(W - d(B-1))` |
/// | `TwoPartABShift` | `a + b log2(A + c(B-1)) - d log2(W - e(B-1))` |
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    OnePart,
    OnePartLinB,
    OnePartWShrink,
    #[serde(rename = "one-part-ab-shift")]
    OnePartABShift,
    TwoPart,
    TwoPartLinB,
    TwoPartWShrink,
    #[serde(rename = "two-part-ab-shift")]
    TwoPartABShift,
}

/// Constant slot index within `[a, b, c, d, e]`.
pub type Slot = usize;

impl ModelKind {
    pub const ALL: [ModelKind; 8] = [
        ModelKind::OnePart,
        ModelKind::OnePartLinB,
        ModelKind::OnePartWShrink,
        ModelKind::OnePartABShift,
        ModelKind::TwoPart,
        ModelKind::TwoPartLinB,
        ModelKind::TwoPartWShrink,
        ModelKind::TwoPartABShift,
    ];

    pub const fn param_count(self) -> usize {
        match self {
            ModelKind::OnePart => 2,
            ModelKind::OnePartLinB | ModelKind::OnePartWShrink | ModelKind::TwoPart => 3,
            ModelKind::OnePartABShift | ModelKind::TwoPartLinB | ModelKind::TwoPartWShrink => 4,
            ModelKind::TwoPartABShift => 5,
        }
    }

    pub const fn name(self) -> &'static str {
        match self {
            ModelKind::OnePart => "one-part",
            ModelKind::OnePartLinB => "one-part-lin-b",
            ModelKind::OnePartWShrink => "one-part-w-shrink",
            ModelKind::OnePartABShift => "one-part-ab-shift",
            ModelKind::TwoPart => "two-part",
            ModelKind::TwoPartLinB => "two-part-lin-b",
            ModelKind::TwoPartWShrink => "two-part-w-shrink",
            ModelKind::TwoPartABShift => "two-part-ab-shift",
        }
    }

    pub const fn formula(self) -> &'static str {
        match self {
            ModelKind::OnePart => "a + b*log2(A/W + 1)",
            ModelKind::OnePartLinB => "a + b*log2(A/W + 1) + c*(B-1)",
            ModelKind::OnePartWShrink => "a + b*log2(A/(W - c*(B-1)) + 1)",
            ModelKind::OnePartABShift => "a + b*log2((A + d*(B-1))/(W - c*(B-1)) + 1)",
            ModelKind::TwoPart => "a + b*log2(A) - c*log2(W)",
            ModelKind::TwoPartLinB => "a + b*log2(A) - c*log2(W) + d*(B-1)",
            ModelKind::TwoPartWShrink => "a + b*log2(A) - c*log2(W - d*(B-1))",
            ModelKind::TwoPartABShift => "a + b*log2(A + c*(B-1)) - d*log2(W - e*(B-1))",
        }
    }

    /// The blur-free formula this kind reduces to at `B = 1`.
    pub const fn base(self) -> ModelKind {
        match self {
            ModelKind::OnePart
            | ModelKind::OnePartLinB
            | ModelKind::OnePartWShrink
            | ModelKind::OnePartABShift => ModelKind::OnePart,
            _ => ModelKind::TwoPart,
        }
    }

    pub const fn is_two_part(self) -> bool {
        matches!(self.base(), ModelKind::TwoPart)
    }

    /// Slot of the coefficient that shrinks `W` with blur.
    pub const fn shrink_slot(self) -> Option<Slot> {
        match self {
            ModelKind::OnePartWShrink | ModelKind::OnePartABShift => Some(2),
            ModelKind::TwoPartWShrink => Some(3),
            ModelKind::TwoPartABShift => Some(4),
            _ => None,
        }
    }

    /// Slot of the coefficient that lengthens `A` with blur.
    pub const fn shift_slot(self) -> Option<Slot> {
        match self {
            ModelKind::OnePartABShift => Some(3),
            ModelKind::TwoPartABShift => Some(2),
            _ => None,
        }
    }

    /// Slot of an additive `(B-1)` term.
    pub const fn linear_blur_slot(self) -> Option<Slot> {
        match self {
            ModelKind::OnePartLinB => Some(2),
            ModelKind::TwoPartLinB => Some(3),
            _ => None,
        }
    }

    /// Slots that multiply `(B-1)`; these are constrained to be non-negative
    /// during fitting.
    pub fn blur_slots(self) -> Vec<Slot> {
        [
            self.shrink_slot(),
            self.shift_slot(),
            self.linear_blur_slot(),
        ]
        .into_iter()
        .flatten()
        .collect()
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let needle = s.trim().to_ascii_lowercase().replace('_', "-");
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == needle)
            .ok_or_else(|| ModelError::Domain(format!("unknown model kind `{s}`")))
    }
}

/// Fitted constants `a..e` of one formula; unused slots are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "RawParams<T>",
    bound(deserialize = "T: Deserialize<'de> + Copy")
)]
pub struct ModelParams<T> {
    kind: ModelKind,
    a: T,
    b: T,
    #[serde(skip_serializing_if = "Option::is_none")]
    c: Option<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    d: Option<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    e: Option<T>,
}

#[derive(Deserialize)]
struct RawParams<T> {
    kind: ModelKind,
    a: T,
    b: T,
    c: Option<T>,
    d: Option<T>,
    e: Option<T>,
}

impl<T: Copy> TryFrom<RawParams<T>> for ModelParams<T> {
    type Error = ModelError;

    fn try_from(raw: RawParams<T>) -> Result<Self, Self::Error> {
        let values: Vec<T> = [Some(raw.a), Some(raw.b), raw.c, raw.d, raw.e]
            .into_iter()
            .map_while(|v| v)
            .collect();
        let present = [raw.c, raw.d, raw.e].iter().filter(|v| v.is_some()).count() + 2;
        if present != values.len() {
            return Err(ModelError::Domain(
                "constants must fill slots a..e without gaps".into(),
            ));
        }
        ModelParams::new(raw.kind, &values)
    }
}

impl<T: Copy> ModelParams<T> {
    /// Builds parameters from `[a, b, c, ...]`; the slice length must equal
    /// `kind.param_count()`.
    pub fn new(kind: ModelKind, values: &[T]) -> Result<Self, ModelError> {
        if values.len() != kind.param_count() {
            return Err(ModelError::ParamCount {
                kind: kind.name(),
                expected: kind.param_count(),
                got: values.len(),
            });
        }
        Ok(Self {
            kind,
            a: values[0],
            b: values[1],
            c: values.get(2).copied(),
            d: values.get(3).copied(),
            e: values.get(4).copied(),
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn a(&self) -> T {
        self.a
    }

    pub fn b(&self) -> T {
        self.b
    }

    pub fn c(&self) -> Option<T> {
        self.c
    }

    pub fn d(&self) -> Option<T> {
        self.d
    }

    pub fn e(&self) -> Option<T> {
        self.e
    }

    pub fn get(&self, slot: Slot) -> Option<T> {
        match slot {
            0 => Some(self.a),
            1 => Some(self.b),
            2 => self.c,
            3 => self.d,
            4 => self.e,
            _ => None,
        }
    }

    pub fn values(&self) -> Vec<T> {
        [Some(self.a), Some(self.b), self.c, self.d, self.e]
            .into_iter()
            .flatten()
            .collect()
    }

    // Slots are guaranteed present by construction for the kind.
    fn slot(&self, slot: Slot) -> T {
        self.get(slot).expect("slot present for kind")
    }
}

impl<T: Field> ModelParams<T> {
    /// `W - shrink(B-1)` for kinds that shrink the width, `None` otherwise.
    pub fn effective_width(&self, cond: &TaskCondition<T>) -> Option<T> {
        self.kind
            .shrink_slot()
            .map(|s| effective_width(cond.width, cond.blur, self.slot(s)))
    }

    /// `A + shift(B-1)` for kinds that lengthen the distance, `None` otherwise.
    pub fn effective_distance(&self, cond: &TaskCondition<T>) -> Option<T> {
        self.kind
            .shift_slot()
            .map(|s| cond.distance + self.slot(s) * cond.blur_excess())
    }
}

/// Predicted movement time in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PredictedMt<T>(T);

impl<T: Copy> PredictedMt<T> {
    pub fn ms(self) -> T {
        self.0
    }
}

fn positive<T: Scalar>(value: T, term: Term) -> Result<T, ModelError> {
    if value > T::zero() {
        Ok(value)
    } else {
        Err(ModelError::EffectiveWidth {
            term,
            value: value.to_f64_lossy(),
        })
    }
}

/// Evaluates the formula of `params.kind()` at `cond`.
pub fn predict_mt<T: Scalar>(
    params: &ModelParams<T>,
    cond: &TaskCondition<T>,
) -> Result<PredictedMt<T>, ModelError> {
    predict_with_gradient(params, cond).map(|(mt, _)| PredictedMt(mt))
}

/// Prediction together with its partial derivatives with respect to each
/// constant slot `[a, b, c, d, e]` (unused slots are zero).
pub fn predict_with_gradient<T: Scalar>(
    params: &ModelParams<T>,
    cond: &TaskCondition<T>,
) -> Result<(T, [T; 5]), ModelError> {
    let zero = T::zero();
    let one = T::one();
    let ln2 = T::LN_2();
    let distance = positive(cond.distance, Term::Distance)?;
    let width = positive(cond.width, Term::Width)?;
    let beta = cond.blur_excess();
    let (a, b) = (params.a, params.b);
    let mut grad = [zero; 5];
    grad[0] = one;

    let mt = match params.kind {
        ModelKind::OnePart | ModelKind::OnePartLinB => {
            let id = (distance / width + one).log2();
            grad[1] = id;
            let mut mt = a + b * id;
            if params.kind == ModelKind::OnePartLinB {
                grad[2] = beta;
                mt = mt + params.slot(2) * beta;
            }
            mt
        }
        ModelKind::OnePartWShrink | ModelKind::OnePartABShift => {
            let shrink = params.slot(2);
            let we = positive(width - shrink * beta, Term::EffectiveWidth)?;
            let ae = match params.kind.shift_slot() {
                Some(s) => positive(distance + params.slot(s) * beta, Term::EffectiveDistance)?,
                None => distance,
            };
            let u = ae / we + one;
            let id = u.log2();
            grad[1] = id;
            let dlog = b / (u * ln2);
            grad[2] = dlog * ae * beta / (we * we);
            if let Some(s) = params.kind.shift_slot() {
                grad[s] = dlog * beta / we;
            }
            a + b * id
        }
        ModelKind::TwoPart | ModelKind::TwoPartLinB | ModelKind::TwoPartWShrink => {
            let c = params.slot(2);
            let log_a = distance.log2();
            let we = match params.kind {
                ModelKind::TwoPartWShrink => {
                    let shrink = params.slot(3);
                    let we = positive(width - shrink * beta, Term::EffectiveWidth)?;
                    grad[3] = c * beta / (we * ln2);
                    we
                }
                _ => width,
            };
            let log_w = we.log2();
            grad[1] = log_a;
            grad[2] = -log_w;
            let mut mt = a + b * log_a - c * log_w;
            if params.kind == ModelKind::TwoPartLinB {
                grad[3] = beta;
                mt = mt + params.slot(3) * beta;
            }
            mt
        }
        ModelKind::TwoPartABShift => {
            let (shift, slope_w, shrink) = (params.slot(2), params.slot(3), params.slot(4));
            let ae = positive(distance + shift * beta, Term::EffectiveDistance)?;
            let we = positive(width - shrink * beta, Term::EffectiveWidth)?;
            let (log_a, log_w) = (ae.log2(), we.log2());
            grad[1] = log_a;
            grad[2] = b * beta / (ae * ln2);
            grad[3] = -log_w;
            grad[4] = slope_w * beta / (we * ln2);
            a + b * log_a - slope_w * log_w
        }
    };
    Ok((mt, grad))
}
