//! Blur-extended Fitts' law toolkit.
//!
//! Movement-time models with a whole-screen Gaussian blur term, plus the
//! machinery around them: fitting and model comparison, target-size
//! corrections, ISO 9241-411 session tooling, a synthetic-user simulator,
//! and paired equivalence tests.
//!
//! The numeric core (`model`, `correction`, `fitting`) is generic over the
//! scalar type; the closed-form corrections also run on exact rationals.
//! The aliases below fix the scalar to `f64` (or `f32`) for everyday use.

// Domain checks are written as `!(x > 0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod correction;
pub mod error;
pub mod fitting;
mod json_float;
mod linalg;
pub mod model;
pub mod protocol;
pub mod scalar;
pub mod simulator;
pub mod stats;

pub use error::{
    CorrectionError, FitError, ModelError, ProtocolError, SimulationError, StatsError, Term,
};
pub use model::{index_of_difficulty, predict_mt, sigma_from_ksize, BlurLevel, ModelKind};
pub use scalar::{Field, Scalar};
pub use simulator::{simulate_experiment, simulate_session, SimulatedSession, SyntheticUser};
pub use stats::{equivalence_battery, holm_correct, paired_tost, BatteryReport, TostResult};

pub type TaskCondition = model::TaskCondition<f64>;
pub type ModelParams = model::ModelParams<f64>;
pub type PredictedMt = model::PredictedMt<f64>;
pub type CorrectionResult = correction::CorrectionResult<f64>;
pub type CorrectionPolicy = correction::CorrectionPolicy<f64>;
pub type Dataset = fitting::Dataset<f64>;
pub type DataPoint = fitting::DataPoint<f64>;
pub type FitOptions = fitting::FitOptions<f64>;
pub type FitReport = fitting::FitReport<f64>;
pub type CvReport = fitting::CvReport<f64>;
pub type ComparisonReport = fitting::ComparisonReport<f64>;

pub type TaskConditionF32 = model::TaskCondition<f32>;
pub type ModelParamsF32 = model::ModelParams<f32>;
pub type DatasetF32 = fitting::Dataset<f32>;
pub type FitReportF32 = fitting::FitReport<f32>;

/// Exact rational scalar for the closed-form corrections.
pub type Rational = num_rational::Ratio<i64>;
pub type TaskConditionExact = model::TaskCondition<Rational>;
pub type ModelParamsExact = model::ModelParams<Rational>;
