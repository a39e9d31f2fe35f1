use std::fmt;

use thiserror::Error;

/// The quantity that left its admissible domain inside a model formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Term {
    Distance,
    Width,
    /// `W` minus the blur shrinkage.
    EffectiveWidth,
    /// `A` plus the blur shift.
    EffectiveDistance,
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Term::Distance => "distance A",
            Term::Width => "width W",
            Term::EffectiveWidth => "effective width",
            Term::EffectiveDistance => "effective distance",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("non-positive {term} ({value}) inside a logarithm")]
    EffectiveWidth { term: Term, value: f64 },
    #[error("expected {expected} constants for {kind}, got {got}")]
    ParamCount {
        kind: &'static str,
        expected: usize,
        got: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CorrectionError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("corrections are only defined for the distance-and-width blur model, got {0}")]
    UnsupportedModel(&'static str),
    #[error("root solver failed: {0}")]
    Solver(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("{kind} needs at least {needed} distinct conditions, dataset has {got}")]
    TooFewPoints {
        kind: &'static str,
        needed: usize,
        got: usize,
    },
    #[error("duplicate condition in dataset: A={distance} W={width} B={blur}")]
    DuplicateCondition {
        distance: f64,
        width: f64,
        blur: f64,
    },
    #[error("no start point satisfies the domain constraints")]
    NoFeasibleStart,
    #[error("optimizer did not converge within {0} iterations")]
    NotConverged(usize),
    #[error("total sum of squares is zero; R\u{b2} is undefined")]
    ConstantData,
    #[error("domain error: {0}")]
    Domain(String),
}

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("line {line}: {message}")]
    Schema { line: u64, message: String },
    #[error("session {session}: {reason}")]
    RejectedSession { session: String, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("standard deviation of differences is zero; equivalence bound undefined")]
    DegenerateVariance,
}

#[derive(Debug, Error)]
pub enum SimulationError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}
