use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ProtocolError;
use crate::TaskCondition;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Experiment block: targets at their nominal size or enlarged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Block {
    #[serde(rename = "nc")]
    NoCorrection,
    #[serde(rename = "c")]
    Correction,
}

impl Block {
    pub fn code(self) -> &'static str {
        match self {
            Block::NoCorrection => "nc",
            Block::Correction => "c",
        }
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Block {
    type Err = ProtocolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nc" => Ok(Block::NoCorrection),
            "c" => Ok(Block::Correction),
            other => Err(ProtocolError::Domain(format!(
                "block must be `nc` or `c`, got `{other}`"
            ))),
        }
    }
}

/// One click attempt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub condition: TaskCondition,
    /// Target number within the session; 0 is the start target.
    pub trial_index: usize,
    /// Milliseconds since session start.
    pub click_time: f64,
    pub click_point: Point,
    pub target_center: Point,
    pub hit: bool,
    /// 1-based attempt on this target; a hit ends the target.
    pub attempt: u32,
}

/// One fixed-condition session: the start target followed by the measured
/// targets, every attempt in click order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionLog {
    pub participant: String,
    pub block: Block,
    pub session: u32,
    pub condition: TaskCondition,
    pub trials: Vec<TrialRecord>,
    pub practice: bool,
}

impl SessionLog {
    /// Number of measured targets (start target excluded).
    pub fn measured_targets(&self) -> usize {
        self.trials.iter().map(|t| t.trial_index).max().unwrap_or(0)
    }
}
