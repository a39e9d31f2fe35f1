use serde::{Deserialize, Serialize};

use crate::error::{ModelError, ProtocolError};
use crate::TaskCondition;

/// Row `participant mod k` of the cyclic Latin square: position `p` holds
/// condition `(row + p) mod k`.
pub fn latin_square_order(k: usize, participant: usize) -> Vec<usize> {
    if k == 0 {
        return Vec::new();
    }
    let row = participant % k;
    (0..k).map(|p| (row + p) % k).collect()
}

/// A full-factorial `A x W x B` design with a fixed number of measured
/// targets per session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentDesign {
    pub name: String,
    pub distances: Vec<f64>,
    pub widths: Vec<f64>,
    pub blurs: Vec<f64>,
    pub n_targets: usize,
}

impl ExperimentDesign {
    const BLURS: [f64; 6] = [1.0, 21.0, 41.0, 61.0, 81.0, 101.0];
    const WIDTHS: [f64; 4] = [12.0, 18.0, 36.0, 78.0];

    pub fn exp1() -> Self {
        Self {
            name: "exp1".into(),
            distances: vec![300.0, 500.0],
            widths: Self::WIDTHS.to_vec(),
            blurs: Self::BLURS.to_vec(),
            n_targets: 21,
        }
    }

    pub fn exp2() -> Self {
        Self {
            name: "exp2".into(),
            distances: vec![300.0, 1100.0],
            widths: Self::WIDTHS.to_vec(),
            blurs: Self::BLURS.to_vec(),
            n_targets: 15,
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "exp1" => Some(Self::exp1()),
            "exp2" => Some(Self::exp2()),
            _ => None,
        }
    }

    /// Warm-up condition that does not appear in either design.
    pub fn practice_condition() -> TaskCondition {
        TaskCondition::new_unchecked(400.0, 23.0, 1.0)
    }

    /// Conditions in `A`-major, then `W`, then `B` order.
    pub fn conditions(&self) -> Result<Vec<TaskCondition>, ModelError> {
        let mut out =
            Vec::with_capacity(self.distances.len() * self.widths.len() * self.blurs.len());
        for &a in &self.distances {
            for &w in &self.widths {
                for &b in &self.blurs {
                    out.push(TaskCondition::new(a, w, b)?);
                }
            }
        }
        Ok(out)
    }

    /// Conditions with the blur levels permuted by the participant's Latin
    /// square row; within a blur level the `A x W` cells keep design order.
    pub fn session_order(&self, participant: usize) -> Result<Vec<TaskCondition>, ProtocolError> {
        let all = self
            .conditions()
            .map_err(|e| ProtocolError::Domain(e.to_string()))?;
        Ok(latin_square_order(self.blurs.len(), participant)
            .into_iter()
            .flat_map(|bi| {
                let blur = self.blurs[bi];
                all.iter()
                    .filter(move |c| c.blur == blur)
                    .copied()
                    .collect::<Vec<_>>()
            })
            .collect())
    }

    /// Smallest and largest index of difficulty in the design, bits.
    pub fn id_range(&self) -> Option<(f64, f64)> {
        let mut ids = self
            .distances
            .iter()
            .flat_map(|&a| {
                self.widths
                    .iter()
                    .map(move |&w| crate::index_of_difficulty(a, w))
            })
            .filter_map(Result::ok);
        let first = ids.next()?;
        Some(ids.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v))))
    }

    pub fn measured_trials(&self) -> usize {
        self.distances.len() * self.widths.len() * self.blurs.len() * self.n_targets
    }
}
