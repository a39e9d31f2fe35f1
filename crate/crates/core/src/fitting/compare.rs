use std::fmt;

use serde::{Deserialize, Serialize};

use super::{fit, Dataset, FitOptions, FitReport};
use crate::error::FitError;
use crate::model::ModelKind;
use crate::scalar::Scalar;

/// Rule-of-thumb support for a candidate given its Δ-AIC to the best model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Support {
    /// Δ < 2
    #[serde(rename = "supported")]
    Supported,
    /// 2 <= Δ < 4
    #[serde(rename = "considerable support")]
    Considerable,
    /// 4 <= Δ < 7
    #[serde(rename = "much less support")]
    MuchLess,
    /// 7 <= Δ <= 10. The usual rules leave this band unnamed.
    #[serde(rename = "weak support")]
    Weak,
    /// Δ > 10
    #[serde(rename = "no support")]
    None,
}

impl Support {
    pub fn label(self) -> &'static str {
        match self {
            Support::Supported => "supported",
            Support::Considerable => "considerable support",
            Support::MuchLess => "much less support",
            Support::Weak => "weak support",
            Support::None => "no support",
        }
    }
}

impl fmt::Display for Support {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

pub fn support_category(delta_aic: f64) -> Support {
    match delta_aic {
        d if d < 2.0 => Support::Supported,
        d if d < 4.0 => Support::Considerable,
        d if d < 7.0 => Support::MuchLess,
        d if d <= 10.0 => Support::Weak,
        _ => Support::None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct ComparisonEntry<T> {
    pub report: FitReport<T>,
    #[serde(with = "crate::json_float")]
    pub delta_aic: T,
    pub support: Support,
}

/// Fits sorted by AIC, best first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct ComparisonReport<T> {
    pub ranked: Vec<ComparisonEntry<T>>,
}

impl<T: Scalar> ComparisonReport<T> {
    pub fn best(&self) -> Option<&FitReport<T>> {
        self.ranked.first().map(|e| &e.report)
    }
}

/// Ranks already fitted reports. A perfect fit (AIC `-inf`) gets Δ = 0 and
/// pushes every imperfect fit to Δ = `+inf`.
pub fn compare_reports<T: Scalar>(mut reports: Vec<FitReport<T>>) -> ComparisonReport<T> {
    // Stable sort keeps input order among equal AICs.
    reports.sort_by(|x, y| {
        x.aic
            .partial_cmp(&y.aic)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let min = reports.first().map(|r| r.aic).unwrap_or_else(T::zero);
    let ranked = reports
        .into_iter()
        .map(|report| {
            let delta_aic = if report.aic == min {
                T::zero()
            } else if min.is_infinite() {
                T::infinity()
            } else {
                report.aic - min
            };
            ComparisonEntry {
                support: support_category(delta_aic.to_f64_lossy()),
                delta_aic,
                report,
            }
        })
        .collect();
    ComparisonReport { ranked }
}

/// Fits every kind in `kinds` and ranks them; the first fit error aborts.
pub fn compare<T: Scalar>(
    kinds: &[ModelKind],
    data: &Dataset<T>,
    opts: &FitOptions<T>,
) -> Result<ComparisonReport<T>, FitError> {
    let reports = kinds
        .iter()
        .map(|&k| fit(k, data, opts))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(compare_reports(reports))
}
