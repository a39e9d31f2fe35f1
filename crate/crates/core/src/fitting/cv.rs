use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fit, Dataset, FitOptions};
use crate::error::FitError;
use crate::model::{predict_mt, ModelKind, TaskCondition};
use crate::scalar::Scalar;

/// One held-out condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvFold<T> {
    pub held_out: TaskCondition<T>,
    pub observed: T,
    pub predicted: Option<T>,
    /// Why the fold produced no prediction.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport<T> {
    pub model: ModelKind,
    /// `1 - SS_res/SS_tot` over the pooled held-out predictions.
    pub r2: T,
    /// Mean absolute error of the held-out predictions, ms.
    pub mae: T,
    pub folds: Vec<CvFold<T>>,
    /// `false` when at least one fold failed; `r2`/`mae` then cover the rest.
    pub complete: bool,
}

/// Leave-one-condition-out cross-validation. Folds run in parallel and are
/// reported in dataset order.
pub fn loocv<T: Scalar>(
    kind: ModelKind,
    data: &Dataset<T>,
    opts: &FitOptions<T>,
) -> Result<CvReport<T>, FitError> {
    let needed = kind.param_count() + 2;
    if data.len() < needed {
        return Err(FitError::TooFewPoints {
            kind: kind.name(),
            needed,
            got: data.len(),
        });
    }
    let folds: Vec<CvFold<T>> = (0..data.len())
        .into_par_iter()
        .map(|i| {
            let held = data.points()[i];
            let outcome = fit(kind, &data.without(i), opts)
                .map_err(|e| e.to_string())
                .and_then(|r| predict_mt(&r.params, &held.condition).map_err(|e| e.to_string()));
            let (predicted, error) = match outcome {
                Ok(mt) => (Some(mt.ms()), None),
                Err(e) => (None, Some(e)),
            };
            CvFold {
                held_out: held.condition,
                observed: held.mean_mt,
                predicted,
                error,
            }
        })
        .collect();

    let scored: Vec<(T, T)> = folds
        .iter()
        .filter_map(|f| f.predicted.map(|p| (p, f.observed)))
        .collect();
    if scored.is_empty() {
        return Err(FitError::Domain(
            "every cross-validation fold failed".into(),
        ));
    }
    let n = T::lit(scored.len() as f64);
    let mae = scored.iter().map(|&(p, o)| (p - o).abs()).sum::<T>() / n;
    let mean = scored.iter().map(|&(_, o)| o).sum::<T>() / n;
    let ss_res: T = scored.iter().map(|&(p, o)| (p - o).powi(2)).sum();
    let ss_tot: T = scored.iter().map(|&(_, o)| (o - mean).powi(2)).sum();
    if ss_tot == T::zero() {
        return Err(FitError::ConstantData);
    }
    Ok(CvReport {
        model: kind,
        r2: T::one() - ss_res / ss_tot,
        mae,
        complete: scored.len() == folds.len(),
        folds,
    })
}
