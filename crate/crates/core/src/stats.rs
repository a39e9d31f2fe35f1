//! Paired equivalence testing with Holm familywise correction.
//!
//! Student t tail probabilities come from `statrs`, which evaluates the
//! regularized incomplete beta function.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::StatsError;
use crate::protocol::ParticipantSummary;
use crate::{CorrectionResult, TaskCondition};

pub const DEFAULT_DZ: f64 = 0.2;
pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TostResult {
    pub mean_diff: f64,
    pub sd_diff: f64,
    pub n: usize,
    /// Equivalence bound, `dz * sd_diff`.
    pub bound: f64,
    pub t_lower: f64,
    pub t_upper: f64,
    pub p_lower: f64,
    pub p_upper: f64,
    pub p_tost: f64,
    pub equivalent: bool,
}

fn t_dist(df: f64) -> Result<StudentsT, StatsError> {
    StudentsT::new(0.0, 1.0, df).map_err(|e| StatsError::Domain(e.to_string()))
}

/// Upper tail `P(T > t)` with `df` degrees of freedom.
pub fn t_sf(t: f64, df: f64) -> Result<f64, StatsError> {
    Ok(t_dist(df)?.sf(t))
}

/// Quantile of the t distribution.
pub fn t_quantile(q: f64, df: f64) -> Result<f64, StatsError> {
    if !(0.0 < q && q < 1.0) {
        return Err(StatsError::Domain(format!(
            "quantile must be in (0, 1), got {q}"
        )));
    }
    Ok(t_dist(df)?.inverse_cdf(q))
}

/// Two one-sided paired t-tests against the bound `dz * sd(diffs)`.
pub fn paired_tost(diffs: &[f64], dz: f64, alpha: f64) -> Result<TostResult, StatsError> {
    let n = diffs.len();
    if n < 2 {
        return Err(StatsError::Domain(format!(
            "paired TOST needs at least 2 differences, got {n}"
        )));
    }
    if diffs.iter().any(|d| !d.is_finite()) {
        return Err(StatsError::Domain("differences must be finite".into()));
    }
    if !(dz > 0.0) || !(0.0 < alpha && alpha < 1.0) {
        return Err(StatsError::Domain(format!(
            "need dz > 0 and 0 < alpha < 1, got dz={dz}, alpha={alpha}"
        )));
    }
    let nf = n as f64;
    let mean = diffs.iter().sum::<f64>() / nf;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    let sd = var.sqrt();
    if sd == 0.0 {
        return Err(StatsError::DegenerateVariance);
    }
    let bound = dz * sd;
    let se = sd / nf.sqrt();
    let t_lower = (mean + bound) / se;
    let t_upper = (mean - bound) / se;
    let dist = t_dist(nf - 1.0)?;
    let p_lower = dist.sf(t_lower);
    let p_upper = dist.cdf(t_upper);
    let p_tost = p_lower.max(p_upper);
    Ok(TostResult {
        mean_diff: mean,
        sd_diff: sd,
        n,
        bound,
        t_lower,
        t_upper,
        p_lower,
        p_upper,
        p_tost,
        equivalent: p_lower < alpha && p_upper < alpha,
    })
}

/// Whether a paired TOST with `n` differences and bound `dz * sd` can
/// reject at all: even with a zero mean difference both statistics are at
/// most `dz * sqrt(n)` in magnitude, which must exceed the one-sided
/// critical value.
pub fn tost_attainable(n: usize, dz: f64, alpha: f64) -> Result<bool, StatsError> {
    if n < 2 {
        return Ok(false);
    }
    let crit = t_quantile(1.0 - alpha, n as f64 - 1.0)?;
    Ok(dz * (n as f64).sqrt() > crit)
}

/// Holm step-down adjusted p-values, returned in input order.
pub fn holm_correct(pvals: &[f64]) -> Result<Vec<f64>, StatsError> {
    if let Some(p) = pvals.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(StatsError::Domain(format!("p-value {p} outside [0, 1]")));
    }
    let m = pvals.len();
    let mut idx: Vec<usize> = (0..m).collect();
    idx.sort_by(|&i, &j| pvals[i].total_cmp(&pvals[j]));
    let mut out = vec![0.0; m];
    let mut running = 0.0_f64;
    for (rank, &i) in idx.iter().enumerate() {
        let scaled = ((m - rank) as f64 * pvals[i]).min(1.0);
        running = running.max(scaled);
        out[i] = running;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryOptions {
    pub baseline_blur: f64,
    pub dz: f64,
    pub alpha: f64,
}

impl Default for BatteryOptions {
    fn default() -> Self {
        Self {
            baseline_blur: 1.0,
            dz: DEFAULT_DZ,
            alpha: DEFAULT_ALPHA,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceTest {
    /// Nominal cell of the compared condition.
    pub condition: TaskCondition,
    pub participants: Vec<String>,
    pub result: Option<TostResult>,
    pub error: Option<String>,
    pub p_holm: Option<f64>,
    pub equivalent_holm: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryReport {
    pub options: BatteryOptions,
    pub tests: Vec<EquivalenceTest>,
    pub n_tests: usize,
    pub n_equivalent: usize,
    /// Participant/condition pairs needed by a test but absent from the data.
    pub missing: Vec<String>,
    pub complete: bool,
    /// Whether the TOST can reject at all with this many participants.
    pub attainable: bool,
}

/// Maps a measured condition back to its nominal cell using the correction
/// table that produced it; uncorrected conditions map to themselves.
fn nominal(cond: &TaskCondition, corrections: &[CorrectionResult]) -> TaskCondition {
    corrections
        .iter()
        .find(|c| {
            c.condition.blur == cond.blur
                && c.rounded_width as f64 == cond.width
                && (c.corrected_distance - cond.distance).abs() <= 0.5
        })
        .map_or(*cond, |c| c.condition)
}

/// Per-participant MT differences (compared minus baseline) for every
/// `A x W` cell and every non-baseline blur level, one paired TOST each,
/// Holm-corrected across the battery.
///
/// `summaries` should hold one block. Measured conditions are matched to
/// their nominal cell through `corrections`, so a corrected block can be
/// tested directly.
pub fn equivalence_battery(
    summaries: &[ParticipantSummary],
    corrections: &[CorrectionResult],
    opts: &BatteryOptions,
) -> Result<BatteryReport, StatsError> {
    let rows: Vec<(String, TaskCondition, Option<f64>)> = summaries
        .iter()
        .map(|s| {
            (
                s.participant.clone(),
                nominal(&s.summary.condition, corrections),
                s.summary.mean_mt,
            )
        })
        .collect();
    let participants: BTreeSet<&str> = rows.iter().map(|r| r.0.as_str()).collect();
    let key = |c: &TaskCondition| (c.distance.to_bits(), c.width.to_bits(), c.blur.to_bits());
    let mut cells: Vec<TaskCondition> = rows
        .iter()
        .map(|r| r.1)
        .filter(|c| c.blur != opts.baseline_blur)
        .collect();
    cells.sort_by(|a, b| {
        a.distance
            .total_cmp(&b.distance)
            .then(a.width.total_cmp(&b.width))
            .then(a.blur.total_cmp(&b.blur))
    });
    cells.dedup_by_key(|c| key(c));

    let lookup = |p: &str, c: &TaskCondition| {
        rows.iter()
            .find(|r| r.0 == p && key(&r.1) == key(c))
            .and_then(|r| r.2)
    };

    let mut missing = Vec::new();
    let mut tests: Vec<EquivalenceTest> = cells
        .par_iter()
        .map(|cell| {
            let base = cell.with_blur(opts.baseline_blur);
            let mut diffs = Vec::new();
            let mut who = Vec::new();
            let mut absent = Vec::new();
            for &p in &participants {
                match (lookup(p, cell), lookup(p, &base)) {
                    (Some(x), Some(y)) => {
                        diffs.push(x - y);
                        who.push(p.to_string());
                    }
                    (x, y) => {
                        for (c, v) in [(cell, x), (&base, y)] {
                            if v.is_none() {
                                absent.push(format!(
                                    "{p}: A={} W={} B={}",
                                    c.distance, c.width, c.blur
                                ));
                            }
                        }
                    }
                }
            }
            let (result, error) = match paired_tost(&diffs, opts.dz, opts.alpha) {
                Ok(r) => (Some(r), None),
                Err(e) => (None, Some(e.to_string())),
            };
            (
                EquivalenceTest {
                    condition: *cell,
                    participants: who,
                    result,
                    error,
                    p_holm: None,
                    equivalent_holm: false,
                },
                absent,
            )
        })
        .collect::<Vec<_>>()
        .into_iter()
        .map(|(t, absent)| {
            missing.extend(absent);
            t
        })
        .collect();
    missing.sort();
    missing.dedup();

    let tested: Vec<usize> = (0..tests.len())
        .filter(|&i| tests[i].result.is_some())
        .collect();
    let raw: Vec<f64> = tested
        .iter()
        .map(|&i| tests[i].result.as_ref().expect("tested").p_tost)
        .collect();
    for (&i, p) in tested.iter().zip(holm_correct(&raw)?) {
        tests[i].p_holm = Some(p);
        tests[i].equivalent_holm = p < opts.alpha;
    }

    let n = participants.len();
    Ok(BatteryReport {
        options: opts.clone(),
        n_tests: tests.len(),
        n_equivalent: tests.iter().filter(|t| t.equivalent_holm).count(),
        complete: missing.is_empty() && tests.iter().all(|t| t.result.is_some()),
        missing,
        tests,
        attainable: tost_attainable(n, opts.dz, opts.alpha)?,
    })
}
