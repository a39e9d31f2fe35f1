//! Session logs to condition-level error rate and movement time.
//!
//! MT of a target is the time from the successful click on the previous
//! target to the first click on this one. A target whose first click missed
//! counts as an error; its MT is kept out of the mean. No trials are dropped
//! as outliers.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::trial::{Block, SessionLog};
use crate::error::FitError;
use crate::TaskCondition;
use crate::{DataPoint, Dataset};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialMeasure {
    pub trial_index: usize,
    pub mt: f64,
    /// First click missed the target.
    pub error: bool,
}

/// Per-target measures of one session, start target excluded. Returns the
/// rejection reason for malformed sessions.
pub fn trial_measures(log: &SessionLog) -> Result<Vec<TrialMeasure>, String> {
    let trials = &log.trials;
    let first = trials.first().ok_or("session has no clicks")?;
    if first.trial_index != 0 || first.attempt != 1 {
        return Err("missing start target (first row must be trial 0, attempt 1)".into());
    }
    for pair in trials.windows(2) {
        let (prev, next) = (&pair[0], &pair[1]);
        if next.click_time < prev.click_time {
            return Err(format!(
                "timestamps go backwards at trial {} attempt {}",
                next.trial_index, next.attempt
            ));
        }
        let continues =
            next.trial_index == prev.trial_index && next.attempt == prev.attempt + 1 && !prev.hit;
        let advances = next.trial_index == prev.trial_index + 1 && next.attempt == 1 && prev.hit;
        if !continues && !advances {
            return Err(format!(
                "unexpected attempt sequence: trial {} attempt {} (hit={}) followed by trial {} attempt {}",
                prev.trial_index, prev.attempt, prev.hit, next.trial_index, next.attempt
            ));
        }
    }
    if let Some(t) = trials.iter().find(|t| t.condition != log.condition) {
        return Err(format!(
            "trial {} has a different condition than its session",
            t.trial_index
        ));
    }
    let last = trials.last().expect("non-empty");
    if !last.hit {
        return Err(format!("target {} was never selected", last.trial_index));
    }

    let mut out = Vec::new();
    let mut previous_hit = None;
    let mut current = None;
    for t in trials {
        if t.attempt == 1 {
            if let Some(prev_time) = previous_hit {
                current = Some(out.len());
                out.push(TrialMeasure {
                    trial_index: t.trial_index,
                    mt: t.click_time - prev_time,
                    error: !t.hit,
                });
            }
        }
        if t.hit {
            previous_hit = Some(t.click_time);
            current = None;
        }
    }
    debug_assert!(current.is_none());
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionSummary {
    pub condition: TaskCondition,
    /// Proportion of targets whose first click missed.
    pub er: f64,
    /// Mean MT over error-free targets, ms; `None` if every target was an error.
    pub mean_mt: Option<f64>,
    pub n_trials: usize,
    pub n_errors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticipantSummary {
    pub participant: String,
    pub block: Block,
    #[serde(flatten)]
    pub summary: ConditionSummary,
}

/// Condition means across participants: `mean_mt` averages the participant
/// means, counts and `er` pool all trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrandSummary {
    pub block: Block,
    pub n_participants: usize,
    #[serde(flatten)]
    pub summary: ConditionSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub participant: String,
    pub block: Block,
    pub session: u32,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub participants: Vec<ParticipantSummary>,
    pub grand: Vec<GrandSummary>,
    pub rejected: Vec<Rejection>,
}

#[derive(Debug, Clone, Copy)]
struct ConditionKey(TaskCondition);

impl PartialEq for ConditionKey {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for ConditionKey {}

impl PartialOrd for ConditionKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ConditionKey {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (&self.0, &other.0);
        a.distance
            .total_cmp(&b.distance)
            .then(a.width.total_cmp(&b.width))
            .then(a.blur.total_cmp(&b.blur))
    }
}

#[derive(Default)]
struct Tally {
    mt_sum: f64,
    n_ok: usize,
    n_trials: usize,
    n_errors: usize,
}

impl Tally {
    fn summary(&self, condition: TaskCondition) -> ConditionSummary {
        ConditionSummary {
            condition,
            er: if self.n_trials == 0 {
                0.0
            } else {
                self.n_errors as f64 / self.n_trials as f64
            },
            mean_mt: (self.n_ok > 0).then(|| self.mt_sum / self.n_ok as f64),
            n_trials: self.n_trials,
            n_errors: self.n_errors,
        }
    }
}

/// Aggregates measured sessions; practice sessions are ignored and
/// malformed sessions are rejected with a reason. Output is ordered by key,
/// so it does not depend on the order of `logs`.
pub fn aggregate(logs: &[SessionLog]) -> AggregateReport {
    let mut ordered: Vec<&SessionLog> = logs.iter().filter(|l| !l.practice).collect();
    ordered.sort_by(|a, b| {
        (
            &a.participant,
            a.block,
            ConditionKey(a.condition),
            a.session,
        )
            .cmp(&(
                &b.participant,
                b.block,
                ConditionKey(b.condition),
                b.session,
            ))
    });

    let mut per_participant: BTreeMap<(String, Block, ConditionKey), Tally> = BTreeMap::new();
    let mut rejected = Vec::new();
    for log in ordered {
        match trial_measures(log) {
            Ok(measures) => {
                let tally = per_participant
                    .entry((
                        log.participant.clone(),
                        log.block,
                        ConditionKey(log.condition),
                    ))
                    .or_default();
                for m in measures {
                    tally.n_trials += 1;
                    if m.error {
                        tally.n_errors += 1;
                    } else {
                        tally.n_ok += 1;
                        tally.mt_sum += m.mt;
                    }
                }
            }
            Err(reason) => rejected.push(Rejection {
                participant: log.participant.clone(),
                block: log.block,
                session: log.session,
                reason,
            }),
        }
    }

    let participants: Vec<ParticipantSummary> = per_participant
        .iter()
        .map(|((participant, block, key), tally)| ParticipantSummary {
            participant: participant.clone(),
            block: *block,
            summary: tally.summary(key.0),
        })
        .collect();

    let mut grouped: BTreeMap<(Block, ConditionKey), Vec<&ParticipantSummary>> = BTreeMap::new();
    for p in &participants {
        grouped
            .entry((p.block, ConditionKey(p.summary.condition)))
            .or_default()
            .push(p);
    }
    let grand = grouped
        .into_iter()
        .map(|((block, key), members)| {
            let means: Vec<f64> = members.iter().filter_map(|m| m.summary.mean_mt).collect();
            let n_trials = members.iter().map(|m| m.summary.n_trials).sum::<usize>();
            let n_errors = members.iter().map(|m| m.summary.n_errors).sum::<usize>();
            GrandSummary {
                block,
                n_participants: members.len(),
                summary: ConditionSummary {
                    condition: key.0,
                    er: if n_trials == 0 {
                        0.0
                    } else {
                        n_errors as f64 / n_trials as f64
                    },
                    mean_mt: (!means.is_empty())
                        .then(|| means.iter().sum::<f64>() / means.len() as f64),
                    n_trials,
                    n_errors,
                },
            }
        })
        .collect();

    AggregateReport {
        participants,
        grand,
        rejected,
    }
}

impl AggregateReport {
    /// Pooled error rate over every measured target of `block`.
    pub fn overall_er(&self, block: Block) -> Option<f64> {
        let (n, e) = self
            .participants
            .iter()
            .filter(|p| p.block == block)
            .fold((0, 0), |(n, e), p| {
                (n + p.summary.n_trials, e + p.summary.n_errors)
            });
        (n > 0).then(|| e as f64 / n as f64)
    }

    pub fn participant_ids(&self, block: Block) -> Vec<String> {
        let mut ids: Vec<String> = self
            .participants
            .iter()
            .filter(|p| p.block == block)
            .map(|p| p.participant.clone())
            .collect();
        ids.dedup();
        ids
    }

    /// Grand-mean fitting data for `block`; conditions without an
    /// error-free trial are left out.
    pub fn grand_dataset(&self, block: Block) -> Result<Dataset, FitError> {
        let points = self
            .grand
            .iter()
            .filter(|g| g.block == block)
            .filter_map(|g| to_point(&g.summary))
            .collect();
        Dataset::new("grand mean", points)
    }

    pub fn participant_dataset(
        &self,
        block: Block,
        participant: &str,
    ) -> Result<Dataset, FitError> {
        let points = self
            .participants
            .iter()
            .filter(|p| p.block == block && p.participant == participant)
            .filter_map(|p| to_point(&p.summary))
            .collect();
        Dataset::new(participant, points)
    }
}

fn to_point(s: &ConditionSummary) -> Option<DataPoint> {
    s.mean_mt.map(|mean_mt| DataPoint {
        condition: s.condition,
        mean_mt,
        n_trials: s.n_trials - s.n_errors,
    })
}
