//! Synthetic participants driven by a known model.
//!
//! First-click MT is the model prediction plus Gaussian noise, floored at
//! 100 ms. Click endpoints scatter around the target center with a per-axis
//! SD proportional to the width the user effectively aims at. For the
//! width-shrinking models this width grows by the model's shrinkage, so a
//! blurred target is missed more often than a sharp one of the same size.
//!
//! Every session draws from its own generator seeded from the user seed and
//! the condition values, so any subset of a design reproduces independently
//! of what else was simulated.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ModelError, SimulationError};
use crate::protocol::{
    generate_layout, is_hit, Block, ExperimentDesign, Point, SessionLog, TrialRecord,
};
use crate::{predict_mt, ModelParams, TaskCondition};

pub const MT_FLOOR_MS: f64 = 100.0;
pub const RETRY_DELAY_MS: f64 = 300.0;
/// Attempts on one target before the simulated user is assumed to land on
/// the center. Only reachable with absurd spread ratios.
pub const MAX_ATTEMPTS: u32 = 100;
pub const SCREEN_CENTER: Point = Point::new(960.0, 540.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticUser {
    pub id: String,
    pub truth: ModelParams,
    pub mt_noise_sd: f64,
    /// Per-axis endpoint SD as a fraction of the aimed-at width.
    pub endpoint_spread_ratio: f64,
    pub seed: u64,
}

impl SyntheticUser {
    /// A noiseless user who always clicks the exact center.
    pub fn new(id: impl Into<String>, truth: ModelParams, seed: u64) -> Self {
        Self {
            id: id.into(),
            truth,
            mt_noise_sd: 0.0,
            endpoint_spread_ratio: 0.0,
            seed,
        }
    }

    pub fn with_mt_noise(mut self, sd: f64) -> Self {
        self.mt_noise_sd = sd;
        self
    }

    pub fn with_endpoint_spread(mut self, ratio: f64) -> Self {
        self.endpoint_spread_ratio = ratio;
        self
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.mt_noise_sd >= 0.0 && self.mt_noise_sd.is_finite()) {
            return Err(ModelError::Domain(format!(
                "mt_noise_sd must be >= 0, got {}",
                self.mt_noise_sd
            )));
        }
        if !(self.endpoint_spread_ratio >= 0.0 && self.endpoint_spread_ratio.is_finite()) {
            return Err(ModelError::Domain(format!(
                "endpoint_spread_ratio must be >= 0, got {}",
                self.endpoint_spread_ratio
            )));
        }
        Ok(())
    }

    /// Per-axis endpoint SD at `cond`.
    pub fn endpoint_sd(&self, cond: &TaskCondition) -> f64 {
        let shrink = self
            .truth
            .effective_width(cond)
            .map_or(0.0, |we| cond.width - we);
        self.endpoint_spread_ratio * (cond.width + shrink)
    }

    fn session_rng(&self, cond: &TaskCondition, repetition: u32) -> ChaCha8Rng {
        let mut s = splitmix64(self.seed);
        for v in [
            cond.distance.to_bits(),
            cond.width.to_bits(),
            cond.blur.to_bits(),
            u64::from(repetition),
        ] {
            s = splitmix64(s ^ v);
        }
        ChaCha8Rng::seed_from_u64(s)
    }
}

/// Seed for the `index`-th participant of a run seeded with `seed`.
pub fn participant_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index))
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A simulated session with the generator's own bookkeeping, for checking
/// the aggregation against it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulatedSession {
    pub log: SessionLog,
    pub predicted_mt: f64,
    /// First-click MT of each measured target.
    pub first_click_mts: Vec<f64>,
    pub first_click_hits: Vec<bool>,
}

impl SimulatedSession {
    pub fn first_click_misses(&self) -> usize {
        self.first_click_hits.iter().filter(|h| !**h).count()
    }

    pub fn error_free_mean_mt(&self) -> Option<f64> {
        let ok: Vec<f64> = self
            .first_click_mts
            .iter()
            .zip(&self.first_click_hits)
            .filter(|(_, &h)| h)
            .map(|(&mt, _)| mt)
            .collect();
        (!ok.is_empty()).then(|| ok.iter().sum::<f64>() / ok.len() as f64)
    }
}

/// Where a session sits in an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SessionSlot {
    pub block: Block,
    pub session: u32,
    /// Distinguishes repeated sessions of the same condition.
    pub repetition: u32,
}

impl Default for SessionSlot {
    fn default() -> Self {
        Self {
            block: Block::NoCorrection,
            session: 0,
            repetition: 0,
        }
    }
}

pub fn simulate_session(
    user: &SyntheticUser,
    cond: &TaskCondition,
    n_targets: usize,
) -> Result<SimulatedSession, SimulationError> {
    simulate_session_at(user, cond, n_targets, SessionSlot::default())
}

pub fn simulate_session_at(
    user: &SyntheticUser,
    cond: &TaskCondition,
    n_targets: usize,
    slot: SessionSlot,
) -> Result<SimulatedSession, SimulationError> {
    user.validate()?;
    cond.validate()?;
    let predicted = predict_mt(&user.truth, cond)?.ms();
    let layout = generate_layout(
        n_targets,
        cond.distance,
        cond.width,
        cond.blur,
        SCREEN_CENTER,
    )?;
    let sd = user.endpoint_sd(cond);
    let mut rng = user.session_rng(cond, slot.repetition);

    let mut trials = Vec::new();
    let mut first_click_mts = Vec::with_capacity(n_targets);
    let mut first_click_hits = Vec::with_capacity(n_targets);
    let mut now = 0.0;
    for (trial_index, target) in layout.session_sequence().enumerate() {
        let center = layout.centers[target];
        if trial_index > 0 {
            let noise: f64 = rng.sample(StandardNormal);
            let mt = (predicted + user.mt_noise_sd * noise).max(MT_FLOOR_MS);
            now += mt;
            first_click_mts.push(mt);
        }
        let mut attempt = 1;
        loop {
            let click = if attempt == MAX_ATTEMPTS {
                center
            } else {
                let (dx, dy): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
                Point::new(center.x + sd * dx, center.y + sd * dy)
            };
            let hit = is_hit(click, center, cond.width);
            if trial_index > 0 && attempt == 1 {
                first_click_hits.push(hit);
            }
            trials.push(TrialRecord {
                condition: *cond,
                trial_index,
                click_time: now,
                click_point: click,
                target_center: center,
                hit,
                attempt,
            });
            if hit {
                break;
            }
            attempt += 1;
            now += RETRY_DELAY_MS;
        }
    }

    Ok(SimulatedSession {
        log: SessionLog {
            participant: user.id.clone(),
            block: slot.block,
            session: slot.session,
            condition: *cond,
            trials,
            practice: false,
        },
        predicted_mt: predicted,
        first_click_mts,
        first_click_hits,
    })
}

/// Simulates `sessions_per_condition` sessions of every condition, in design
/// order. Sessions are generated in parallel.
pub fn simulate_experiment(
    user: &SyntheticUser,
    design: &[TaskCondition],
    n_targets: usize,
    sessions_per_condition: u32,
    block: Block,
) -> Result<Vec<SimulatedSession>, SimulationError> {
    let slots: Vec<(usize, u32)> = (0..design.len())
        .flat_map(|i| (0..sessions_per_condition).map(move |r| (i, r)))
        .collect();
    slots
        .par_iter()
        .enumerate()
        .map(|(session, &(i, repetition))| {
            let slot = SessionSlot {
                block,
                session: session as u32,
                repetition,
            };
            simulate_session_at(user, &design[i], n_targets, slot)
        })
        .collect()
}

/// One participant's pass through a built-in design, conditions in the
/// participant's counterbalanced order.
pub fn simulate_participant(
    user: &SyntheticUser,
    design: &ExperimentDesign,
    participant_index: usize,
    block: Block,
) -> Result<Vec<SimulatedSession>, SimulationError> {
    let order = design.session_order(participant_index)?;
    simulate_experiment(user, &order, design.n_targets, 1, block)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::aggregate;
    use crate::ModelKind;

    fn truth() -> ModelParams {
        ModelParams::new(ModelKind::OnePartABShift, &[56.8, 200.0, 0.0738, 1.88]).unwrap()
    }

    #[test]
    fn noiseless_user_reproduces_predictions() {
        let user = SyntheticUser::new("s1", truth(), 7);
        let cond = TaskCondition::new(500.0, 36.0, 61.0).unwrap();
        let s = simulate_session(&user, &cond, 21).unwrap();
        assert_eq!(s.first_click_misses(), 0);
        assert_eq!(s.log.measured_targets(), 21);
        assert!(s.first_click_mts.iter().all(|&mt| mt == s.predicted_mt));
        let r = aggregate(std::slice::from_ref(&s.log));
        let summary = &r.participants[0].summary;
        assert_eq!(summary.er, 0.0);
        assert!((summary.mean_mt.unwrap() - s.predicted_mt).abs() < 1e-9);
    }

    #[test]
    fn same_seed_same_session() {
        let user = SyntheticUser::new("s1", truth(), 42)
            .with_mt_noise(30.0)
            .with_endpoint_spread(0.25);
        let cond = TaskCondition::new(300.0, 12.0, 101.0).unwrap();
        let a = simulate_session(&user, &cond, 21).unwrap();
        let b = simulate_session(&user, &cond, 21).unwrap();
        assert_eq!(a, b);
        let other = SyntheticUser { seed: 43, ..user };
        assert_ne!(
            a.log.trials,
            simulate_session(&other, &cond, 21).unwrap().log.trials
        );
    }

    #[test]
    fn sessions_do_not_depend_on_the_rest_of_the_design() {
        let user = SyntheticUser::new("s1", truth(), 5)
            .with_mt_noise(30.0)
            .with_endpoint_spread(0.2);
        let design = ExperimentDesign::exp1().conditions().unwrap();
        let full = simulate_experiment(&user, &design, 21, 1, Block::NoCorrection).unwrap();
        let subset = simulate_experiment(&user, &design[10..], 21, 1, Block::NoCorrection).unwrap();
        for (a, b) in full[10..].iter().zip(&subset) {
            assert_eq!(a.log.trials, b.log.trials);
        }
    }

    #[test]
    fn counts_match_aggregation() {
        let user = SyntheticUser::new("s1", truth(), 9)
            .with_mt_noise(30.0)
            .with_endpoint_spread(0.3);
        let design = ExperimentDesign::exp1().conditions().unwrap();
        let sessions = simulate_experiment(&user, &design, 21, 1, Block::NoCorrection).unwrap();
        let logs: Vec<SessionLog> = sessions.iter().map(|s| s.log.clone()).collect();
        let report = aggregate(&logs);
        assert!(report.rejected.is_empty());
        assert_eq!(report.participants.len(), 48);
        for s in &sessions {
            let p = report
                .participants
                .iter()
                .find(|p| p.summary.condition == s.log.condition)
                .unwrap();
            assert_eq!(p.summary.n_trials, 21);
            assert_eq!(p.summary.n_errors, s.first_click_misses());
            match (p.summary.mean_mt, s.error_free_mean_mt()) {
                (Some(x), Some(y)) => assert!((x - y).abs() < 1e-9 * y),
                (x, y) => assert_eq!(x, y),
            }
        }
    }

    #[test]
    fn experiment_one_trial_count() {
        let user = SyntheticUser::new("s1", truth(), 1);
        let sessions =
            simulate_participant(&user, &ExperimentDesign::exp1(), 0, Block::NoCorrection).unwrap();
        assert_eq!(sessions.len(), 48);
        let measured: usize = sessions.iter().map(|s| s.log.measured_targets()).sum();
        assert_eq!(measured, 1008);
        assert!(simulate_experiment(&user, &[], 21, 1, Block::NoCorrection)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn blur_raises_error_rate_for_small_targets() {
        let mut errors = [0usize; 2];
        let mut total = [0usize; 2];
        for seed in 0..10 {
            let user = SyntheticUser::new("s", truth(), seed).with_endpoint_spread(0.25);
            for a in [300.0, 500.0] {
                for (slot, b) in [(0, 1.0), (1, 101.0)] {
                    let s = simulate_session(&user, &TaskCondition::new(a, 12.0, b).unwrap(), 21)
                        .unwrap();
                    errors[slot] += s.first_click_misses();
                    total[slot] += s.first_click_hits.len();
                }
            }
        }
        let er = |i: usize| errors[i] as f64 / total[i] as f64;
        assert!(er(1) > er(0), "ER at B=101 {} vs B=1 {}", er(1), er(0));
    }

    #[test]
    fn error_rate_grows_with_spread() {
        let cond = TaskCondition::new(300.0, 18.0, 41.0).unwrap();
        let er = |ratio: f64| {
            let (mut e, mut n) = (0, 0);
            for seed in 0..10 {
                let user = SyntheticUser::new("s", truth(), seed).with_endpoint_spread(ratio);
                let s = simulate_session(&user, &cond, 21).unwrap();
                e += s.first_click_misses();
                n += s.first_click_hits.len();
            }
            e as f64 / n as f64
        };
        let rates: Vec<f64> = [0.1, 0.25, 0.5].into_iter().map(er).collect();
        assert!(rates.windows(2).all(|w| w[0] < w[1]), "{rates:?}");
    }

    #[test]
    fn mt_floor_applies() {
        let fast = ModelParams::new(ModelKind::OnePart, &[-2000.0, 10.0]).unwrap();
        let user = SyntheticUser::new("s", fast, 3);
        let s = simulate_session(&user, &TaskCondition::new(300.0, 18.0, 1.0).unwrap(), 5).unwrap();
        assert!(s.first_click_mts.iter().all(|&mt| mt == MT_FLOOR_MS));
    }

    #[test]
    fn refuses_non_positive_effective_width() {
        let p = ModelParams::new(ModelKind::OnePartWShrink, &[50.0, 200.0, 0.2]).unwrap();
        let user = SyntheticUser::new("s", p, 3);
        let err = simulate_session(&user, &TaskCondition::new(300.0, 12.0, 101.0).unwrap(), 21)
            .unwrap_err();
        assert!(matches!(
            err,
            SimulationError::Model(ModelError::EffectiveWidth { .. })
        ));
        let bad = SyntheticUser::new("s", truth(), 3).with_mt_noise(-1.0);
        assert!(
            simulate_session(&bad, &TaskCondition::new(300.0, 12.0, 1.0).unwrap(), 21).is_err()
        );
    }
}
