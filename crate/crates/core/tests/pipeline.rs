//! Simulated participants through CSV, aggregation, fitting and the
//! equivalence battery.

use blurfitts::correction::correct_condition;
use blurfitts::fitting::{compare, fit, loocv};
use blurfitts::protocol::{
    aggregate, read_trials_csv, write_trials_csv, Block, ExperimentDesign, SessionLog,
};
use blurfitts::simulator::simulate_participant;
use blurfitts::stats::{equivalence_battery, BatteryOptions};
use blurfitts::{CorrectionPolicy, FitOptions, ModelKind, ModelParams, SyntheticUser};

fn truth() -> ModelParams {
    ModelParams::new(ModelKind::OnePartABShift, &[56.8, 200.0, 0.0738, 1.88]).unwrap()
}

fn simulate(design: &ExperimentDesign, users: &[SyntheticUser], block: Block) -> Vec<SessionLog> {
    users
        .iter()
        .enumerate()
        .flat_map(|(i, u)| simulate_participant(u, design, i, block).unwrap())
        .map(|s| s.log)
        .collect()
}

#[test]
fn noiseless_experiment_recovers_the_truth() {
    let users: Vec<SyntheticUser> = (0..6)
        .map(|i| SyntheticUser::new(format!("p{i}"), truth(), i))
        .collect();
    let logs = simulate(&ExperimentDesign::exp1(), &users, Block::NoCorrection);
    let report = aggregate(&logs);
    assert!(report.rejected.is_empty());
    assert_eq!(report.grand.len(), 48);
    assert_eq!(report.overall_er(Block::NoCorrection), Some(0.0));
    let data = report.grand_dataset(Block::NoCorrection).unwrap();
    let fitted = fit(ModelKind::OnePartABShift, &data, &FitOptions::default()).unwrap();
    for (got, want) in fitted.params.values().iter().zip(truth().values()) {
        assert!(((got - want) / want).abs() < 1e-3, "{got} vs {want}");
    }
    let cv = loocv(ModelKind::OnePartABShift, &data, &FitOptions::default()).unwrap();
    assert_eq!(cv.folds.len(), 48);
}

#[test]
fn csv_round_trip_preserves_the_aggregate() {
    let users: Vec<SyntheticUser> = (0..2)
        .map(|i| {
            SyntheticUser::new(format!("p{i}"), truth(), 100 + i)
                .with_mt_noise(30.0)
                .with_endpoint_spread(0.25)
        })
        .collect();
    let logs = simulate(&ExperimentDesign::exp1(), &users, Block::NoCorrection);
    let mut buf = Vec::new();
    write_trials_csv(&mut buf, &logs).unwrap();
    let back = read_trials_csv(buf.as_slice()).unwrap();
    assert_eq!(back.len(), logs.len());

    let direct = aggregate(&logs);
    let via_csv = aggregate(&back);
    assert!(via_csv.rejected.is_empty());
    for (a, b) in direct.participants.iter().zip(&via_csv.participants) {
        assert_eq!(a.summary.condition, b.summary.condition);
        assert_eq!(a.summary.n_trials, b.summary.n_trials);
        assert_eq!(a.summary.n_errors, b.summary.n_errors);
        // Timestamps are written as whole milliseconds.
        let (x, y) = (a.summary.mean_mt.unwrap(), b.summary.mean_mt.unwrap());
        assert!((x - y).abs() <= 1.0, "{x} vs {y}");
    }
    assert!(direct.overall_er(Block::NoCorrection).unwrap() > 0.0);
}

#[test]
fn aggregation_ignores_session_order() {
    let users = [SyntheticUser::new("p0", truth(), 3)
        .with_mt_noise(30.0)
        .with_endpoint_spread(0.3)];
    let mut logs = simulate(&ExperimentDesign::exp1(), &users, Block::NoCorrection);
    let forward = aggregate(&logs);
    logs.reverse();
    logs.swap(3, 17);
    assert_eq!(aggregate(&logs), forward);
}

#[test]
fn noiseless_grand_means_rank_the_true_model_first() {
    let users = [SyntheticUser::new("p0", truth(), 0)];
    let report = aggregate(&simulate(
        &ExperimentDesign::exp1(),
        &users,
        Block::NoCorrection,
    ));
    let data = report.grand_dataset(Block::NoCorrection).unwrap();
    let cmp = compare(&ModelKind::ALL, &data, &FitOptions::default()).unwrap();
    assert_eq!(cmp.best().unwrap().model, ModelKind::OnePartABShift);
}

#[test]
fn corrected_block_battery_has_forty_tests_and_no_equivalence() {
    let design = ExperimentDesign::exp2();
    let corrections: Vec<_> = design
        .conditions()
        .unwrap()
        .iter()
        .map(|c| correct_condition(&truth(), c, CorrectionPolicy::WidthOnly).unwrap())
        .collect();
    let users: Vec<SyntheticUser> = (0..6)
        .map(|i| {
            SyntheticUser::new(format!("p{i}"), truth(), 500 + i)
                .with_mt_noise(60.0)
                .with_endpoint_spread(0.2)
        })
        .collect();
    let mut logs = Vec::new();
    for u in &users {
        let conds: Vec<_> = corrections
            .iter()
            .map(|c| c.condition.with_width(c.rounded_width as f64))
            .collect();
        let sessions =
            blurfitts::simulate_experiment(u, &conds, design.n_targets, 1, Block::Correction)
                .unwrap();
        logs.extend(sessions.into_iter().map(|s| s.log));
    }
    let report = aggregate(&logs);
    let block: Vec<_> = report
        .participants
        .iter()
        .filter(|p| p.block == Block::Correction)
        .cloned()
        .collect();
    let battery = equivalence_battery(&block, &corrections, &BatteryOptions::default()).unwrap();
    assert_eq!(battery.n_tests, 40);
    assert!(battery.complete, "{:?}", battery.missing);
    assert_eq!(battery.n_equivalent, 0);
    assert!(!battery.attainable);
}
