//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p blurfitts --test acceptance`. The process exits
//! non-zero when any criterion fails.

use std::time::{Duration, Instant};

use blurfitts::correction::{correct_condition, delta_w_closed_form, delta_w_numeric};
use blurfitts::fitting::{fit, loocv, support_category};
use blurfitts::protocol::{aggregate, Block, ExperimentDesign, Point, SessionLog, TrialRecord};
use blurfitts::simulator::{participant_seed, simulate_experiment, simulate_participant};
use blurfitts::stats::{equivalence_battery, holm_correct, tost_attainable, BatteryOptions};
use blurfitts::{
    index_of_difficulty, predict_mt, sigma_from_ksize, CorrectionPolicy, DataPoint, Dataset,
    FitOptions, ModelKind, ModelParams, SyntheticUser, TaskCondition,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

const BLUR_MODEL_FIT: [f64; 4] = [56.8, 200.0, 0.0738, 1.88];

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn blur_model() -> ModelParams {
    ModelParams::new(ModelKind::OnePartABShift, &BLUR_MODEL_FIT).unwrap()
}

fn delta_w_fixture() -> Outcome {
    let cond = TaskCondition::new(300.0, 18.0, 101.0).unwrap();
    let r = correct_condition(&blur_model(), &cond, CorrectionPolicy::WidthOnly).unwrap();
    check(
        (r.delta_w - 18.66).abs() <= 0.01 && r.rounded_width == 37,
        format!(
            "dW = {:.4} px, rounded corrected W = {} px",
            r.delta_w, r.rounded_width
        ),
    )
}

fn id_fixtures() -> Outcome {
    let cases = [
        (300.0, 78.0, 2.28),
        (500.0, 12.0, 5.42),
        (1100.0, 12.0, 6.53),
    ];
    let got: Vec<f64> = cases
        .iter()
        .map(|&(a, w, _)| index_of_difficulty(a, w).unwrap())
        .collect();
    let pass = cases
        .iter()
        .zip(&got)
        .all(|(c, g)| (g - c.2).abs() <= 0.005);
    check(
        pass,
        format!("ID = {:.4}, {:.4}, {:.4} bits", got[0], got[1], got[2]),
    )
}

fn sigma_mapping() -> Outcome {
    let ks = [1, 21, 41, 61, 81, 101];
    let want = [0.5, 3.5, 6.5, 9.5, 12.5, 15.5];
    let got: Vec<f64> = ks
        .iter()
        .map(|&k| sigma_from_ksize::<f64>(k).unwrap())
        .collect();
    let exact: Vec<String> = ks
        .iter()
        .map(|&k| {
            blurfitts::model::sigma_from_ksize_exact(k)
                .unwrap()
                .to_string()
        })
        .collect();
    check(
        got == want,
        format!("sigma = {got:?} (exact {})", exact.join(", ")),
    )
}

fn correction_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20240611);
    let mut worst_dw = 0.0_f64;
    let mut worst_mt = 0.0_f64;
    for _ in 0..1000 {
        let distance = rng.random_range(100.0..1200.0);
        let width = rng.random_range(8.0..100.0);
        let blur = (2 * rng.random_range(0..=50) + 1) as f64;
        let max_c = 0.9 * width / (blur - 1.0).max(1.0);
        let params = ModelParams::new(
            ModelKind::OnePartABShift,
            &[
                rng.random_range(-100.0..300.0),
                rng.random_range(50.0..400.0),
                rng.random_range(0.0..max_c.min(0.2)),
                rng.random_range(0.0..5.0),
            ],
        )
        .unwrap();
        let cond = TaskCondition::new(distance, width, blur).unwrap();
        let closed = delta_w_closed_form(&params, &cond).unwrap();
        let numeric = delta_w_numeric(&params, &cond).unwrap();
        worst_dw = worst_dw.max((closed - numeric).abs());
        let reference = predict_mt(&params, &cond.with_blur(1.0)).unwrap().ms();
        let corrected = predict_mt(&params, &cond.with_width(width + closed))
            .unwrap()
            .ms();
        worst_mt = worst_mt.max((reference - corrected).abs());
    }
    check(
        worst_dw <= 1e-6 && worst_mt <= 1e-6,
        format!("1000 points: max |closed - numeric| = {worst_dw:.2e} px, max MT gap = {worst_mt:.2e} ms"),
    )
}

/// Constants of the base model that an extended model collapses to at B = 1.
fn base_values(p: &ModelParams) -> Vec<f64> {
    let v = p.values();
    match p.kind() {
        k if !k.is_two_part() => vec![v[0], v[1]],
        ModelKind::TwoPartABShift => vec![v[0], v[1], v[3]],
        _ => vec![v[0], v[1], v[2]],
    }
}

fn reduction_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0_f64;
    let mut count = 0;
    for kind in ModelKind::ALL.into_iter().filter(|k| k.base() != *k) {
        for _ in 0..250 {
            let values: Vec<f64> = (0..kind.param_count())
                .map(|_| rng.random_range(0.0..50.0))
                .collect();
            let params = ModelParams::new(kind, &values).unwrap();
            let base = ModelParams::new(kind.base(), &base_values(&params)).unwrap();
            let cond = TaskCondition::new(
                rng.random_range(50.0..1500.0),
                rng.random_range(4.0..120.0),
                1.0,
            )
            .unwrap();
            let a = predict_mt(&params, &cond).unwrap().ms();
            let b = predict_mt(&base, &cond).unwrap().ms();
            worst = worst.max((a - b).abs());
            count += 1;
        }
    }
    check(
        worst <= 1e-9,
        format!("{count} points over 6 extended kinds: max |diff| = {worst:.2e} ms"),
    )
}

fn truth(kind: ModelKind) -> ModelParams {
    let values: &[f64] = match kind {
        ModelKind::OnePart => &[56.8, 200.0],
        ModelKind::OnePartLinB => &[60.0, 190.0, 1.5],
        ModelKind::OnePartWShrink => &[50.0, 205.0, 0.07],
        ModelKind::OnePartABShift => &BLUR_MODEL_FIT,
        ModelKind::TwoPart => &[-300.0, 210.0, 190.0],
        ModelKind::TwoPartLinB => &[-300.0, 210.0, 190.0, 1.4],
        ModelKind::TwoPartWShrink => &[-280.0, 205.0, 195.0, 0.07],
        ModelKind::TwoPartABShift => &[-280.0, 205.0, 1.9, 195.0, 0.07],
    };
    ModelParams::new(kind, values).unwrap()
}

fn grid_dataset(params: &ModelParams, noise: Option<(f64, u64)>) -> Dataset {
    let mut rng = noise.map(|(_, seed)| ChaCha8Rng::seed_from_u64(seed));
    let normal = Normal::new(0.0, noise.map_or(1.0, |n| n.0)).unwrap();
    let points = ExperimentDesign::exp1()
        .conditions()
        .unwrap()
        .into_iter()
        .map(|condition| {
            let mut mean_mt = predict_mt(params, &condition).unwrap().ms();
            if let Some(rng) = rng.as_mut() {
                mean_mt += normal.sample(rng);
            }
            DataPoint {
                condition,
                mean_mt,
                n_trials: 21,
            }
        })
        .collect();
    Dataset::new("exp1 grid", points).unwrap()
}

fn recovery_suite() -> Outcome {
    let opts = FitOptions::default();
    let mut worst = (0.0_f64, ModelKind::OnePart);
    for kind in ModelKind::ALL {
        let t = truth(kind);
        let fitted = fit(kind, &grid_dataset(&t, None), &opts).unwrap();
        for (g, w) in fitted.params.values().iter().zip(t.values()) {
            let rel = ((g - w) / w).abs();
            if rel > worst.0 {
                worst = (rel, kind);
            }
        }
    }
    let mut wins = 0;
    for seed in 0..10 {
        let data = grid_dataset(&blur_model(), Some((30.0, 1000 + seed)));
        let shifted = fit(ModelKind::OnePartABShift, &data, &opts).unwrap();
        let plain = fit(ModelKind::OnePart, &data, &opts).unwrap();
        let cv_shifted = loocv(ModelKind::OnePartABShift, &data, &opts).unwrap();
        let cv_plain = loocv(ModelKind::OnePart, &data, &opts).unwrap();
        if shifted.aic < plain.aic && cv_shifted.mae < cv_plain.mae {
            wins += 1;
        }
    }
    check(
        worst.0 <= 1e-3 && wins >= 9,
        format!(
            "noiseless: max relative error {:.2e} ({}); noisy SD 30 ms: blur model wins AIC and LOOCV MAE in {wins}/10 seeds",
            worst.0, worst.1
        ),
    )
}

fn design_arithmetic() -> Outcome {
    let user = SyntheticUser::new("s01", blur_model(), participant_seed(0, 0));
    let sessions =
        simulate_participant(&user, &ExperimentDesign::exp1(), 0, Block::NoCorrection).unwrap();
    let measured: usize = sessions.iter().map(|s| s.log.measured_targets()).sum();
    let logs: Vec<SessionLog> = sessions.into_iter().map(|s| s.log).collect();
    let report = aggregate(&logs);
    let data = report.grand_dataset(Block::NoCorrection).unwrap();
    let folds = loocv(ModelKind::OnePartABShift, &data, &FitOptions::default())
        .unwrap()
        .folds
        .len();
    check(
        logs.len() == 48 && measured == 1008 && folds == 48,
        format!(
            "{} sessions, {measured} measured trials, {folds} LOOCV folds",
            logs.len()
        ),
    )
}

fn aggregation_fixture() -> Outcome {
    let design = ExperimentDesign::exp1();
    let conditions = design.conditions().unwrap();
    let mut misses_left = 2383;
    let mut logs = Vec::new();
    for p in 0..12 {
        for (s, cond) in conditions.iter().enumerate() {
            let record = |trial_index, attempt, click_time, hit| TrialRecord {
                condition: *cond,
                trial_index,
                click_time,
                click_point: Point::default(),
                target_center: Point::default(),
                hit,
                attempt,
            };
            let mut trials = vec![record(0, 1, 0.0, true)];
            let mut now = 0.0;
            for t in 1..=design.n_targets {
                if misses_left > 0 {
                    misses_left -= 1;
                    // A slow miss; its MT must not reach the mean.
                    trials.push(record(t, 1, now + 5000.0, false));
                    trials.push(record(t, 2, now + 5300.0, true));
                    now += 5300.0;
                } else {
                    now += 800.0;
                    trials.push(record(t, 1, now, true));
                }
            }
            logs.push(SessionLog {
                participant: format!("p{p:02}"),
                block: Block::NoCorrection,
                session: s as u32,
                condition: *cond,
                trials,
                practice: false,
            });
        }
    }
    let report = aggregate(&logs);
    let er = report.overall_er(Block::NoCorrection).unwrap();
    let n: usize = report.participants.iter().map(|p| p.summary.n_trials).sum();
    let errors: usize = report.participants.iter().map(|p| p.summary.n_errors).sum();
    let means_clean = report
        .participants
        .iter()
        .all(|p| p.summary.mean_mt.is_none_or(|m| m == 800.0));
    check(
        n == 12096 && errors == 2383 && (er - 0.197).abs() <= 0.0005 && means_clean,
        format!(
            "{errors}/{n} first-click misses, ER = {:.3}%, error-trial MTs excluded: {means_clean}",
            er * 100.0
        ),
    )
}

fn holm_reference_vectors() -> Vec<(Vec<f64>, Vec<f64>)> {
    let v: serde_json::Value =
        serde_json::from_str(include_str!("data/reference_stats.json")).unwrap();
    let floats = |x: &serde_json::Value| -> Vec<f64> {
        x.as_array()
            .unwrap()
            .iter()
            .map(|f| f.as_f64().unwrap())
            .collect()
    };
    v["holm"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| (floats(&c["p"]), floats(&c["adjusted"])))
        .collect()
}

fn tost_battery() -> Outcome {
    let design = ExperimentDesign::exp2();
    let conditions = design.conditions().unwrap();
    let mut logs = Vec::new();
    for i in 0..6 {
        let user = SyntheticUser::new(
            format!("s{:02}", i + 1),
            blur_model(),
            participant_seed(3, i),
        )
        .with_mt_noise(60.0)
        .with_endpoint_spread(0.2);
        let sessions =
            simulate_experiment(&user, &conditions, design.n_targets, 1, Block::Correction)
                .unwrap();
        logs.extend(sessions.into_iter().map(|s| s.log));
    }
    let report = aggregate(&logs);
    let battery =
        equivalence_battery(&report.participants, &[], &BatteryOptions::default()).unwrap();
    let attainable = tost_attainable(6, 0.2, 0.05).unwrap();

    let vectors = holm_reference_vectors();
    let mut worst = 0.0_f64;
    for (p, adjusted) in &vectors {
        for (g, w) in holm_correct(p).unwrap().iter().zip(adjusted) {
            worst = worst.max((g - w).abs());
        }
    }
    check(
        battery.n_tests == 40 && battery.n_equivalent == 0 && !attainable && vectors.len() >= 20 && worst <= 1e-10,
        format!(
            "{} tests, {} equivalences, n=6 attainable: {attainable}; Holm vs reference on {} vectors: max |diff| = {worst:.1e}",
            battery.n_tests,
            battery.n_equivalent,
            vectors.len()
        ),
    )
}

fn aic_categories() -> Outcome {
    let got = [10.1, 3.5, 0.0].map(|d| support_category(d).label());
    check(
        got == ["no support", "considerable support", "supported"],
        format!("10.1 -> {}, 3.5 -> {}, 0 -> {}", got[0], got[1], got[2]),
    )
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        (
            "width correction fixture",
            Duration::from_secs(1),
            delta_w_fixture,
        ),
        (
            "index of difficulty fixtures",
            Duration::from_secs(1),
            id_fixtures,
        ),
        (
            "blur kernel to sigma mapping",
            Duration::from_secs(1),
            sigma_mapping,
        ),
        (
            "closed-form vs numeric correction",
            Duration::from_secs(5),
            correction_oracle,
        ),
        (
            "reduction to base models at B=1",
            Duration::from_secs(5),
            reduction_suite,
        ),
        (
            "parameter recovery and noisy model selection",
            Duration::from_secs(60),
            recovery_suite,
        ),
        (
            "design arithmetic",
            Duration::from_secs(10),
            design_arithmetic,
        ),
        (
            "aggregation fixture",
            Duration::from_secs(10),
            aggregation_fixture,
        ),
        (
            "equivalence battery and Holm reference",
            Duration::from_secs(10),
            tost_battery,
        ),
        (
            "delta-AIC categories",
            Duration::from_secs(1),
            aic_categories,
        ),
    ];
    let mut failures = 0;
    for (name, budget, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let pass = outcome.pass && elapsed <= budget;
        if !pass {
            failures += 1;
        }
        println!(
            "{} {name}: {} [{:.2} s, budget {} s]",
            if pass { "PASS" } else { "FAIL" },
            outcome.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!("{} of 10 criteria passed", 10 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
