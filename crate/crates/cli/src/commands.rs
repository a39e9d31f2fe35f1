use std::fs::File;
use std::path::{Path, PathBuf};

use blurfitts::correction::correct_condition;
use blurfitts::fitting::{self, compare_reports};
use blurfitts::protocol::{
    aggregate as aggregate_logs, generate_layout, read_trials_csv, write_trials_csv,
    AggregateReport, ExperimentDesign, Point,
};
use blurfitts::simulator::{participant_seed, simulate_participant};
use blurfitts::stats::{equivalence_battery, BatteryOptions};
use blurfitts::{
    ComparisonReport, CorrectionPolicy, CorrectionResult, CvReport, Dataset, FitOptions, FitReport,
    ModelKind, ModelParams, SyntheticUser, TaskCondition,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::output::{
    bundle, compute_err, emit, input_err, parse_result, read_result, warn, CliError,
};
use crate::{
    AggregateArgs, CorrectArgs, EquivalenceArgs, FitArgs, LayoutArgs, LoocvArgs, SimulateArgs,
};

fn config(args: &impl Serialize) -> Value {
    serde_json::to_value(args).unwrap_or(Value::Null)
}

fn models(name: &str) -> Result<Vec<ModelKind>, CliError> {
    if name == "all" {
        Ok(ModelKind::ALL.to_vec())
    } else {
        name.parse::<ModelKind>()
            .map(|k| vec![k])
            .map_err(input_err)
    }
}

fn design(name: &str) -> Result<ExperimentDesign, CliError> {
    match ExperimentDesign::by_name(name) {
        Some(d) => Ok(d),
        None => parse_result(Path::new(name), "experiment design"),
    }
}

fn summaries(path: &Path) -> Result<AggregateReport, CliError> {
    parse_result(path, "summaries file")
}

pub fn aggregate(args: &AggregateArgs) -> Result<(), CliError> {
    let file = File::open(&args.input)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", args.input.display())))?;
    let logs = read_trials_csv(file)
        .map_err(|e| CliError::Input(format!("{}: {e}", args.input.display())))?;
    let report = aggregate_logs(&logs);
    for r in &report.rejected {
        warn(&format!(
            "rejected session {} of participant {} (block {}): {}",
            r.session, r.participant, r.block, r.reason
        ));
    }
    emit(args.out.as_deref(), &bundle(config(args), &report)?)
}

#[derive(Serialize)]
struct ModelFailure {
    model: ModelKind,
    error: String,
}

#[derive(Serialize)]
struct FitSet {
    label: String,
    fits: Vec<FitReport>,
    errors: Vec<ModelFailure>,
    #[serde(skip_serializing_if = "Option::is_none")]
    comparison: Option<ComparisonReport>,
}

fn fit_set(data: &Dataset, kinds: &[ModelKind], rank: bool) -> FitSet {
    let opts = FitOptions::default();
    let mut fits = Vec::new();
    let mut errors = Vec::new();
    for &kind in kinds {
        match fitting::fit(kind, data, &opts) {
            Ok(r) => fits.push(r),
            Err(e) => errors.push(ModelFailure {
                model: kind,
                error: e.to_string(),
            }),
        }
    }
    let comparison = (rank && !fits.is_empty()).then(|| compare_reports(fits.clone()));
    FitSet {
        label: data.label.clone(),
        fits,
        errors,
        comparison,
    }
}

fn datasets(
    report: &AggregateReport,
    args_block: blurfitts::protocol::Block,
    per_participant: bool,
) -> Result<Vec<Dataset>, CliError> {
    if per_participant {
        let ids = report.participant_ids(args_block);
        if ids.is_empty() {
            return Err(CliError::Input(format!(
                "no participant summaries for block {args_block}"
            )));
        }
        ids.iter()
            .map(|p| report.participant_dataset(args_block, p).map_err(input_err))
            .collect()
    } else {
        Ok(vec![report.grand_dataset(args_block).map_err(input_err)?])
    }
}

pub fn fit(args: &FitArgs) -> Result<(), CliError> {
    let kinds = models(&args.model)?;
    let report = summaries(&args.input)?;
    let sets: Vec<FitSet> = datasets(&report, args.block, args.per_participant)?
        .iter()
        .map(|d| fit_set(d, &kinds, args.model == "all"))
        .collect();
    if sets.iter().all(|s| s.fits.is_empty()) {
        let reasons: Vec<String> = sets
            .iter()
            .flat_map(|s| s.errors.iter().map(|e| format!("{}: {}", e.model, e.error)))
            .collect();
        return Err(CliError::Compute(format!(
            "no model could be fitted ({})",
            reasons.join("; ")
        )));
    }
    for s in &sets {
        for e in &s.errors {
            warn(&format!("{} on {}: {}", e.model, s.label, e.error));
        }
    }
    let text = if args.per_participant {
        bundle(
            config(args),
            json!({ "scope": "per-participant", "participants": sets }),
        )?
    } else {
        let set = sets.into_iter().next().expect("one grand-mean dataset");
        bundle(
            config(args),
            json!({ "scope": "grand-mean", "label": set.label, "fits": set.fits, "errors": set.errors, "comparison": set.comparison }),
        )?
    };
    emit(args.out.as_deref(), &text)
}

pub fn loocv(args: &LoocvArgs) -> Result<(), CliError> {
    let kinds = models(&args.model)?;
    let data = summaries(&args.input)?
        .grand_dataset(args.block)
        .map_err(input_err)?;
    let opts = FitOptions::default();
    let mut reports: Vec<CvReport> = Vec::new();
    let mut errors = Vec::new();
    for kind in kinds {
        match fitting::loocv(kind, &data, &opts) {
            Ok(r) => reports.push(r),
            Err(e) => errors.push(ModelFailure {
                model: kind,
                error: e.to_string(),
            }),
        }
    }
    if reports.is_empty() {
        let reasons: Vec<String> = errors
            .iter()
            .map(|e| format!("{}: {}", e.model, e.error))
            .collect();
        return Err(CliError::Compute(format!(
            "cross-validation failed ({})",
            reasons.join("; ")
        )));
    }
    for r in reports.iter().filter(|r| !r.complete) {
        warn(&format!("{}: some folds produced no prediction", r.model));
    }
    emit(
        args.out.as_deref(),
        &bundle(
            config(args),
            json!({ "reports": reports, "errors": errors }),
        )?,
    )
}

fn parse_policy(s: &str) -> Result<CorrectionPolicy, CliError> {
    match s {
        "width" => Ok(CorrectionPolicy::WidthOnly),
        "distance" => Ok(CorrectionPolicy::DistanceOnly),
        _ => match s.strip_prefix("joint:") {
            Some(v) => v
                .parse()
                .map(|delta_a| CorrectionPolicy::Joint { delta_a })
                .map_err(|_| CliError::Input(format!("invalid joint policy amount `{v}`"))),
            None => Err(CliError::Input(format!(
                "policy must be `width`, `distance` or `joint:<delta A>`, got `{s}`"
            ))),
        },
    }
}

/// Constants from a bare params object, a params array with `kind`, or a
/// grand-mean fit report.
fn params_from_value(
    value: Value,
    kind: ModelKind,
    source: &Path,
) -> Result<ModelParams, CliError> {
    if let Some(values) = value.as_array() {
        let values: Option<Vec<f64>> = values.iter().map(Value::as_f64).collect();
        let values = values.ok_or_else(|| {
            CliError::Input(format!("{}: constants must be numbers", source.display()))
        })?;
        return ModelParams::new(kind, &values).map_err(input_err);
    }
    if let Some(fits) = value.get("fits").and_then(Value::as_array) {
        let found = fits
            .iter()
            .find(|f| f.get("model").and_then(Value::as_str) == Some(kind.name()))
            .ok_or_else(|| {
                CliError::Input(format!("{} has no {} fit", source.display(), kind.name()))
            })?;
        return serde_json::from_value(found["params"].clone()).map_err(input_err);
    }
    if value.get("participants").is_some() {
        return Err(CliError::Input(format!(
            "{} holds per-participant fits; pass a grand-mean fit report",
            source.display()
        )));
    }
    serde_json::from_value(value).map_err(|e| {
        CliError::Input(format!(
            "{} does not contain model constants: {e}",
            source.display()
        ))
    })
}

fn load_params(
    fit: Option<&Path>,
    params: Option<&Path>,
    coef: Option<&[f64]>,
    kind: ModelKind,
) -> Result<ModelParams, CliError> {
    match (fit.or(params), coef) {
        (Some(path), _) => params_from_value(read_result(path)?, kind, path),
        (None, Some(values)) => ModelParams::new(kind, values).map_err(input_err),
        (None, None) => Err(CliError::Input(
            "model constants required: pass --fit, --params or --coef".into(),
        )),
    }
}

pub fn correct(args: &CorrectArgs) -> Result<(), CliError> {
    let params = load_params(
        args.fit.as_deref(),
        args.params.as_deref(),
        args.coef.as_deref(),
        ModelKind::OnePartABShift,
    )?;
    let policy = parse_policy(&args.policy)?;
    let conditions = match (&args.design, args.distance, args.width, args.blur) {
        (Some(d), ..) => design(d)?.conditions().map_err(input_err)?,
        (None, Some(a), Some(w), Some(b)) => vec![TaskCondition::new(a, w, b).map_err(input_err)?],
        _ => return Err(CliError::Input("pass --A, --W and --B, or --design".into())),
    };
    let results: Vec<CorrectionResult> = conditions
        .iter()
        .map(|c| correct_condition(&params, c, policy).map_err(compute_err))
        .collect::<Result<_, _>>()?;
    for r in results.iter().filter(|r| !r.feasible) {
        warn(&format!(
            "correction for A={} W={} B={} is infeasible (corrected A={}, corrected W={})",
            r.condition.distance,
            r.condition.width,
            r.condition.blur,
            r.corrected_distance,
            r.corrected_width
        ));
    }
    emit(args.out.as_deref(), &bundle(config(args), &results)?)
}

pub fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let design = design(&args.design)?;
    let kind: ModelKind = args.truth.parse().map_err(input_err)?;
    let truth = load_params(None, args.params.as_deref(), args.coef.as_deref(), kind)?;
    if truth.kind() != kind {
        return Err(CliError::Input(format!(
            "--truth is {kind} but the constants are for {}",
            truth.kind()
        )));
    }
    if args.participants == 0 {
        return Err(CliError::Input("--participants must be at least 1".into()));
    }
    let users: Vec<SyntheticUser> = (0..args.participants)
        .map(|i| {
            SyntheticUser::new(
                format!("s{:02}", i + 1),
                truth,
                participant_seed(args.seed, i as u64),
            )
            .with_mt_noise(args.mt_noise_sd)
            .with_endpoint_spread(args.spread)
        })
        .collect();
    let mut logs = Vec::new();
    for (i, user) in users.iter().enumerate() {
        let sessions = simulate_participant(user, &design, i, args.block).map_err(|e| match e {
            blurfitts::SimulationError::Model(m) => CliError::Compute(m.to_string()),
            other => CliError::Input(other.to_string()),
        })?;
        logs.extend(sessions.into_iter().map(|s| s.log));
    }
    let mut csv = Vec::new();
    write_trials_csv(&mut csv, &logs).map_err(compute_err)?;
    let csv = String::from_utf8(csv).map_err(compute_err)?;

    let (id_min, id_max) = design.id_range().unwrap_or((f64::NAN, f64::NAN));
    let meta = bundle(
        config(args),
        json!({
            "design": design,
            "conditions": design.conditions().map_err(input_err)?.len(),
            "id_range_bits": { "min": id_min, "max": id_max },
            "measured_trials_per_participant": design.measured_trials(),
            "participants": users.iter().map(|u| json!({ "id": u.id, "seed": u.seed })).collect::<Vec<_>>(),
            "truth": truth,
            "sessions": logs.len(),
        }),
    )?;
    let meta_path = args.meta.clone().or_else(|| {
        args.out.as_ref().map(|o| {
            let mut p = PathBuf::from(o);
            p.set_file_name(format!(
                "{}.meta.json",
                o.file_name().unwrap_or_default().to_string_lossy()
            ));
            p
        })
    });
    emit(args.out.as_deref(), &csv)?;
    if let Some(p) = meta_path {
        emit(Some(&p), &meta)?;
    }
    Ok(())
}

pub fn equivalence(args: &EquivalenceArgs) -> Result<(), CliError> {
    let report = summaries(&args.input)?;
    let corrections: Vec<CorrectionResult> = match &args.corrections {
        Some(p) => parse_result(p, "correction table")?,
        None => Vec::new(),
    };
    let rows: Vec<_> = report
        .participants
        .iter()
        .filter(|p| p.block == args.block)
        .cloned()
        .collect();
    if rows.is_empty() {
        return Err(CliError::Input(format!(
            "no participant summaries for block {}",
            args.block
        )));
    }
    let opts = BatteryOptions {
        baseline_blur: args.baseline_blur,
        dz: args.dz,
        alpha: args.alpha,
    };
    let battery = equivalence_battery(&rows, &corrections, &opts).map_err(compute_err)?;
    if !battery.complete {
        warn(&format!(
            "battery incomplete: {} missing cells",
            battery.missing.len()
        ));
    }
    if !battery.attainable {
        warn("with this many participants the TOST cannot establish equivalence for any data");
    }
    emit(args.out.as_deref(), &bundle(config(args), &battery)?)
}

fn parse_screen(s: &str) -> Result<(f64, f64), CliError> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| CliError::Input(format!("screen must look like 1920x1080, got `{s}`")))?;
    Ok((
        w.trim().parse().map_err(input_err)?,
        h.trim().parse().map_err(input_err)?,
    ))
}

/// Writes the bare layout object, which the task runner loads directly.
pub fn layout(args: &LayoutArgs) -> Result<(), CliError> {
    let layout = generate_layout(
        args.n,
        args.distance,
        args.width,
        args.blur,
        Point::new(args.center_x, args.center_y),
    )
    .map_err(input_err)?;
    if let Some(screen) = &args.screen {
        let (w, h) = parse_screen(screen)?;
        for message in layout.check_bounds(w, h) {
            warn(&message);
        }
    }
    let mut text = layout.to_json().map_err(compute_err)?;
    text.push('\n');
    emit(args.out.as_deref(), &text)
}
