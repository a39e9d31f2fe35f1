//! `blurfitts` command-line front end.
//!
//! Every JSON artifact is a bundle `{tool, config, result}`; commands that
//! read JSON accept either a bundle or a bare result. Exit codes: 0 on
//! success, 2 for input or schema errors, 3 when a computation fails.
//! Errors and warnings go to stderr as one JSON object per line.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use blurfitts::protocol::Block;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "blurfitts",
    version,
    about = "Blur-extended Fitts' law toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Trial CSV to per-participant and grand-mean condition summaries.
    Aggregate(AggregateArgs),
    /// Fit one model, or all of them with an AIC ranking.
    Fit(FitArgs),
    /// Leave-one-condition-out cross-validation.
    Loocv(LoocvArgs),
    /// Target-size corrections from fitted blur-model constants.
    Correct(CorrectArgs),
    /// Synthetic trial logs from a known model.
    Simulate(SimulateArgs),
    /// Paired TOST battery against the unblurred baseline.
    Equivalence(EquivalenceArgs),
    /// Target layout for one condition.
    Layout(LayoutArgs),
}

#[derive(Args, Serialize)]
pub struct AggregateArgs {
    /// Trial-log CSV.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Output file; stdout if omitted.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
pub struct FitArgs {
    /// Summaries JSON written by `aggregate`.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Model name (e.g. `one-part-ab-shift`) or `all`.
    #[arg(long, short, default_value = "all")]
    pub model: String,
    /// One fit per participant instead of one on the grand means.
    #[arg(long, conflicts_with = "grand_mean")]
    pub per_participant: bool,
    /// Fit the grand means (the default).
    #[arg(long)]
    pub grand_mean: bool,
    #[arg(long, default_value = "nc", value_parser = parse_block)]
    pub block: Block,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
pub struct LoocvArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    /// Model name or `all`.
    #[arg(long, short, default_value = "one-part-ab-shift")]
    pub model: String,
    #[arg(long, default_value = "nc", value_parser = parse_block)]
    pub block: Block,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
pub struct CorrectArgs {
    /// Fit report holding `one-part-ab-shift` constants.
    #[arg(long, conflicts_with_all = ["params", "coef"])]
    pub fit: Option<PathBuf>,
    /// JSON file with model constants (`{"kind": ..., "a": ..., ...}`).
    #[arg(long, conflicts_with = "coef")]
    pub params: Option<PathBuf>,
    /// Constants `a,b,c,d` inline.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub coef: Option<Vec<f64>>,
    #[arg(long = "A", requires_all = ["width", "blur"], conflicts_with = "design")]
    pub distance: Option<f64>,
    #[arg(long = "W")]
    pub width: Option<f64>,
    #[arg(long = "B")]
    pub blur: Option<f64>,
    /// Correct every condition of a design (`exp1`, `exp2` or a JSON file).
    #[arg(long)]
    pub design: Option<String>,
    /// `width`, `distance` or `joint:<delta A in px>`.
    #[arg(long, default_value = "width")]
    pub policy: String,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
pub struct SimulateArgs {
    /// `exp1`, `exp2` or a design JSON file.
    #[arg(long, default_value = "exp1")]
    pub design: String,
    /// Ground-truth model.
    #[arg(long, default_value = "one-part-ab-shift")]
    pub truth: String,
    /// JSON file with the ground-truth constants.
    #[arg(long, conflicts_with = "coef")]
    pub params: Option<PathBuf>,
    /// Ground-truth constants inline, `a,b,...`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub coef: Option<Vec<f64>>,
    #[arg(long, env = "BLURFITTS_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 6)]
    pub participants: usize,
    /// SD of the Gaussian movement-time noise, ms.
    #[arg(long, default_value_t = 0.0)]
    pub mt_noise_sd: f64,
    /// Endpoint SD as a fraction of the aimed-at width.
    #[arg(long, default_value_t = 0.0)]
    pub spread: f64,
    #[arg(long, default_value = "nc", value_parser = parse_block)]
    pub block: Block,
    /// Trial CSV; stdout if omitted.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Metadata bundle; defaults to `<out>.meta.json` when `--out` is set.
    #[arg(long)]
    pub meta: Option<PathBuf>,
}

#[derive(Args, Serialize)]
pub struct EquivalenceArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    /// Correction table mapping corrected widths back to nominal cells.
    #[arg(long)]
    pub corrections: Option<PathBuf>,
    #[arg(long, default_value = "c", value_parser = parse_block)]
    pub block: Block,
    #[arg(long, default_value_t = blurfitts::stats::DEFAULT_DZ)]
    pub dz: f64,
    #[arg(long, default_value_t = blurfitts::stats::DEFAULT_ALPHA)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub baseline_blur: f64,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
pub struct LayoutArgs {
    #[arg(long, default_value_t = 21)]
    pub n: usize,
    #[arg(long = "A")]
    pub distance: f64,
    #[arg(long = "W")]
    pub width: f64,
    #[arg(long = "B", default_value_t = 1.0)]
    pub blur: f64,
    #[arg(long, default_value_t = 960.0)]
    pub center_x: f64,
    #[arg(long, default_value_t = 540.0)]
    pub center_y: f64,
    /// Screen size `WIDTHxHEIGHT` for an on-screen check, e.g. `1920x1080`.
    #[arg(long)]
    pub screen: Option<String>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

fn parse_block(s: &str) -> Result<Block, String> {
    s.parse()
        .map_err(|e: blurfitts::ProtocolError| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Aggregate(a) => commands::aggregate(a),
        Command::Fit(a) => commands::fit(a),
        Command::Loocv(a) => commands::loocv(a),
        Command::Correct(a) => commands::correct(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Equivalence(a) => commands::equivalence(a),
        Command::Layout(a) => commands::layout(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
