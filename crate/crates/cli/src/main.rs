//! `xtalbench` — command-line driver for the superconductor structure
//! benchmark: fetch → ingest → split → eval → stats → plot.
//!
//! Exit codes: 0 success, 2 usage error (from clap), 3 data error
//! (malformed input, failed validation), 4 I/O or network error.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use xtalbench_core::dataset::DatasetSchema;
use xtalbench_core::metrics::{MatchMode, RmseNorm};
use xtalbench_core::niggli::{DEFAULT_MAX_ITER, DEFAULT_TOL};
use xtalbench_core::split::TestRounding;
use xtalbench_core::stats::{Weighting, DEFAULT_ANG_TOL_DEG, DEFAULT_LEN_TOL_REL};

mod commands;
mod plots;

fn version_line() -> &'static str {
    let s = format!(
        "{} (schemas: {}, {}, {}, {})",
        env!("CARGO_PKG_VERSION"),
        xtalbench_core::SCHEMA_CANONICAL,
        xtalbench_core::SCHEMA_SPLIT,
        xtalbench_core::SCHEMA_REPORT,
        xtalbench_core::SCHEMA_STATS,
    );
    Box::leak(s.into_boxed_str())
}

#[derive(Parser)]
#[command(
    name = "xtalbench",
    version = version_line(),
    about = "Benchmark toolkit for inverse crystal-structure generation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Download a dataset into the local cache, verifying its sha256.
    Fetch(FetchArgs),
    /// Validate a raw dataset file and emit canonical JSON.
    Ingest(IngestArgs),
    /// Produce a deterministic train/val/test split of a canonical file.
    Split(SplitArgs),
    /// Evaluate predicted structures against ground truth.
    Eval(EvalArgs),
    /// Composition / crystal-family / Tc statistics of a canonical file.
    Stats(StatsArgs),
    /// Render SVG charts from a metric report or a stats file.
    Plot(PlotArgs),
}

#[derive(Args)]
struct FetchArgs {
    /// Manifest JSON ({name, source_url, sha256, record_count?}).
    #[arg(long, conflicts_with_all = ["url", "sha256"])]
    manifest: Option<PathBuf>,
    /// Ad-hoc source URL (requires --sha256).
    #[arg(long, requires = "sha256")]
    url: Option<String>,
    /// Expected sha256 (64 lowercase hex digits) for --url.
    #[arg(long, requires = "url")]
    sha256: Option<String>,
    /// Cache name for --url downloads.
    #[arg(long, default_value = "dataset")]
    name: String,
    /// Directory holding verified downloads.
    #[arg(long, env = "XTALBENCH_CACHE_DIR")]
    cache_dir: PathBuf,
}

#[derive(Args)]
struct IngestArgs {
    /// Raw dataset file (JSON).
    #[arg(long)]
    input: PathBuf,
    /// Input layout: jarvis | alexandria | generic.
    #[arg(long, value_parser = parse_schema)]
    schema: DatasetSchema,
    /// Canonical JSON output path (sibling .meta.json and .rejects.json
    /// are written next to it).
    #[arg(long)]
    out: PathBuf,
    /// Exit 0 even when some records were rejected (they are always
    /// listed in the rejects file either way).
    #[arg(long)]
    allow_rejects: bool,
}

#[derive(Args)]
struct SplitArgs {
    /// Canonical JSON produced by `ingest`.
    #[arg(long)]
    input: PathBuf,
    /// Shuffle seed.
    #[arg(long, default_value_t = 3407)]
    seed: u64,
    /// Train,val,test fractions (must sum to 1).
    #[arg(long, default_value = "0.8,0.1,0.1", value_parser = parse_ratios)]
    ratios: Ratios,
    /// How the test-set size is rounded: floor | remainder.
    #[arg(long, default_value = "floor", value_parser = parse_rounding)]
    test_rounding: TestRounding,
    /// Split JSON output path.
    #[arg(long)]
    out: PathBuf,
}

/// Newtype so clap can carry a parsed `[f64; 3]`.
#[derive(Clone, Copy)]
struct Ratios([f64; 3]);

#[derive(Args)]
struct EvalArgs {
    /// Ground-truth canonical JSON.
    #[arg(long)]
    truth: PathBuf,
    /// Predictions: a directory of `<id>.vasp|.poscar|.txt` files, or a
    /// single canonical JSON file.
    #[arg(long)]
    pred: PathBuf,
    /// Split JSON; restricts evaluation to one subset. Without it every
    /// record in the truth file is evaluated.
    #[arg(long)]
    split: Option<PathBuf>,
    /// Which subset of --split to evaluate: train | val | test.
    #[arg(long, default_value = "test")]
    subset: String,
    /// Metric report output path (JSON).
    #[arg(long)]
    out: PathBuf,
    /// Also emit a leaderboard CSV here (sibling .meta.json carries the
    /// config echo).
    #[arg(long)]
    leaderboard: Option<PathBuf>,
    /// Histogram bin count for the KLD metrics.
    #[arg(long, default_value_t = 30)]
    nbins: usize,
    /// KLD smoothing epsilon.
    #[arg(long, default_value_t = 1e-9)]
    epsilon: f64,
    /// Second epsilon for the smoothing-sensitivity check.
    #[arg(long, default_value_t = 1e-6)]
    epsilon_sensitivity: f64,
    /// RMSE length normalization: vol_per_atom | cell_diagonal.
    #[arg(long, default_value = "vol_per_atom", value_parser = parse_rmse_norm)]
    rmse_norm: RmseNorm,
    /// Atom matching: assignment (optimal) | index (positional).
    #[arg(long, default_value = "assignment", value_parser = parse_match_mode)]
    match_mode: MatchMode,
    /// Remove the best rigid fractional translation before the RMSE.
    #[arg(long)]
    align_translation: bool,
    /// Niggli reduction tolerance (relative, scaled by V^(2/3)).
    #[arg(long, default_value_t = DEFAULT_TOL)]
    niggli_tol: f64,
    /// Niggli reduction iteration cap.
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    niggli_max_iter: usize,
    /// Compare cells as given instead of Niggli-reducing both sides.
    #[arg(long)]
    no_reduce: bool,
}

#[derive(Args)]
struct StatsArgs {
    /// Canonical JSON produced by `ingest`.
    #[arg(long)]
    input: PathBuf,
    /// Stats JSON output path.
    #[arg(long)]
    out: PathBuf,
    /// Element fractions weighted by: site_count | per_structure.
    #[arg(long, default_value = "site_count", value_parser = parse_weighting)]
    weighting: Weighting,
    /// How many top elements to list.
    #[arg(long, default_value_t = 23)]
    top_k: usize,
    /// Tc histogram bin width in Kelvin.
    #[arg(long, default_value_t = 5.0)]
    tc_bin_width: f64,
    /// Relative length tolerance for the crystal-family proxy.
    #[arg(long, default_value_t = DEFAULT_LEN_TOL_REL)]
    len_tol_rel: f64,
    /// Angle tolerance (degrees) for the crystal-family proxy.
    #[arg(long, default_value_t = DEFAULT_ANG_TOL_DEG)]
    ang_tol_deg: f64,
    /// Niggli reduction tolerance used before classification.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    niggli_tol: f64,
    /// Niggli reduction iteration cap.
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    niggli_max_iter: usize,
}

#[derive(Args)]
struct PlotArgs {
    /// Metric report JSON from `eval`.
    #[arg(long, conflicts_with = "stats")]
    report: Option<PathBuf>,
    /// Stats JSON from `stats`.
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Directory receiving the SVG files (created if missing).
    #[arg(long)]
    out_dir: PathBuf,
}

fn parse_schema(s: &str) -> Result<DatasetSchema, String> {
    DatasetSchema::from_str(s).map_err(|e| e.to_string())
}

fn parse_rounding(s: &str) -> Result<TestRounding, String> {
    TestRounding::from_str(s).map_err(|e| e.to_string())
}

fn parse_rmse_norm(s: &str) -> Result<RmseNorm, String> {
    RmseNorm::from_str(s).map_err(|e| e.to_string())
}

fn parse_match_mode(s: &str) -> Result<MatchMode, String> {
    MatchMode::from_str(s).map_err(|e| e.to_string())
}

fn parse_weighting(s: &str) -> Result<Weighting, String> {
    Weighting::from_str(s).map_err(|e| e.to_string())
}

fn parse_ratios(s: &str) -> Result<Ratios, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!(
            "expected three comma-separated fractions, found {}",
            parts.len()
        ));
    }
    let mut out = [0.0; 3];
    for (slot, part) in out.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse::<f64>()
            .map_err(|_| format!("not a number: {part:?}"))?;
    }
    Ok(Ratios(out))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fetch(args) => commands::fetch(args),
        Command::Ingest(args) => commands::ingest(args),
        Command::Split(args) => commands::split(args),
        Command::Eval(args) => commands::eval(args),
        Command::Stats(args) => commands::stats(args),
        Command::Plot(args) => commands::plot(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // single line, machine-parsable: "error: <kind message>"
            eprintln!("error: {e}");
            if e.is_io_like() {
                ExitCode::from(4)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
