//! `mvrf`: train, benchmark, and apply multi-view random forest
//! ensembles with weighted-vote combiners.
//!
//! Exit codes: 0 on success, 1 for usage errors, 2 for data or model
//! errors, 3 for internal errors. Every flag with an `MVRF_*`
//! environment variable can be overridden through it.

mod ops;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "mvrf", version, about, propagate_version = true)]
pub struct Cli {
    /// Thread cap for forest training; 0 keeps the rayon default.
    #[arg(long, global = true, env = "MVRF_THREADS", default_value_t = 0)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Benchmark vote combiners with repeated stratified splits.
    #[command(visible_alias = "compare")]
    Evaluate(EvaluateArgs),
    /// Benchmark the blended combiner over a grid of exponents.
    SweepA(SweepArgs),
    /// Train an ensemble on a full dataset and save it.
    Train(TrainArgs),
    /// Score new samples with a saved ensemble.
    Predict(PredictArgs),
}

/// Dataset sources shared by the benchmarking subcommands. Real tables
/// and synthetic specs can be mixed; each contributes one dataset row
/// to the report.
#[derive(Args)]
pub struct DataArgs {
    /// Delimited data table; repeat for several datasets.
    #[arg(long = "data", value_name = "TABLE")]
    pub data: Vec<PathBuf>,

    /// View manifest: one per table, or a single shared one.
    #[arg(long = "manifest", value_name = "TOML")]
    pub manifest: Vec<PathBuf>,

    /// Synthetic dataset spec; repeat for several.
    #[arg(long = "synth", value_name = "TOML")]
    pub synth: Vec<PathBuf>,
}

#[derive(Args)]
pub struct ForestArgs {
    /// Trees per view forest.
    #[arg(long, env = "MVRF_TREES", default_value_t = 500)]
    pub trees: usize,

    /// Neighborhood size for local vote weights.
    #[arg(long, env = "MVRF_NEIGHBORS", default_value_t = 7)]
    pub neighbors: usize,

    /// Master seed; drawn from the OS and echoed when omitted.
    #[arg(long, env = "MVRF_SEED")]
    pub seed: Option<u64>,
}

#[derive(Args)]
pub struct ProtocolArgs {
    /// Independent train/test splits to average over.
    #[arg(long, env = "MVRF_REPEATS", default_value_t = 10)]
    pub repeats: usize,

    /// Fraction of each class assigned to the train half.
    #[arg(long, env = "MVRF_FRACTION", default_value_t = 0.5)]
    pub fraction: f64,
}

#[derive(Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub forest: ForestArgs,
    #[command(flatten)]
    pub protocol: ProtocolArgs,

    /// Comma-separated combiners: mv, wrf, gdv, ldv, gldv, glnew:<a>.
    #[arg(long, env = "MVRF_METHODS", default_value = "mv,wrf,gdv,ldv,gldv")]
    pub methods: String,

    /// External baseline column (TOML), shown before the computed ones.
    #[arg(long, value_name = "TOML")]
    pub external: Option<PathBuf>,

    /// Output directory for report.md and accuracies.csv.
    #[arg(long, env = "MVRF_OUT")]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub forest: ForestArgs,
    #[command(flatten)]
    pub protocol: ProtocolArgs,

    /// Comma-separated blend exponents in [0, 1].
    #[arg(
        long = "a-grid",
        env = "MVRF_A_GRID",
        default_value = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1"
    )]
    pub a_grid: String,

    /// Output directory for sweep.md and sweep.csv.
    #[arg(long, env = "MVRF_OUT")]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub forest: ForestArgs,

    /// Output directory for model.json.
    #[arg(long, env = "MVRF_OUT")]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct PredictArgs {
    /// Saved model from `mvrf train`.
    #[arg(long, value_name = "JSON")]
    pub model: PathBuf,

    /// Query table; its label column, if any, is ignored.
    #[arg(long, value_name = "TABLE")]
    pub data: PathBuf,

    /// View manifest describing the query table.
    #[arg(long, value_name = "TOML")]
    pub manifest: PathBuf,

    /// Combiner for the final vote.
    #[arg(long, default_value = "gldv")]
    pub method: String,

    /// Neighborhood size for local vote weights.
    #[arg(long, env = "MVRF_NEIGHBORS", default_value_t = 7)]
    pub neighbors: usize,

    /// Output directory for predictions.csv.
    #[arg(long, env = "MVRF_OUT")]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // --help and --version land here too; only real usage
            // mistakes take the error path.
            let failed = err.use_stderr();
            let _ = err.print();
            return if failed {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match ops::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
