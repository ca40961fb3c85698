mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "hcost", version, about = "Sublinear Dasgupta-cost estimation on clusterable graphs")]
struct Cli {
    /// Worker threads for walks and per-pair sampling.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Record per-stage wall times in the report.
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a clusterable instance.
    Gen(GenArgs),
    /// Run an estimator on a labeled graph.
    Estimate(EstimateArgs),
    /// D1 vs D2 contracted-cost experiment.
    LbExperiment(LbArgs),
    /// Exact baselines on a labeled graph.
    Exact(ExactArgs),
    /// Validate reports and re-emit them.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    D1,
    D2,
    Planted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Threshold {
    PerCluster,
    Absolute,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstMode {
    Rs,
    Om,
    ExactH,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub model: Model,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 8)]
    pub d: usize,
    /// Crossing density; for `planted` this is the outer-conductance target.
    #[arg(long, alias = "eps", default_value_t = 0.01)]
    pub delta: f64,
    /// Inner-conductance target for `planted`.
    #[arg(long, default_value_t = 0.3)]
    pub phi: f64,
    #[arg(long, value_enum, default_value = "per-cluster")]
    pub threshold: Threshold,
    #[arg(long, default_value_t = 10)]
    pub max_attempts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EstimateArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Overrides the labels stored in the graph file.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub mode: EstMode,
    #[arg(long, default_value_t = 0.3)]
    pub phi: f64,
    #[arg(long, default_value_t = 0.01)]
    pub eps: f64,
    /// Multiplier applied to every sample-size formula.
    #[arg(long)]
    pub scale: Option<f64>,
    /// rs: exact walk distributions and every vertex as a seed.
    #[arg(long)]
    pub exact_walks: bool,
    /// rs: walk length.
    #[arg(long, default_value_t = 30)]
    pub walk_length: usize,
    /// rs: sketch sample size.
    #[arg(long)]
    pub sample: Option<usize>,
    /// rs: walks per vertex.
    #[arg(long)]
    pub walks: Option<usize>,
    /// rs: seed vertices; om: vertices per pair.
    #[arg(long)]
    pub seeds: Option<usize>,
    /// Size-estimation sample.
    #[arg(long)]
    pub size_samples: Option<usize>,
    /// JSON solver configuration (`tol`, `max_iters`, `step`).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LbArgs {
    #[arg(long, default_value_t = 16384)]
    pub n: usize,
    #[arg(long, default_value_t = 16)]
    pub k: usize,
    #[arg(long, default_value_t = 8)]
    pub d: usize,
    #[arg(long, default_value_t = 0.009)]
    pub eps: f64,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    #[arg(long, default_value_t = 10)]
    pub max_retries: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ExactArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long, default_value_t = 0.3)]
    pub phi: f64,
    #[arg(long, default_value_t = 0.01)]
    pub eps: f64,
    /// Dump the exact contracted Laplacian as a text matrix.
    #[arg(long)]
    pub laplacian: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReportArgs {
    #[arg(long = "input", required = true, num_args = 1..)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    hcost_core::set_threads(cli.threads.max(1));
    let ctx = commands::Context { timings: cli.timings };
    let res = match &cli.command {
        Command::Gen(a) => commands::gen(&ctx, a),
        Command::Estimate(a) => commands::estimate(&ctx, a),
        Command::LbExperiment(a) => commands::lb_experiment(&ctx, a),
        Command::Exact(a) => commands::exact(&ctx, a),
        Command::Report(a) => commands::report(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
