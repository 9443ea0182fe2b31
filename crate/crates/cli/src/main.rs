use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod output;

#[derive(Parser)]
#[command(name = "multibin", version, about = "Score and hedge binned probabilistic forecasts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score submission files against observed outcomes
    Score(ScoreArgs),
    /// Replace every forecast in a submission by its multibin-optimal report
    Hedge(HedgeArgs),
    /// Pad and blur a probability vector
    Blur(BlurArgs),
    /// Print the four worked examples
    Examples(ExamplesArgs),
    /// Season table: original vs optimized forecasts, averaged per target
    Table1(Table1Args),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    Log,
    Mblog,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Text,
}

#[derive(Args)]
pub struct RuleFlags {
    #[arg(long, value_enum, default_value = "mblog")]
    pub rule: RuleArg,
    /// Window half-width for every target (default: 5 for wILI, 1 for weeks)
    #[arg(long)]
    pub d: Option<usize>,
    /// Replace scores below this (negative) value by it
    #[arg(long, allow_negative_numbers = true)]
    pub floor: Option<f64>,
}

#[derive(Args)]
pub struct OptimizerFlags {
    #[arg(long, default_value_t = 10_000)]
    pub max_iterations: usize,
    #[arg(long, default_value_t = 1e-12)]
    pub rel_tol: f64,
    /// Exit with status 2 if any forecast fails to converge
    #[arg(long)]
    pub strict: bool,
}

#[derive(Args)]
pub struct OutputFlags {
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    #[arg(long, default_value_t = 3)]
    pub precision: usize,
}

#[derive(Args)]
pub struct InputFlags {
    /// Accepted deviation of each forecast's total from one
    #[arg(long, default_value_t = multibin::flusight::SUBMISSION_TOL)]
    pub tol: f64,
}

#[derive(Args)]
pub struct ScoreArgs {
    /// Submission files or directories of `EWww-YYYY-TEAM.csv` files
    #[arg(required = true)]
    pub submissions: Vec<PathBuf>,
    #[arg(long)]
    pub truth: PathBuf,
    /// CSV with columns Target, Issue_week; default scores every forecast
    #[arg(long)]
    pub windows: Option<PathBuf>,
    #[command(flatten)]
    pub rule: RuleFlags,
    #[command(flatten)]
    pub input: InputFlags,
    #[command(flatten)]
    pub output: OutputFlags,
}

#[derive(Args)]
pub struct HedgeArgs {
    pub submission: PathBuf,
    /// Output file (default: standard output)
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Per-forecast gain report (default: standard error)
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Window half-width for every target
    #[arg(long)]
    pub d: Option<usize>,
    #[command(flatten)]
    pub optimizer: OptimizerFlags,
    #[command(flatten)]
    pub input: InputFlags,
    #[arg(long, default_value_t = 3)]
    pub precision: usize,
}

#[derive(Args)]
pub struct BlurArgs {
    /// Comma-separated probabilities
    #[arg(allow_hyphen_values = true)]
    pub probs: String,
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    /// Also print the optimized report and its blur
    #[arg(long)]
    pub hedge: bool,
    #[command(flatten)]
    pub optimizer: OptimizerFlags,
    #[command(flatten)]
    pub output: OutputFlags,
}

#[derive(Args)]
pub struct ExamplesArgs {
    #[command(flatten)]
    pub output: OutputFlags,
    /// Write tidy CSV (example, bin, series, probability) for plotting
    #[arg(long)]
    pub plot_data: Option<PathBuf>,
}

#[derive(Args)]
pub struct Table1Args {
    /// Directory of `EWww-YYYY-TEAM.csv` submission files
    pub submissions: PathBuf,
    #[arg(long)]
    pub truth: PathBuf,
    /// CSV with columns Target, Issue_week; overrides the default windows
    #[arg(long)]
    pub windows: Option<PathBuf>,
    /// Last week of the season, bounding the default windows
    #[arg(long)]
    pub season_end: Option<String>,
    #[command(flatten)]
    pub rule: RuleFlags,
    #[command(flatten)]
    pub optimizer: OptimizerFlags,
    #[command(flatten)]
    pub input: InputFlags,
    #[command(flatten)]
    pub output: OutputFlags,
    /// Write per-forecast original and hedged scores as CSV
    #[arg(long)]
    pub scores_log: Option<PathBuf>,
    /// Write original and hedged forecasts as tidy CSV for plotting
    #[arg(long)]
    pub plot_data: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Score(a) => commands::score(&a),
        Command::Hedge(a) => commands::hedge(&a),
        Command::Blur(a) => commands::blur(&a),
        Command::Examples(a) => commands::examples(&a),
        Command::Table1(a) => commands::table1(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<commands::NotConverged>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
