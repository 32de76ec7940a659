mod commands;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(name = "dpg", version, about = "Decision predicate graphs for tree ensembles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit a random forest on a labelled CSV and export it as ensemble JSON.
    Train(TrainArgs),
    /// Build a predicate graph from an ensemble and a dataset.
    Build(BuildArgs),
    /// Rank predicates by a centrality metric.
    Metrics(MetricsArgs),
    /// Detect communities by label propagation.
    Communities(CommunitiesArgs),
    /// Extract per-class feature constraints.
    Constraints(ConstraintsArgs),
    /// Export the graph in Graphviz DOT format.
    Dot(DotArgs),
    /// Write constraints, centrality rankings and communities in one bundle.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 100)]
    trees: usize,
    /// Overridden by DPG_SEED when set.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 0.2)]
    test_fraction: f64,
    #[arg(long)]
    max_depth: Option<usize>,
    /// `sqrt`, `all` or a count.
    #[arg(long, default_value = "sqrt")]
    max_features: String,
    #[arg(long, default_value_t = 2)]
    min_samples_split: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct BuildArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Decimal places kept in thresholds.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(0..=15))]
    precision: u32,
    #[arg(long)]
    out: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Metric {
    Bc,
    Lrc,
}

#[derive(Args, Debug)]
struct MetricsArgs {
    #[arg(long)]
    dpg: PathBuf,
    #[arg(long, value_enum)]
    metric: Metric,
    #[arg(long, default_value_t = 10)]
    top: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct CommunitiesArgs {
    #[arg(long)]
    dpg: PathBuf,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = dpg_core::metrics::DEFAULT_MAX_ITERS)]
    max_iters: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ConstraintsArgs {
    #[arg(long)]
    dpg: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Labelled CSV to score the constraints against.
    #[arg(long)]
    evaluate: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DotArgs {
    #[arg(long)]
    dpg: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Fill nodes by label-propagation community.
    #[arg(long)]
    color_by_community: bool,
    #[arg(long)]
    highlight_classes: bool,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = dpg_core::metrics::DEFAULT_MAX_ITERS)]
    max_iters: usize,
}

#[derive(Args, Debug)]
struct ReportArgs {
    #[arg(long)]
    dpg: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 10)]
    top: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = dpg_core::metrics::DEFAULT_MAX_ITERS)]
    max_iters: usize,
    /// Comma-separated subset of constraints,bc,lrc,communities.
    #[arg(long, value_delimiter = ',', default_value = "constraints,bc,lrc,communities")]
    sections: Vec<String>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match commands::dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dpg: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
