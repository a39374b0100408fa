use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mabarc_core::sim::SweepParam;
use mabarc_core::Algorithm;

#[derive(Debug, Parser)]
#[command(name = "mabarc", version, about = "Contextual bandits with per-arm revenue constraints")]
pub struct Cli {
    /// Worker threads for epoch-parallel runs (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal allocation, value and active set.
    Solve(ReportArgs),
    /// Full oracle analysis: margin, sensitivity and sub-optimality gaps.
    Analyze {
        #[command(flatten)]
        report: ReportArgs,
        /// Candidate sets listed in text mode.
        #[arg(long, default_value_t = 10)]
        top: usize,
    },
    /// Simulate one algorithm for several epochs and write trace files.
    Run(RunArgs),
    /// Repeat `run` over a list of values of one parameter.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_parser = parse_sweep_param)]
        param: SweepParam,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
        values: Vec<f64>,
    },
    /// List built-in instances.
    Catalog {
        #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
        format: ReportFormat,
    },
}

#[derive(Debug, Clone, Args)]
pub struct InstanceArgs {
    /// Instance file, or `catalog:<name>` for a built-in one.
    #[arg(long)]
    pub instance: String,
    /// Parameter of a parametrised catalog entry.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Multiply means and thresholds by this factor.
    #[arg(long)]
    pub scale: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    pub format: ReportFormat,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(long, value_parser = parse_algorithm)]
    pub alg: Algorithm,
    #[arg(long, default_value_t = 10_000)]
    pub horizon: u64,
    #[arg(long, default_value_t = 5)]
    pub epochs: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, env = "MABARC_OUT", default_value = "out")]
    pub out: PathBuf,
    /// Trace file format.
    #[arg(long, value_enum, default_value_t = TraceFormatArg::Csv)]
    pub format: TraceFormatArg,
    /// Log every n-th round to the trace (the last round is always kept).
    #[arg(long, default_value_t = 1)]
    pub log_stride: u64,
    /// Log full allocations every n-th round.
    #[arg(long, default_value_t = 50)]
    pub alloc_stride: u64,
    /// Skip the sub-optimality gap enumeration in the summary.
    #[arg(long)]
    pub no_gaps: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TraceFormatArg {
    Csv,
    Json,
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: mabarc_core::policy::PolicyError| e.to_string())
}

fn parse_sweep_param(s: &str) -> Result<SweepParam, String> {
    s.parse().map_err(|e: mabarc_core::sim::SimError| e.to_string())
}
