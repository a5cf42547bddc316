use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "occupancy",
    version,
    about = "Exact distribution of the largest cell count when r balls fall into n cells"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Probability that no cell holds more than m balls.
    Cdf(PointArgs),
    /// Probability that the largest cell holds at least m balls.
    Pvalue(PointArgs),
    /// CDF and P-value for a range of m.
    Table(TableArgs),
    /// Monte Carlo estimate next to the exact CDF.
    Simulate(SimulateArgs),
    /// Cross-check the engines on a built-in grid.
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Scaled,
    Rational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Plain,
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct CellArgs {
    /// Number of cells.
    #[arg(short = 'n', long = "cells")]
    pub cells: Option<u64>,
    /// Total population N; with --community gives n = round(N / N0).
    #[arg(long, requires = "community", conflicts_with = "cells")]
    pub population: Option<u64>,
    /// Community size N0.
    #[arg(long, requires = "population")]
    pub community: Option<u64>,
    /// File with one cell probability per line.
    #[arg(long, conflicts_with = "population")]
    pub weights: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = FormatArg::Plain)]
    pub format: FormatArg,
    /// Digits after the decimal point in plain and csv output.
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u8).range(1..=17))]
    pub decimals: u8,
}

#[derive(Debug, Args)]
pub struct PointArgs {
    /// Number of balls.
    #[arg(short = 'r', long = "balls")]
    pub balls: u64,
    #[command(flatten)]
    pub cells: CellArgs,
    /// Largest cell count m.
    #[arg(short = 'm', long = "max")]
    pub max: u64,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(short = 'r', long = "balls")]
    pub balls: u64,
    #[command(flatten)]
    pub cells: CellArgs,
    #[arg(long = "m-min")]
    pub m_min: u64,
    #[arg(long = "m-max")]
    pub m_max: u64,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(short = 'r', long = "balls")]
    pub balls: u64,
    #[command(flatten)]
    pub cells: CellArgs,
    #[arg(long = "m-min")]
    pub m_min: u64,
    #[arg(long = "m-max")]
    pub m_max: u64,
    /// Number of replications.
    #[arg(long, default_value_t = 1000)]
    pub reps: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Confidence level of the reported intervals.
    #[arg(long, default_value_t = 0.95)]
    pub ci: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}
