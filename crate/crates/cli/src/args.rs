use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "rskyline", version, about = "Reverse skyline and k-MAC benchmark driver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic dataset as CSV.
    Gen(GenArgs),
    /// Run one reverse skyline query per candidate.
    Query(QueryArgs),
    /// Select the k most attractive candidates.
    Kmac(KmacArgs),
    /// Repeat `kmac` while varying one parameter.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Dist {
    Un,
    Ac,
    Co,
}

impl From<Dist> for rskyline_core::datagen::Distribution {
    fn from(d: Dist) -> Self {
        use rskyline_core::datagen::Distribution;
        match d {
            Dist::Un => Distribution::Uniform,
            Dist::Ac => Distribution::AntiCorrelated,
            Dist::Co => Distribution::Correlated,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Engine {
    Brs,
    Rsl,
    BasicBrs,
    BasicRsl,
    Batch,
    Bb,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Brs => "brs",
            Engine::Rsl => "rsl",
            Engine::BasicBrs => "basic-brs",
            Engine::BasicRsl => "basic-rsl",
            Engine::Batch => "batch",
            Engine::Bb => "bb",
        }
    }

    pub fn is_single(self) -> bool {
        matches!(self, Engine::Brs | Engine::Rsl)
    }
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum, default_value = "un")]
    pub dist: Dist,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u8).range(2..=8))]
    pub d: u8,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Where products, customers and candidates come from, and how the trees
/// are laid out.
#[derive(Clone, Debug, Args)]
pub struct WorkloadArgs {
    /// CSV path, `<n>`, `<dist>:<n>`.
    #[arg(long, default_value = "100000")]
    pub products: String,
    /// CSV path, `<n>`, `<dist>:<n>`, or `noise:<variance>[:<n>]` derived
    /// from the products.
    #[arg(long, default_value = "100000")]
    pub customers: String,
    /// Same forms as `--customers`.
    #[arg(long, default_value = "1000")]
    pub candidates: String,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u8).range(2..=8))]
    pub d: u8,
    #[arg(long, value_enum, default_value = "un")]
    pub dist: Dist,
    /// Node capacity; derived from the page size when absent.
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..))]
    pub fanout: Option<u32>,
    #[arg(long, default_value_t = 4096, value_parser = clap::value_parser!(u32).range(64..))]
    pub page_bytes: u32,
    /// Products use this seed, customers `seed + 1`, candidates `seed + 2`.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Cross-check every influence set against the brute-force oracle.
    #[arg(long)]
    pub verify: bool,
    /// Report file; stdout when absent. Progress samples go next to it as
    /// `<out>.progress.csv`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[command(flatten)]
    pub workload: WorkloadArgs,
    #[arg(long, value_enum, default_value = "rsl")]
    pub engine: Engine,
}

#[derive(Clone, Debug, Args)]
pub struct KmacParams {
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..=1000))]
    pub batch_size: u32,
}

#[derive(Debug, Args)]
pub struct KmacArgs {
    #[command(flatten)]
    pub workload: WorkloadArgs,
    #[command(flatten)]
    pub params: KmacParams,
    #[arg(long, value_enum, default_value = "batch")]
    pub engine: Engine,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    #[value(alias = "p")]
    Products,
    #[value(alias = "c")]
    Customers,
    #[value(alias = "q")]
    Candidates,
    D,
    K,
    #[value(alias = "b")]
    BatchSize,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Products => "products",
            Axis::Customers => "customers",
            Axis::Candidates => "candidates",
            Axis::D => "d",
            Axis::K => "k",
            Axis::BatchSize => "batch-size",
        }
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub workload: WorkloadArgs,
    #[command(flatten)]
    pub params: KmacParams,
    #[arg(long, value_enum)]
    pub axis: Axis,
    /// Comma-separated values for the axis.
    #[arg(long, value_delimiter = ',', required = true)]
    pub values: Vec<u64>,
    /// Evaluators to run at every value (repeat or comma-separate).
    #[arg(long, value_enum, value_delimiter = ',', default_value = "batch")]
    pub engine: Vec<Engine>,
}
