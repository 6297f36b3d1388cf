use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "lfpp", version, about = "Liouville first passage percolation on the lattice")]
pub struct Cli {
    /// Worker threads for Monte Carlo loops. Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Field operations.
    Field {
        #[command(subcommand)]
        op: FieldOp,
    },
    /// Distance between two points of a stored field.
    Dist(DistArgs),
    /// Median left-right crossing distance of the unit square.
    AEps(AEpsArgs),
    /// Fit the scaling exponent to stored median estimates.
    Fit(FitArgs),
    /// Scaling ratios along an epsilon ladder.
    Ratio(RatioArgs),
    /// Run a named experiment.
    Exp(ExpArgs),
    /// Inspect the on-disk estimate cache.
    Cache {
        #[command(subcommand)]
        op: CacheOp,
    },
}

#[derive(Debug, Subcommand)]
pub enum FieldOp {
    /// Sample a field and write it as LFPF.
    Sample(SampleArgs),
}

#[derive(Debug, Subcommand)]
pub enum CacheOp {
    /// Print the cache root and its entries.
    Info,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Torus,
    Dirichlet,
}

#[derive(Clone, Debug, Args)]
pub struct LatticeArgs {
    #[arg(long, default_value_t = 512)]
    pub n: usize,
    /// Mesh size, or `auto` for 4/n.
    #[arg(long, default_value = "auto")]
    pub spacing: String,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long, value_enum, default_value_t = Kind::Torus)]
    pub kind: Kind,
    #[command(flatten)]
    pub lattice: LatticeArgs,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DistArgs {
    #[arg(long)]
    pub field: PathBuf,
    #[arg(long)]
    pub eps: f64,
    #[arg(long)]
    pub xi: f64,
    /// Start point `x,y`.
    #[arg(long)]
    pub from: String,
    /// End point `x,y`.
    #[arg(long)]
    pub to: String,
    /// Confine paths: `annulus:cx,cy,r1,r2`, `disk:cx,cy,r`, `rect:x0,y0,x1,y1` or `unit`.
    #[arg(long)]
    pub within: Option<String>,
    /// Use the localized mollifier.
    #[arg(long)]
    pub localized: bool,
    /// Write the geodesic as CSV (`idx,x,y,cum_length`).
    #[arg(long)]
    pub emit_path: Option<PathBuf>,
    /// Result JSON; printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[command(flatten)]
    pub lattice: LatticeArgs,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub localized: bool,
    /// Skip the on-disk cache.
    #[arg(long)]
    pub no_cache: bool,
}

#[derive(Debug, Args)]
pub struct AEpsArgs {
    #[arg(long)]
    pub xi: f64,
    /// One scale or a comma-separated ladder.
    #[arg(long, value_delimiter = ',', required = true)]
    pub eps: Vec<f64>,
    #[command(flatten)]
    pub mc: McArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Directory of median-estimate JSON files.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RatioArgs {
    #[arg(long)]
    pub xi: f64,
    #[arg(long, value_delimiter = ',', required = true)]
    pub eps: Vec<f64>,
    #[arg(long, default_value_t = 0.5)]
    pub r: f64,
    #[arg(long)]
    pub q_hat: f64,
    #[command(flatten)]
    pub mc: McArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExpArgs {
    pub name: String,
    /// JSON object of experiment parameters; defaults when absent.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Write a gnuplot script next to the CSV.
    #[arg(long, requires = "csv")]
    pub emit_gnuplot: bool,
}
