use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "fullcorr", version, about = "Symmetric full-correlation Bell expressions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,

    /// Write output to this file instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Cap on enumeration cost and expanded tensor size
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub guard: Option<u64>,

    /// Seed for randomized procedures
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct ExprArgs {
    /// Number of parties
    #[arg(short = 'n', long = "n")]
    pub n: usize,
    /// Settings per party
    #[arg(short = 'm', long = "m")]
    pub m: usize,
    /// Outcomes per setting
    #[arg(short = 'k', long = "k")]
    pub k: usize,
    /// fI | mabk | cosine:DELTA | g:v0,v1,... | file:PATH
    #[arg(long = "f", default_value = "fI")]
    pub f: String,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Emit an expression as JSON (or its expanded tensor)
    Build {
        #[command(flatten)]
        expr: ExprArgs,
        /// Emit the expanded coefficient tensor instead of the compact form
        #[arg(long)]
        expand: bool,
    },
    /// Compute bounds by enumeration and closed forms
    Bounds(BoundsArgs),
    /// Check a relabelling onto a known expression family
    ReduceCheck(ReduceArgs),
    /// Optimize GHZ measurement phases
    GhzOpt(GhzArgs),
    /// Evaluate an expression on a behavior file and compare with bounds
    Classify(ClassifyArgs),
    /// CSV sweep of bounds over a parameter grid
    Table(TableArgs),
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub expr: ExprArgs,
    /// Exact local bound
    #[arg(long)]
    pub local: bool,
    /// Exact and closed-form Svetlichny bounds
    #[arg(long)]
    pub svetlichny: bool,
    /// Exact bound for this many groups (repeatable)
    #[arg(long = "g-group")]
    pub g_group: Vec<usize>,
    /// Closed-form biseparable bound
    #[arg(long)]
    pub diew: bool,
    /// Closed-form quantum bound
    #[arg(long)]
    pub tsirelson: bool,
    /// Every bound that applies to the expression
    #[arg(long)]
    pub all: bool,
    /// Bipartite quantum bound fed to the recursive Tsirelson bound
    #[arg(long)]
    pub bipartite_quantum: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Bkp,
    SvetCglmp,
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    /// Target family
    #[arg(value_enum)]
    pub family: Family,
    #[arg(short = 'n', long = "n")]
    pub n: Option<usize>,
    #[arg(short = 'm', long = "m")]
    pub m: Option<usize>,
    #[arg(short = 'k', long = "k")]
    pub k: usize,
    #[arg(long = "f", default_value = "fI")]
    pub f: String,
}

#[derive(Debug, Args)]
pub struct GhzArgs {
    /// Number of parties
    #[arg(short = 'n', long = "n")]
    pub n: usize,
    /// Settings per party
    #[arg(short = 'm', long = "m")]
    pub m: usize,
    #[arg(short = 'k', long = "k", default_value_t = 2)]
    pub k: usize,
    #[arg(long = "f", default_value = "fI")]
    pub f: String,
    /// Random starting points; 0 evaluates one point without descent
    #[arg(long, default_value_t = fullcorr::quantum::DEFAULT_RESTARTS)]
    pub restarts: usize,
    #[arg(long, default_value_t = fullcorr::quantum::DEFAULT_MAX_ITERS)]
    pub max_iters: usize,
    /// Reference quantum bound for the gap (defaults to the closed form for fI)
    #[arg(long)]
    pub target: Option<f64>,
    /// Write the best angles as JSON
    #[arg(long)]
    pub angles_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub expr: ExprArgs,
    /// Behavior JSON file
    #[arg(long)]
    pub behavior: PathBuf,
    /// JSON list of bound reports (defaults to catalogued or computed bounds)
    #[arg(long)]
    pub bounds: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    /// Party range, e.g. 2..4, 3 or 2,5
    #[arg(long = "n")]
    pub n: String,
    #[arg(long = "m")]
    pub m: String,
    #[arg(long = "k")]
    pub k: String,
    #[arg(long = "f", default_value = "fI")]
    pub f: String,
    /// Comma-separated kinds: local, svetlichny, diew, tsirelson, g_group:G
    #[arg(long, default_value = "svetlichny,diew,tsirelson")]
    pub kinds: String,
    /// Add exact enumeration rows
    #[arg(long)]
    pub exact: bool,
    /// Mark infeasible exact cells as skipped instead of failing
    #[arg(long)]
    pub skip_infeasible: bool,
}
