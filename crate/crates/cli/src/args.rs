use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "snewton",
    version,
    about = "Refine and classify singular zeros of polynomial systems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Iterate the two-step Newton method from a starting point.
    Refine(RefineArgs),
    /// Breadth, depth and multiplicity from the local dual space.
    Analyze(AnalyzeArgs),
    /// Deflation-one test: order-two necessary condition and randomized
    /// sufficient condition.
    Check(CheckArgs),
    /// Reproduce one of the experiment tables.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// Built-in or bundled system (`running-example`, `mth191`, `stability-3`, ...).
    #[arg(long)]
    pub catalog: Option<String>,
    /// System file: JSON `{"vars": [...], "polys": [...]}` or one polynomial
    /// per line (needs --vars).
    #[arg(long)]
    pub file: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SystemArgs {
    #[command(flatten)]
    pub source: Source,
    /// Variable names for a plain-text system file.
    #[arg(long, value_delimiter = ',')]
    pub vars: Vec<String>,
    /// Point as comma-separated complex numbers, e.g. `1.001,0.5-2i`.
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<String>,
    /// Rank tolerance: a positive number or `auto`.
    #[arg(long)]
    pub tol: Option<String>,
    #[arg(long, env = "SNEWTON_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct RefineArgs {
    #[command(flatten)]
    pub sys: SystemArgs,
    /// Maximum number of iterations.
    #[arg(long, default_value_t = 20)]
    pub iters: usize,
    /// Stop once `||f(x)||` is at most this.
    #[arg(long, default_value_t = 1e-13)]
    pub stop: f64,
    /// Fixed kernel direction (normalized), instead of a random one.
    #[arg(long, allow_hyphen_values = true)]
    pub v: Option<String>,
    /// Known zero for error reporting (catalog entries supply their own).
    #[arg(long, allow_hyphen_values = true)]
    pub reference: Option<String>,
    /// Include per-iteration wall-clock times.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub sys: SystemArgs,
    /// Relative rank tolerance of the dual-space kernels.
    #[arg(long)]
    pub rank_tol: Option<f64>,
    #[arg(long, default_value_t = 10)]
    pub max_order: u32,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[command(flatten)]
    pub sys: SystemArgs,
    #[arg(long)]
    pub rank_tol: Option<f64>,
    /// Random directions tried by the sufficient test.
    #[arg(long, default_value_t = 3)]
    pub trials: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    /// Two-digit guesses on the benchmark systems.
    Table1,
    /// Cluster system: start precision, cluster distance and tolerance.
    Stability,
    /// Per-iteration time against deflation plus Gauss-Newton.
    Efficiency,
    /// Deflated Gauss-Newton stall versus two-step convergence.
    Robustness,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(value_enum)]
    pub experiment: Experiment,
    /// Iterations per run (timed repetitions for efficiency).
    #[arg(long, default_value_t = 3)]
    pub iters: usize,
    /// `n:k` pairs for efficiency.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "10:2,10:8,25:2,25:23,50:2,50:48"
    )]
    pub sizes: Vec<String>,
    /// Exponents k of the cluster system `z^2 + 10^-k z`.
    #[arg(long = "k", value_delimiter = ',', default_value = "2,3,4")]
    pub k_values: Vec<i32>,
    /// Tolerances for the stability grid.
    #[arg(long = "tols", value_delimiter = ',', default_value = "1e-2,1e-1")]
    pub tols: Vec<f64>,
    #[arg(long, env = "SNEWTON_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    #[arg(long)]
    pub timing: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Table,
}
