use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rbi_core::AlphaOrder;

#[derive(Debug, Parser)]
#[command(name = "rbi", version, about = "Active recursive Bayesian inference simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run Monte-Carlo trials of one scenario.
    Simulate(RunArgs),
    /// Sweep an (alpha, lambda) grid over one scenario.
    Sweep(SweepArgs),
    /// Decision-boundary geometry on the simplex, printed as CSV.
    #[command(subcommand)]
    Geometry(GeometryCommand),
    /// Export full posterior trajectories of individual trials.
    Trajectory(TrajectoryArgs),
    /// Estimate selection-ordering frequencies on the two-state adversarial fixture.
    Prop1Harness(Prop1Args),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Scenario JSON, or a manifest from a previous run.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the config run count.
    #[arg(long)]
    pub runs: Option<usize>,
    /// Worker threads; 0 picks one per core.
    #[arg(long, env = "RBI_THREADS", default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepWhich {
    QueryParams,
    StoppingParams,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Comma-separated alpha values (`inf` allowed).
    #[arg(long)]
    pub alphas: Option<String>,
    /// Comma-separated lambda values.
    #[arg(long)]
    pub lambdas: Option<String>,
    #[arg(long, value_enum)]
    pub which: Option<SweepWhich>,
}

#[derive(Debug, Clone, Args)]
pub struct TauCurve {
    #[arg(long)]
    pub alpha: AlphaOrder,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0.5)]
    pub from: f64,
    #[arg(long, default_value_t = 1.0)]
    pub to: f64,
    #[arg(long, default_value_t = 0.05)]
    pub step: f64,
}

#[derive(Debug, Clone, Subcommand)]
pub enum GeometryCommand {
    /// Shannon entropy of the entropy-maximising midpoint on the p(a) = tau face.
    TauDoublePrime {
        #[arg(long)]
        tau: f64,
        #[arg(long)]
        n: usize,
    },
    /// Entropy gap H(v) - H(w) over a tau grid.
    GapCurve(TauCurve),
    /// Edge threshold with the same entropy as the spread point, over a tau grid.
    TildeTau(TauCurve),
    /// Coordinates of the spread point v and edge point w.
    BoundaryPoints {
        #[arg(long)]
        tau: f64,
        #[arg(long)]
        n: usize,
    },
}

#[derive(Debug, Clone, Args)]
pub struct TrajectoryArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Answer each query with y/n on standard input instead of sampled evidence.
    #[arg(long)]
    pub interactive: bool,
}

#[derive(Debug, Clone, Args)]
pub struct Prop1Args {
    /// Harness JSON, or a manifest from a previous run.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Qualifying histories per cell.
    #[arg(long)]
    pub draws: Option<usize>,
    #[arg(long)]
    pub alphas: Option<String>,
    #[arg(long)]
    pub lambdas: Option<String>,
    #[arg(long, env = "RBI_THREADS", default_value_t = 0)]
    pub threads: usize,
}
