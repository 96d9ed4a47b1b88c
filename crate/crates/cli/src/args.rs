use crate::grid::GridSpec;
use crate::output::Format;
use crate::settings::{Algorithm, Scope};
use clap::{Args, Parser, Subcommand};
use noisy_momentum::amplification::BoundId;
use noisy_momentum::continuous::CtVariant;
use noisy_momentum::quadratic::NoiseModel;
use std::path::PathBuf;

/// Rates, noise amplification and bound checks for noisy two-step momentum methods.
///
/// Every flag can also be set through a `MOMENTUM_`-prefixed environment variable.
/// Flags and environment variables take precedence over `--config`.
#[derive(Debug, Parser)]
#[command(name = "momentum", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Worst-case convergence rate and endpoint geometry.
    Rate(RateArgs),
    /// Modal and class noise amplification, checked against the Lyapunov route.
    Amplify(AmplifyArgs),
    /// Family tradeoff curves with every applicable bound.
    Sweep(SweepArgs),
    /// Bound and oracle checks over a grid; nonzero exit on any failure.
    Verify(VerifyArgs),
    /// Monte Carlo estimate of the steady-state variance.
    Simulate(SimulateArgs),
    /// Accelerated gradient flow rates, amplification and bounds.
    Continuous(ContinuousArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML configuration file.
    #[arg(long, env = "MOMENTUM_CONFIG")]
    pub config: Option<PathBuf>,
    /// Condition number; comma-separated list where several are allowed.
    #[arg(long, env = "MOMENTUM_KAPPA", value_delimiter = ',')]
    pub kappa: Vec<f64>,
    /// Smallest eigenvalue (default 1).
    #[arg(long, env = "MOMENTUM_M")]
    pub m: Option<f64>,
    /// Largest eigenvalue (default m * kappa).
    #[arg(long = "L", env = "MOMENTUM_L")]
    pub l: Option<f64>,
    /// Dimension; comma-separated list where several are allowed.
    #[arg(long, env = "MOMENTUM_N", value_delimiter = ',')]
    pub n: Vec<usize>,
    /// Noise model: iterate or gradient.
    #[arg(long, env = "MOMENTUM_NOISE")]
    pub noise: Option<NoiseModel>,
    /// Base noise magnitude (default 1).
    #[arg(long, env = "MOMENTUM_SIGMA")]
    pub sigma: Option<f64>,
    /// gd, hb, na (rate-optimal) or hb-like, na-like, gd-reduced, hb-reduced.
    #[arg(long, env = "MOMENTUM_FAMILY")]
    pub family: Option<Algorithm>,
    /// Target settling time for a family member.
    #[arg(long, env = "MOMENTUM_TS")]
    pub ts: Option<f64>,
    /// Target rate for a family member.
    #[arg(long, env = "MOMENTUM_RHO")]
    pub rho: Option<f64>,
    /// Stepsize, for explicit parameters.
    #[arg(long, env = "MOMENTUM_ALPHA")]
    pub alpha: Option<f64>,
    /// Momentum (default 0).
    #[arg(long, env = "MOMENTUM_BETA", allow_hyphen_values = true)]
    pub beta: Option<f64>,
    /// Extrapolation (default 0).
    #[arg(long, env = "MOMENTUM_GAMMA", allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    /// Settling-time grid `min:max:points[:linear|log]`.
    #[arg(long, env = "MOMENTUM_GRID")]
    pub grid: Option<GridSpec>,
    /// Random seed.
    #[arg(long, env = "MOMENTUM_SEED")]
    pub seed: Option<u64>,
    /// Output file (default stdout).
    #[arg(long, env = "MOMENTUM_OUT")]
    pub out: Option<PathBuf>,
    /// csv or jsonl.
    #[arg(long, env = "MOMENTUM_FORMAT")]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct RateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct AmplifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// discrete, continuous or all.
    #[arg(long, env = "MOMENTUM_SCOPE")]
    pub scope: Option<Scope>,
    /// Random configurations per oracle comparison.
    #[arg(long, env = "MOMENTUM_DRAWS")]
    pub draws: Option<usize>,
    /// Test hook: evaluate this bound with its inequality reversed.
    #[arg(long, env = "MOMENTUM_INJECT_FAULT", hide = true)]
    pub inject_fault: Option<BoundId>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Iterations per trial.
    #[arg(long, env = "MOMENTUM_STEPS")]
    pub steps: Option<usize>,
    /// Independent trials.
    #[arg(long, env = "MOMENTUM_TRIALS")]
    pub trials: Option<usize>,
    /// Discarded leading iterations (default ceil(10 T_s)).
    #[arg(long, env = "MOMENTUM_BURN_IN")]
    pub burn_in: Option<usize>,
    /// Explicit Hessian eigenvalues instead of a uniform spectrum on [m, L].
    #[arg(long, env = "MOMENTUM_EIGENVALUES", value_delimiter = ',')]
    pub eigenvalues: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct ContinuousArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// gfd, agd-hb or agd-na; comma-separated (default all three).
    #[arg(long, env = "MOMENTUM_FLOW", value_delimiter = ',')]
    pub flow: Vec<CtVariant>,
}
