use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "bfx",
    version,
    about = "Expectations of Brownian exponential functionals and SV moments"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Output format: json lines or CSV. Defaults to json, to CSV for
    /// `sweep` and to a text table for `validate`.
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    /// TOML file presetting Monte Carlo and quadrature settings.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for Monte Carlo (results do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Add wall-clock milliseconds to each record.
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Parameters shared by the computing subcommands; each command reads the
/// ones it needs.
#[derive(Debug, Clone, Default, Args)]
pub struct Params {
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub rho: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<f64>,
    /// Laplace argument.
    #[arg(long, allow_hyphen_values = true)]
    pub arg: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub s: Option<f64>,
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub scheme: Option<String>,
    /// Quadrature absolute and relative tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// E exp(-arg·Γ_t).
    LaplaceGamma(Params),
    /// E exp(-λ/(1+βA_t)).
    LaplaceRecip(Params),
    /// E ln(1+βA_t).
    ExpLog(Params),
    /// E 1/(1+βA_t).
    ExpRecip(Params),
    /// E Γ_t^k for a range of k.
    GammaMoments(GammaMomentsArgs),
    /// E(A_t^(-μ) | A_∞^(-μ) = 1/(2β)).
    CondPerpetuity(Params),
    /// E ln(1+β∫_0^{4T} Y du) with T exponential of rate λ.
    RandtimeLog(Params),
    /// E X_t^α in the lognormal or Stein model.
    Moment(Params),
    /// Stein closed form E X_t^α.
    SteinMoment(SteinArgs),
    /// E X_{2T}^α with T exponential of rate λ.
    RandtimeMoment(RandtimeArgs),
    /// Kernel G_t(x) = E exp(-x/A_t), optionally with time derivatives.
    KernelG(KernelArgs),
    /// ψ_t(s, x) = E G_t(R^x(s/2)).
    Psi(Params),
    /// Simulate paths and optionally dump them as CSV.
    Simulate(SimulateArgs),
    /// Run the cross-validation suites.
    Validate(ValidateArgs),
    /// Evaluate a command over a start:stop:count range of one flag.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Args)]
pub struct GammaMomentsArgs {
    #[command(flatten)]
    pub p: Params,
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    pub k_min: i32,
    #[arg(long, default_value_t = 3, allow_hyphen_values = true)]
    pub k_max: i32,
    /// Tabulate on this many intervals of [0, t] and check the recursion residual.
    #[arg(long)]
    pub grid: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct SteinArgs {
    #[command(flatten)]
    pub p: Params,
    #[arg(long, default_value = "corrected")]
    pub variant: String,
}

#[derive(Debug, Clone, Args)]
pub struct RandtimeArgs {
    #[command(flatten)]
    pub p: Params,
    #[arg(long, default_value = "minus")]
    pub sign: String,
}

#[derive(Debug, Clone, Args)]
pub struct KernelArgs {
    #[command(flatten)]
    pub p: Params,
    /// Highest time derivative to report.
    #[arg(long, default_value_t = 0)]
    pub order: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub p: Params,
    /// gbm or gamma.
    #[arg(long, default_value = "gbm")]
    pub process: String,
    /// CSV file receiving path_id,time,state,running_integral.
    #[arg(long)]
    pub dump_paths: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[arg(long, default_value = "all")]
    pub suite: String,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Tolerance multiplier.
    #[arg(long, default_value_t = 1.0)]
    pub tol: f64,
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Write the full JSON report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long, hide = true, default_value_t = 0.0, allow_hyphen_values = true)]
    pub inject_bias: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Subcommand and its flags; exactly one flag value is start:stop:count.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, required = true)]
    pub rest: Vec<String>,
}
