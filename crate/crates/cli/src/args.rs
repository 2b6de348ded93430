use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use syncopt::{ModelParams, ProblemInstance};

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "syncopt", version, about = "Optimal synchronization schedules for clock networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the optimal control and write a result document and trajectory.
    Synthesize(SynthesizeArgs),
    /// Classify the optimal control on a grid of horizons and initial states.
    RegimeMap(RegimeMapArgs),
    /// Monte Carlo check of a control against the deterministic dynamics.
    Simulate(SimulateArgs),
    /// Compare synthesized costs with the dynamic programming oracle.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ParamArgs {
    /// Weight of the desynchronization cost.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Weight of the transmission energy.
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// Number of clients.
    #[arg(long, allow_negative_numbers = true)]
    pub n: Option<i64>,
    /// Noise variance rate of a client clock.
    #[arg(long, allow_negative_numbers = true)]
    pub sigma2: Option<f64>,
    /// Maximal message intensity.
    #[arg(long, allow_negative_numbers = true)]
    pub umax: Option<f64>,
    /// Common clock rate.
    #[arg(long, allow_negative_numbers = true)]
    pub v: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct InstanceArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Initial desynchronization.
    #[arg(long, allow_negative_numbers = true)]
    pub r0: Option<f64>,
    /// Time horizon.
    #[arg(long, allow_negative_numbers = true)]
    pub horizon: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SynthesizeArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// Result document (JSON).
    #[arg(long)]
    pub out: PathBuf,
    /// Trajectory table; defaults to the result path with a `.csv` extension.
    #[arg(long)]
    pub trajectory: Option<PathBuf>,
    /// Evenly spaced trajectory samples; switch times are added on top.
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct RegimeMapArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub t_min: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub t_max: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub r0_min: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub r0_max: f64,
    /// Grid size as NTxNR.
    #[arg(long, default_value = "100x100")]
    pub grid: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// Control document written by `synthesize`. Carries its own instance.
    #[arg(long, conflicts_with = "constant_u")]
    pub control: Option<PathBuf>,
    /// Constant control over the whole horizon.
    #[arg(long, allow_negative_numbers = true)]
    pub constant_u: Option<f64>,
    #[arg(long, default_value_t = 2000)]
    pub runs: usize,
    /// Euler step; defaults to T/1000.
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of checkpoint intervals, or a comma separated list of times.
    #[arg(long, default_value = "10")]
    pub checkpoints: String,
    /// Draw initial offsets from a Gaussian instead of equal offsets.
    #[arg(long)]
    pub gaussian_init: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// CSV with columns alpha,beta,n,sigma2,umax,r0,horizon and optional v.
    #[arg(long)]
    pub instances: PathBuf,
    #[arg(long, default_value_t = 2000)]
    pub dp_time: usize,
    #[arg(long, default_value_t = 2001)]
    pub dp_state: usize,
    #[arg(long, default_value_t = 21)]
    pub dp_control: usize,
    /// Allowed relative cost gap.
    #[arg(long, default_value_t = 0.02)]
    pub tolerance: f64,
    /// Shift every synthesized switch time by this fraction of T before costing.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub perturb_switch: f64,
    #[arg(long)]
    pub out: PathBuf,
}

fn required<T>(value: Option<T>, flag: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("missing required flag --{flag}")))
}

impl ParamArgs {
    pub fn is_empty(&self) -> bool {
        self.alpha.is_none()
            && self.beta.is_none()
            && self.n.is_none()
            && self.sigma2.is_none()
            && self.umax.is_none()
            && self.v.is_none()
    }

    pub fn resolve(&self) -> Result<ModelParams, CliError> {
        let fields = RawParams {
            alpha: required(self.alpha, "alpha")?,
            beta: required(self.beta, "beta")?,
            n: required(self.n, "n")?,
            sigma2: required(self.sigma2, "sigma2")?,
            umax: required(self.umax, "umax")?,
            v: self.v.unwrap_or(1.0),
        };
        fields.build()
    }
}

impl InstanceArgs {
    pub fn is_empty(&self) -> bool {
        self.params.is_empty() && self.r0.is_none() && self.horizon.is_none()
    }

    pub fn resolve(&self) -> Result<ProblemInstance, CliError> {
        let params = self.params.resolve()?;
        build_instance(params, required(self.r0, "r0")?, required(self.horizon, "horizon")?)
    }
}

/// Unchecked parameter values as they appear on the command line or in files.
#[derive(Debug, Clone, Copy)]
pub struct RawParams {
    pub alpha: f64,
    pub beta: f64,
    pub n: i64,
    pub sigma2: f64,
    pub umax: f64,
    pub v: f64,
}

fn check_positive(name: &str, value: f64) -> Result<(), CliError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{name} must be a finite positive number, got {value}")))
    }
}

fn check_nonnegative(name: &str, value: f64) -> Result<(), CliError> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{name} must be a finite nonnegative number, got {value}")))
    }
}

impl RawParams {
    pub fn build(&self) -> Result<ModelParams, CliError> {
        check_positive("alpha", self.alpha)?;
        check_positive("beta", self.beta)?;
        check_positive("sigma2", self.sigma2)?;
        check_nonnegative("umax", self.umax)?;
        if !(1..=i64::from(u32::MAX)).contains(&self.n) {
            return Err(CliError::Usage(format!("n must be a positive integer, got {}", self.n)));
        }
        if !self.v.is_finite() {
            return Err(CliError::Usage(format!("v must be finite, got {}", self.v)));
        }
        Ok(ModelParams::new(self.alpha, self.beta, self.n as u32, self.sigma2, self.umax)?.with_drift(self.v)?)
    }
}

pub fn build_instance(params: ModelParams, r0: f64, horizon: f64) -> Result<ProblemInstance, CliError> {
    check_nonnegative("r0", r0)?;
    check_positive("horizon", horizon)?;
    Ok(ProblemInstance::new(params, r0, horizon)?)
}

pub fn parse_grid(text: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::Usage(format!("grid must look like NTxNR with positive integers, got {text:?}"));
    let (a, b) = text.split_once(['x', 'X']).ok_or_else(bad)?;
    let nt: usize = a.trim().parse().map_err(|_| bad())?;
    let nr: usize = b.trim().parse().map_err(|_| bad())?;
    if nt == 0 || nr == 0 {
        return Err(bad());
    }
    Ok((nt, nr))
}

pub fn parse_checkpoints(text: &str, horizon: f64) -> Result<Vec<f64>, CliError> {
    if text.contains(',') {
        text.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::Usage(format!("checkpoints: cannot parse {s:?} as a time")))
            })
            .collect()
    } else {
        let n: usize = text
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("checkpoints must be a count or a list of times, got {text:?}")))?;
        if n == 0 {
            return Err(CliError::Usage("checkpoints count must be positive".into()));
        }
        Ok(syncopt::netsim::even_checkpoints(horizon, n))
    }
}
