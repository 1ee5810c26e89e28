//! Command-line front end for `sardelay`: configuration loading, subcommands
//! and their file outputs.

pub mod commands;
pub mod config;

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};
use sardelay::moments::TargetModel;
use sardelay::montecarlo::SweepParameter;

pub use config::{ConfigError, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "sardelay", version, about = "Coordinate-delay SAR statistics and delayed-scatterer discrimination")]
pub struct Cli {
    /// TOML run configuration; defaults apply to anything it leaves out.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set scene.kappa=0.4`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
    /// Master seed; overrides `harness.master_seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for Monte-Carlo trials (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate Φ(v1, v2) on a rectangular grid (CSV).
    PhiTable(PhiTableArgs),
    /// Sample the imaging kernel |W| along one dimensionless axis (CSV).
    KernelSlice(KernelSliceArgs),
    /// Tabulate the moment operators G^S, G^T, H of every scatterer kind (CSV).
    Moments(GridArgs),
    /// Expected S/T intensities along the streak under both models (CSV).
    Profile(GridArgs),
    /// Draw synthetic datasets (JSON lines).
    Simulate(SimulateArgs),
    /// Classify datasets read from JSON lines.
    Discriminate(DiscriminateArgs),
    /// Run one Monte-Carlo ensemble and print its contingency table.
    Montecarlo(OutArgs),
    /// Run one ensemble per parameter value (JSON and CSV).
    Sweep(SweepArgs),
    /// Run the published experiments A–D at κ = 0.4 and κ = 1.
    ReproducePaper,
    /// Print the effective configuration as TOML.
    ShowConfig,
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Output file; defaults to a name inside the output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PhiTableArgs {
    #[arg(long, default_value_t = -10.0, allow_negative_numbers = true)]
    pub v1_min: f64,
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    pub v1_max: f64,
    #[arg(long, default_value_t = 81)]
    pub v1_steps: usize,
    #[arg(long, default_value_t = -60.0, allow_negative_numbers = true)]
    pub v2_min: f64,
    #[arg(long, default_value_t = 60.0, allow_negative_numbers = true)]
    pub v2_max: f64,
    #[arg(long, default_value_t = 121)]
    pub v2_steps: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    Eta,
    Zeta,
    Psi,
}

#[derive(Debug, Args)]
pub struct KernelSliceArgs {
    #[arg(long, value_enum, default_value_t = Axis::Psi)]
    pub axis: Axis,
    #[arg(long, default_value_t = -200.0, allow_negative_numbers = true)]
    pub from: f64,
    #[arg(long, default_value_t = 200.0, allow_negative_numbers = true)]
    pub to: f64,
    #[arg(long, default_value_t = 401)]
    pub steps: usize,
    /// Fixed coordinates off the sampled axis.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub eta: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub zeta: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub psi: f64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Upper end of the ζ grid; defaults to `scene.zeta_max`.
    #[arg(long)]
    pub zeta_max: Option<f64>,
    #[arg(long, default_value_t = 241)]
    pub steps: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Number of datasets; overrides `harness.n_datasets`.
    #[arg(long)]
    pub count: Option<usize>,
    /// Generating model; overrides `harness.true_model`.
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    #[value(name = "s-model")]
    S,
    #[value(name = "t-model")]
    T,
}

impl From<ModelArg> for TargetModel {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::S => TargetModel::Instantaneous,
            ModelArg::T => TargetModel::Delayed,
        }
    }
}

#[derive(Debug, Args)]
pub struct DiscriminateArgs {
    /// JSON-lines datasets as written by `simulate`.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ParameterArg {
    ZetaMax,
    ZetaMin,
    QSt,
    /// `q_st` with `p_n = 0.1/(0.9 − q_st)`.
    QStFixedNoise,
    NHom,
}

impl From<ParameterArg> for SweepParameter {
    fn from(p: ParameterArg) -> Self {
        match p {
            ParameterArg::ZetaMax => SweepParameter::ZetaMax,
            ParameterArg::ZetaMin => SweepParameter::ZetaMin,
            ParameterArg::QSt => SweepParameter::QSt,
            ParameterArg::QStFixedNoise => SweepParameter::QStFixedNoise,
            ParameterArg::NHom => SweepParameter::NHom,
        }
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub parameter: ParameterArg,
    /// Comma-separated values; a `pi` suffix multiplies by π (`4pi,8pi,20pi`).
    #[arg(long, value_delimiter = ',', required = true)]
    pub values: Vec<String>,
    /// CSV trend file; defaults to `sweep.csv` in the output directory.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutArgs,
}

/// Loads the configuration, applies the global flags and runs the command.
pub fn run(cli: Cli) -> Result<()> {
    let mut cfg = RunConfig::load(cli.config.as_deref(), &cli.overrides)?;
    if let Some(seed) = cli.seed {
        cfg.harness.master_seed = seed;
    }
    if let Some(dir) = cli.out_dir {
        cfg.output.dir = dir;
    }
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(ConfigError("--threads must be at least 1".into()).into());
        }
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
        return pool.install(|| commands::dispatch(&cfg, cli.command));
    }
    commands::dispatch(&cfg, cli.command)
}

/// Exit status for an error: 3 for numerical failures inside the library, 2
/// for everything else (bad configuration, arguments or files).
pub fn exit_code(err: &anyhow::Error) -> u8 {
    let numeric = err.chain().any(|cause| {
        matches!(
            cause.downcast_ref::<sardelay::Error>(),
            Some(sardelay::Error::Numeric(_) | sardelay::Error::Internal(_))
        )
    });
    if numeric {
        3
    } else {
        2
    }
}
