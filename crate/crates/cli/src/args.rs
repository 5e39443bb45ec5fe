use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "netbenefit", version, about = "Decision curves and continuous net benefit for risk scores")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load a dataset and print a summary.
    Validate(ValidateArgs),
    /// Decision curve: net benefit of each model and of treat-all/treat-none.
    Curve(CurveArgs),
    /// Continuous net benefit of each model under a threshold weight.
    Cnb(CnbArgs),
    /// CNB difference between two models.
    Compare(CompareArgs),
    /// Brute-force utility checks on synthetic populations.
    Oracle(OracleArgs),
    /// Synthetic end-to-end run of the two cardiovascular examples.
    Demo(DemoArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Args, Serialize)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct InputArgs {
    /// CSV file with a header row.
    #[arg(long)]
    pub input: PathBuf,
    /// Column mapping, e.g. `outcome=event,scores=p1:p2,weight=w`.
    #[arg(long)]
    pub schema: String,
}

#[derive(Debug, Args, Serialize)]
pub struct WeightArgs {
    /// Weight spec: a JSON file, inline JSON, or a preset name (lifestyle,
    /// statins, threshold-density, parabola, uniform).
    #[arg(long)]
    pub weights: String,
    /// Scale the weight so that the integral of w(t)/t is 1.
    #[arg(long)]
    pub normalize: bool,
    /// Restrict continuous weights to [epsilon, 1 - epsilon].
    #[arg(long)]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct BootstrapArgs {
    /// Bootstrap replicates for a percentile interval (0 = none).
    #[arg(long, default_value_t = 0)]
    pub bootstrap: usize,
    #[arg(long, default_value_t = 20_240_101)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct CurveArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Thresholds: `0.15`, a list `0.05,0.1,0.2`, or a range `0.01:0.99:0.01`.
    #[arg(long)]
    pub grid: Option<String>,
    /// Also emit NB(t)/t.
    #[arg(long)]
    pub rescaled: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct CnbArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub weights: WeightArgs,
    #[command(flatten)]
    pub bootstrap: BootstrapArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct CompareArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub weights: WeightArgs,
    /// The two models, `first:second`; defaults to the first two columns.
    #[arg(long)]
    pub models: Option<String>,
    #[command(flatten)]
    pub bootstrap: BootstrapArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleMode {
    Exhaustive,
    MonteCarlo,
}

#[derive(Debug, Args, Serialize)]
pub struct OracleArgs {
    /// JSON file with `generator`, `witness` and `two_group` sections; flags
    /// given explicitly override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Population size.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = OracleMode::Exhaustive)]
    pub mode: OracleMode,
    /// Random permutations in Monte-Carlo mode.
    #[arg(long, default_value_t = 200)]
    pub draws: usize,
    /// Allowed gap (exhaustive) or extra slack on top of z standard errors.
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long, default_value_t = 3.0)]
    pub z: f64,
    /// Search for data on which AUNB and AUNB_alt rank two models oppositely.
    #[arg(long)]
    pub witness: bool,
    /// Two groups with nearby thresholds and very different stakes.
    #[arg(long)]
    pub two_group: bool,
    #[arg(long)]
    pub g1_scale: Option<f64>,
    #[arg(long)]
    pub g2_scale: Option<f64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct DemoArgs {
    /// JSON demo configuration; flags given explicitly override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Development cohort size.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub validation_n: Option<usize>,
    /// Bootstrap replicates for intervals (0 = none).
    #[arg(long)]
    pub bootstrap: Option<usize>,
    /// Bootstrap replicates for optimism correction (0 = none).
    #[arg(long)]
    pub optimism: Option<usize>,
    /// Combine statins NB and lifestyle CNB with this effect ratio.
    #[arg(long)]
    pub effect_ratio: Option<f64>,
    #[command(flatten)]
    pub out: OutputArgs,
}
