//! The `reward-zero` command line.
//!
//! ```text
//! reward-zero bench run    --manifest M (--cache C | --provider http --endpoint URL) [--out report.json]
//! reward-zero embed-cache  --manifest M --endpoint URL --model-tag TAG --out cache.jsonl
//! reward-zero train        --reward {sparse|zero} [--beta B] [--interval N] --log log.csv
//! reward-zero ablate       --param {beta|interval} --values V1,V2,.. --log log.csv
//! ```
//!
//! Exit codes: 0 success, 1 usage or validation, 2 provider or I/O, 3 numeric
//! failure.

mod commands;
mod error;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use reward_zero::bench::DEFAULT_EPSILON;
use reward_zero::potential::DEFAULT_ALPHA;
use reward_zero::reward::{DEFAULT_BETA, DEFAULT_INTERVAL};
use reward_zero_rl::PpoConfig;

pub use commands::ablation_log_path;
pub use error::{CliError, ErrorKind};

pub const ENDPOINT_ENV: &str = "REWARD_ZERO_ENDPOINT";

#[derive(Debug, Parser)]
#[command(name = "reward-zero", version, about = "Completion-sense rewards: benchmark, embedding cache, training")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Completion-sense benchmark.
    #[command(subcommand)]
    Bench(BenchCommand),
    /// Fill an embedding cache for a manifest from the embedding service.
    EmbedCache(EmbedCacheArgs),
    /// Train a PPO agent on the synthetic reach task.
    Train(TrainArgs),
    /// Train once per value of one shaping parameter.
    Ablate(AblateArgs),
}

#[derive(Debug, Subcommand)]
pub enum BenchCommand {
    /// Score a manifest and write the report.
    Run(BenchRunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProviderKind {
    Cache,
    Http,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    /// Image embedding against the goal text, minus similarity to the first frame.
    Clip,
    /// Caption embedding against the goal text.
    Caption,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BaseModeArg {
    Difference,
    Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Table,
    Json,
    Md,
}

#[derive(Debug, Args)]
pub struct BenchRunArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, value_enum, default_value_t = ProviderKind::Cache)]
    pub provider: ProviderKind,
    /// Embedding cache file (cache provider).
    #[arg(long)]
    pub cache: Option<PathBuf>,
    /// Service base URL (http provider).
    #[arg(long, env = ENDPOINT_ENV)]
    pub endpoint: Option<String>,
    /// Model tag; defaults to the cache's only tag, or the service's.
    #[arg(long)]
    pub model_tag: Option<String>,
    /// Directory that relative frame references resolve against (http
    /// provider); defaults to the manifest's directory.
    #[arg(long)]
    pub image_root: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ModeArg::Clip)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    pub epsilon: f64,
    /// Completion-bonus weight applied when scoring transitions.
    #[arg(long, default_value_t = 0.0)]
    pub beta: f64,
    #[arg(long, value_enum, default_value_t = BaseModeArg::Difference)]
    pub base_mode: BaseModeArg,
    /// JSON report destination.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Rendering printed to stdout.
    #[arg(long, value_enum, default_value_t = FormatArg::Table)]
    pub format: FormatArg,
}

#[derive(Debug, Args)]
pub struct EmbedCacheArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, env = ENDPOINT_ENV)]
    pub endpoint: String,
    #[arg(long)]
    pub model_tag: String,
    /// Cache file; existing entries are kept and not re-embedded.
    #[arg(long)]
    pub out: PathBuf,
    /// Directory that relative frame references resolve against; defaults to
    /// the manifest's directory.
    #[arg(long)]
    pub image_root: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EnvArg {
    Reach,
    /// Shorter steps and episodes, starts far from the goal.
    ReachFar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RewardArg {
    Sparse,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CombinationArg {
    Additive,
    Replace,
}

/// Flags shared by `train` and `ablate`.
#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long, value_enum, default_value_t = EnvArg::Reach)]
    pub env: EnvArg,
    #[arg(long, default_value_t = DEFAULT_BETA)]
    pub beta: f64,
    #[arg(long, default_value_t = DEFAULT_INTERVAL)]
    pub interval: u64,
    #[arg(long, value_enum, default_value_t = CombinationArg::Additive)]
    pub combination: CombinationArg,
    #[arg(long, default_value_t = PpoConfig::default().total_steps)]
    pub total_steps: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Training log destination (CSV).
    #[arg(long)]
    pub log: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, value_enum, default_value_t = RewardArg::Zero)]
    pub reward: RewardArg,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ParamArg {
    Beta,
    Interval,
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    #[arg(long, value_enum)]
    pub param: ParamArg,
    /// Comma-separated values of the swept parameter.
    #[arg(long, required = true, value_delimiter = ',', num_args = 1..)]
    pub values: Vec<f64>,
    #[command(flatten)]
    pub run: RunArgs,
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Normal output goes to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if code == 0 {
                write!(out, "{}", e.render())
            } else {
                write!(err, "{}", e.render())
            };
            return code;
        }
    };
    match commands::execute(cli.command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
