use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use manualcode::eval::UnparseablePolicy;

#[derive(Debug, Parser)]
#[command(name = "manualcode", version, args_override_self = true, about = "Code narrative circumstances with LLM prompts chosen from a coding manual")]
pub struct Cli {
    #[command(flatten)]
    pub overrides: Overrides,
    #[command(subcommand)]
    pub command: Command,
}

/// Every `RunConfig` field, settable from the command line. Flags win over
/// the config file.
#[derive(Debug, Default, Args)]
pub struct Overrides {
    /// TOML config file.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Coding manual (JSON).
    #[arg(long, global = true, value_name = "FILE")]
    pub manual: Option<PathBuf>,
    /// Labeled corpus (JSONL).
    #[arg(long, global = true, value_name = "FILE")]
    pub corpus: Option<PathBuf>,
    /// Output directory for samples, verdicts and reports.
    #[arg(long = "out", global = true, value_name = "DIR")]
    pub output_dir: Option<PathBuf>,
    /// Mock provider script (JSONL).
    #[arg(long, global = true, value_name = "FILE")]
    pub mock_script: Option<PathBuf>,
    /// Per-circumstance results CSV for offline analyses.
    #[arg(long, global = true, value_name = "FILE")]
    pub fixture: Option<PathBuf>,
    /// Complexity score above which the complex prompt is used.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub threshold: Option<i64>,
    #[arg(long, global = true)]
    pub tie_epsilon: Option<f64>,
    /// Narrative truncation limit in characters.
    #[arg(long, global = true)]
    pub truncation_limit: Option<usize>,
    #[arg(long, global = true)]
    pub n_pos: Option<usize>,
    #[arg(long, global = true)]
    pub n_neg: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Normal quantile for the Wilson intervals.
    #[arg(long, global = true)]
    pub z: Option<f64>,
    /// Accept unknown keys in the manual.
    #[arg(long, global = true)]
    pub lenient: bool,
    #[arg(long, global = true, value_enum)]
    pub unparseable_policy: Option<PolicyArg>,
    /// Provider name; `mock` runs offline.
    #[arg(long, global = true)]
    pub provider: Option<String>,
    #[arg(long, global = true)]
    pub model: Option<String>,
    #[arg(long, global = true)]
    pub temperature: Option<f64>,
    #[arg(long, global = true)]
    pub max_concurrency: Option<usize>,
    #[arg(long, global = true)]
    pub max_retries: Option<u32>,
    #[arg(long = "timeout-secs", global = true)]
    pub request_timeout_secs: Option<f64>,
    #[arg(long, global = true)]
    pub base_url: Option<String>,
    /// Environment variable holding the API key.
    #[arg(long, global = true)]
    pub api_key_env: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    AsNo,
    AsYes,
    Drop,
}

impl From<PolicyArg> for UnparseablePolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::AsNo => UnparseablePolicy::AsNo,
            PolicyArg::AsYes => UnparseablePolicy::AsYes,
            PolicyArg::Drop => UnparseablePolicy::Drop,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyMode {
    /// Per-circumstance choice from the complexity score.
    Auto,
    Simple,
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScoreFormat {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Markdown,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Inspect a coding manual.
    #[command(subcommand)]
    Manual(ManualCommand),
    /// Draw balanced per-circumstance samples from the corpus.
    Sample(SampleArgs),
    /// Render prompts for sampled narratives without calling a model.
    BuildPrompts(PromptArgs),
    /// Classify sampled narratives with the configured provider.
    Classify(ClassifyArgs),
    /// Score verdicts against sample labels.
    Evaluate(EvaluateArgs),
    /// Offline analyses over per-circumstance results.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
    /// All analysis tables for a results fixture.
    Report(ReportArgs),
}

#[derive(Debug, Subcommand)]
pub enum ManualCommand {
    /// Check the manual and list non-fatal warnings.
    Validate,
    /// Complexity score and prompt strategy per circumstance.
    Score {
        #[arg(long, value_enum, default_value = "table")]
        format: ScoreFormat,
    },
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Circumstances to sample (default: every manual circumstance).
    #[arg(long = "circumstance", value_name = "ID")]
    pub circumstances: Vec<String>,
    /// Skip malformed corpus lines instead of aborting.
    #[arg(long)]
    pub skip_malformed: bool,
}

#[derive(Debug, Args)]
pub struct PromptArgs {
    #[arg(long, value_enum, default_value = "auto")]
    pub strategy: StrategyMode,
    #[arg(long = "circumstance", value_name = "ID")]
    pub circumstances: Vec<String>,
    /// Output file (default: <out>/prompts.jsonl).
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long, value_enum, default_value = "auto")]
    pub strategy: StrategyMode,
    #[arg(long = "circumstance", value_name = "ID")]
    pub circumstances: Vec<String>,
    /// Checkpoint file for resuming interrupted runs.
    #[arg(long, value_name = "FILE")]
    pub checkpoint: Option<PathBuf>,
    /// Keep raw model responses under <out>/raw.
    #[arg(long)]
    pub archive_raw: bool,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Verdict directory (default: <out>/verdicts).
    #[arg(long, value_name = "DIR")]
    pub verdicts: Option<PathBuf>,
    /// Further verdict directories to include in the disagreement review.
    #[arg(long = "compare", value_name = "DIR")]
    pub compare: Vec<PathBuf>,
    /// Accept inputs produced under different configurations.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Subcommand)]
pub enum AnalyzeCommand {
    /// Complexity-score strategy prediction against hindsight.
    Strategy(StrategyArgs),
    /// Hybrid vs. baseline wins by training-set size.
    Brackets(BracketArgs),
}

#[derive(Debug, Args)]
pub struct StrategyArgs {
    /// metrics.json from a simple-prompt run (with --complex-metrics and --manual).
    #[arg(long, value_name = "FILE", requires = "complex_metrics")]
    pub simple_metrics: Option<PathBuf>,
    #[arg(long, value_name = "FILE", requires = "simple_metrics")]
    pub complex_metrics: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "markdown")]
    pub format: ReportFormat,
}

#[derive(Debug, Args)]
pub struct BracketArgs {
    #[arg(long, value_enum, default_value = "markdown")]
    pub format: ReportFormat,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Write the report here instead of stdout.
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}
