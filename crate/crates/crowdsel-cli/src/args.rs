//! Command-line argument definitions.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crowdsel_core::{MetricKind, PolicyKind, RewardMetric};

/// Worker-selection simulations for crowdsourced span labeling.
#[derive(Debug, Parser)]
#[command(name = "crowdsel", version, about)]
pub struct Cli {
    /// Emit machine-readable JSON on stdout instead of plain text.
    #[arg(long, global = true)]
    pub json: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print descriptive statistics for a corpus file.
    Stats(StatsArgs),
    /// Score one corpus's expert annotations against another's.
    Score(ScoreArgs),
    /// Majority-vote the crowd annotations of a corpus.
    Aggregate(AggregateArgs),
    /// Fill every missing worker annotation, preserving worker quality.
    Augment(AugmentArgs),
    /// Run a selection policy over a fully annotated corpus.
    Simulate(SimulateArgs),
    /// Run a selection policy over Bernoulli worker profiles.
    SimulateBernoulli(SimulateBernoulliArgs),
    /// Sweep the agreement gate threshold over Bernoulli profiles.
    SweepTau(SweepTauArgs),
    /// Generate a synthetic sparse corpus with known worker qualities.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Corpus file to describe.
    pub corpus: PathBuf,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Corpus whose expert column is treated as the prediction.
    pub predictions: PathBuf,
    /// Corpus whose expert column is treated as the gold standard.
    pub gold: PathBuf,
    /// Evaluation granularity.
    #[arg(long, value_enum, default_value_t = MetricArg::Prop)]
    pub metric: MetricArg,
}

#[derive(Debug, Args)]
pub struct AggregateArgs {
    /// Corpus whose crowd annotations are voted.
    pub corpus: PathBuf,
    /// Vote only this sentence and print tokens, tags, and margins.
    #[arg(long)]
    pub sentence: Option<u32>,
    /// Write the voted corpus here instead of stdout (full-corpus mode).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    /// Sparse input corpus.
    pub input: PathBuf,
    /// Where to write the fully annotated corpus.
    pub output: PathBuf,
    /// Quality metric the fill targets.
    #[arg(long, value_enum, default_value_t = MetricArg::Prop)]
    pub metric: MetricArg,
    /// Maximum candidate annotations kept per sentence.
    #[arg(long, default_value_t = 1000)]
    pub cap: usize,
    /// Seed for candidate sampling.
    #[arg(long, env = "CROWDSEL_SEED", default_value_t = 42)]
    pub seed: u64,
    /// Replace quality-targeted selection with a baseline fill.
    #[arg(long, value_enum)]
    pub baseline: Option<BaselineArg>,
    /// Where to write the per-worker fidelity CSV
    /// (default: `<output>.fidelity.csv`).
    #[arg(long)]
    pub fidelity: Option<PathBuf>,
}

/// Flags shared by the policy-running commands.
#[derive(Debug, Args)]
pub struct PolicyArgs {
    /// Selection policy.
    #[arg(long, value_enum, default_value_t = PolicyArg::Cucb)]
    pub policy: PolicyArg,
    /// Exploration probability for the epsilon-greedy policy.
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    /// Decay the exploration probability as rounds accumulate.
    #[arg(long)]
    pub epsilon_decay: bool,
    /// Workers selected per round (the super-arm size).
    #[arg(long, default_value_t = 20)]
    pub superarm: usize,
    /// Workers assigned to each sentence; must divide the super-arm size.
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// Seed for all run randomness.
    #[arg(long, env = "CROWDSEL_SEED", default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Fully annotated corpus (augment first if sparse).
    pub corpus: PathBuf,
    #[command(flatten)]
    pub policy: PolicyArgs,
    /// Reward scheme.
    #[arg(long, value_enum, default_value_t = RewardArg::ExpMv)]
    pub reward: RewardArg,
    /// Agreement threshold for the gated reward: the expert is consulted
    /// when the group's kappa is at or below this ("min" disables the
    /// expert entirely).
    #[arg(long, value_parser = parse_tau, default_value = "0.4")]
    pub tau: f64,
    /// Evaluation granularity for rewards and curves.
    #[arg(long, value_enum, default_value_t = MetricArg::Prop)]
    pub metric: MetricArg,
    /// Stop after this many selection rounds (default: exhaust the corpus).
    #[arg(long)]
    pub horizon: Option<u64>,
    /// Write the per-round curves CSV here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateBernoulliArgs {
    /// Worker profile table (`worker_id,phi_exp,phi_mv`).
    #[arg(long)]
    pub profiles: PathBuf,
    #[command(flatten)]
    pub policy: PolicyArgs,
    /// Reward scheme.
    #[arg(long, value_enum, default_value_t = RewardArg::ExpMv)]
    pub reward: RewardArg,
    /// Agreement threshold for the gated reward ("min" disables the expert).
    #[arg(long, value_parser = parse_tau, default_value = "0.4")]
    pub tau: f64,
    /// Number of selection rounds.
    #[arg(long)]
    pub horizon: u64,
    /// Write the per-round curves CSV here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepTauArgs {
    /// Worker profile table (`worker_id,phi_exp,phi_mv`).
    #[arg(long)]
    pub profiles: PathBuf,
    #[command(flatten)]
    pub policy: PolicyArgs,
    /// First threshold of the sweep.
    #[arg(long, default_value_t = 0.0)]
    pub from: f64,
    /// Last threshold of the sweep (inclusive).
    #[arg(long, default_value_t = 1.0)]
    pub to: f64,
    /// Threshold increment.
    #[arg(long, default_value_t = 0.05)]
    pub step: f64,
    /// Runs averaged per threshold (seeds `seed`, `seed + 1`, ...).
    #[arg(long, default_value_t = 5)]
    pub seeds: u64,
    /// Number of selection rounds per run.
    #[arg(long)]
    pub horizon: u64,
    /// Write the sweep CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Number of sentences.
    #[arg(long, default_value_t = 200)]
    pub sentences: usize,
    /// Number of workers.
    #[arg(long, default_value_t = 30)]
    pub workers: usize,
    /// Shortest sentence, in tokens.
    #[arg(long, default_value_t = 8)]
    pub len_min: usize,
    /// Longest sentence, in tokens.
    #[arg(long, default_value_t = 16)]
    pub len_max: usize,
    /// Fewest expert spans per sentence.
    #[arg(long, default_value_t = 1)]
    pub spans_min: usize,
    /// Most expert spans per sentence.
    #[arg(long, default_value_t = 3)]
    pub spans_max: usize,
    /// Lowest worker quality target.
    #[arg(long, default_value_t = 0.2)]
    pub quality_min: f64,
    /// Highest worker quality target.
    #[arg(long, default_value_t = 0.9)]
    pub quality_max: f64,
    /// Span labels, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "NEG,POS")]
    pub labels: Vec<String>,
    /// Seed for all generation randomness.
    #[arg(long, env = "CROWDSEL_SEED", default_value_t = 42)]
    pub seed: u64,
    /// Where to write the corpus.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    /// Exploit the best-known workers, explore with probability epsilon.
    #[value(name = "eps-greedy", alias = "epsilon-greedy")]
    EpsGreedy,
    /// Upper-confidence-bound index selection.
    Cucb,
    /// Thompson sampling from per-worker posteriors.
    Thompson,
    /// Uniformly random selection.
    Random,
    /// Always select the true best workers (zero-regret reference).
    Oracle,
}

impl From<PolicyArg> for PolicyKind {
    fn from(value: PolicyArg) -> PolicyKind {
        match value {
            PolicyArg::EpsGreedy => PolicyKind::EpsilonGreedy,
            PolicyArg::Cucb => PolicyKind::Cucb,
            PolicyArg::Thompson => PolicyKind::Thompson,
            PolicyArg::Random => PolicyKind::Random,
            PolicyArg::Oracle => PolicyKind::Oracle,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RewardArg {
    /// Score every annotation against the expert.
    Exp,
    /// Score every annotation against the group's majority vote.
    Mv,
    /// Vote when the group agrees, expert otherwise.
    #[value(name = "exp_mv", alias = "exp-mv")]
    ExpMv,
}

impl From<RewardArg> for RewardMetric {
    fn from(value: RewardArg) -> RewardMetric {
        match value {
            RewardArg::Exp => RewardMetric::Exp,
            RewardArg::Mv => RewardMetric::Mv,
            RewardArg::ExpMv => RewardMetric::ExpMv,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    /// Per-token tag match.
    Token,
    /// Spans must match boundaries and label exactly.
    Exact,
    /// Spans earn partial credit for token overlap.
    Prop,
}

impl From<MetricArg> for MetricKind {
    fn from(value: MetricArg) -> MetricKind {
        match value {
            MetricArg::Token => MetricKind::Token,
            MetricArg::Exact => MetricKind::SpanExact,
            MetricArg::Prop => MetricKind::SpanProp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BaselineArg {
    /// Fill with uniformly random spans.
    Random,
    /// Fill with uniformly random candidates from the SES pool.
    SesOnly,
}

/// Parses a gate threshold: a float, or "min" for negative infinity
/// (never consult the expert).
fn parse_tau(text: &str) -> Result<f64, String> {
    if text.eq_ignore_ascii_case("min") {
        return Ok(f64::NEG_INFINITY);
    }
    text.parse::<f64>()
        .map_err(|e| format!("invalid threshold {text:?}: {e}"))
}
