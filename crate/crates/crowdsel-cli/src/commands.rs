//! Command handlers and the error-to-exit-code mapping.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crowdsel_core::{
    annotation_prf, augment_corpus, compute_stats, generate_corpus, infer_tag_set, majority_vote,
    mean_prf, parse_corpus, read_profiles_csv, run_simulation, serialize_corpus, simulate_feedback,
    write_fidelity_csv, write_simulation_csv, write_sweep_csv, AggregateError, AugmentError,
    ConfigError, Corpus, CorpusStats, FillStrategy, MetricError, ParseError, PolicyConfig,
    ProfilesError, Sentence, SentenceId, SimError, SimulationReport, StatsError, SweepRow,
    SynthError, SyntheticSpec, Tag, WorkerFidelity,
};

use crate::args::{
    AggregateArgs, AugmentArgs, BaselineArg, Cli, Command, GenerateArgs, MetricArg, PolicyArgs,
    RewardArg, ScoreArgs, SimulateArgs, SimulateBernoulliArgs, StatsArgs, SweepTauArgs,
};

/// A failed command, classified for the process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad input data or arguments (exit code 1).
    #[error("{0}")]
    Validation(String),
    /// A file could not be read or written (exit code 2).
    #[error("{path}: {source}")]
    Io {
        /// The file involved.
        path: PathBuf,
        /// The underlying failure.
        #[source]
        source: std::io::Error,
    },
    /// A configuration that can never run (exit code 3).
    #[error("{0}")]
    Infeasible(String),
}

impl CliError {
    /// The process exit code this failure maps to.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Io { .. } => 2,
            CliError::Infeasible(_) => 3,
        }
    }
}

macro_rules! validation_error {
    ($($source:ty),* $(,)?) => {$(
        impl From<$source> for CliError {
            fn from(error: $source) -> CliError {
                CliError::Validation(error.to_string())
            }
        }
    )*};
}

validation_error!(
    ParseError,
    MetricError,
    AggregateError,
    AugmentError,
    StatsError,
    ProfilesError,
);

impl From<ConfigError> for CliError {
    fn from(error: ConfigError) -> CliError {
        CliError::Infeasible(error.to_string())
    }
}

impl From<SynthError> for CliError {
    fn from(error: SynthError) -> CliError {
        CliError::Infeasible(error.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(error: SimError) -> CliError {
        match error {
            SimError::Config(inner) => CliError::Infeasible(inner.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

/// Dispatches a parsed command line.
pub fn run(cli: Cli) -> Result<(), CliError> {
    let json = cli.json;
    match cli.command {
        Command::Stats(args) => stats(&args, json),
        Command::Score(args) => score(&args, json),
        Command::Aggregate(args) => aggregate(&args, json),
        Command::Augment(args) => augment(args, json),
        Command::Simulate(args) => simulate(&args, json),
        Command::SimulateBernoulli(args) => simulate_bernoulli(&args, json),
        Command::SweepTau(args) => sweep_tau(&args, json),
        Command::Generate(args) => generate(args, json),
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load_corpus(path: &Path) -> Result<Corpus, CliError> {
    let text = read_file(path)?;
    let tag_set = infer_tag_set(&text)?;
    Ok(parse_corpus(&text, &tag_set)?)
}

fn print_json(value: &impl Serialize) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("report types serialize")
    );
}

fn stats(args: &StatsArgs, json: bool) -> Result<(), CliError> {
    let corpus = load_corpus(&args.corpus)?;
    let stats = compute_stats(&corpus)?;
    if json {
        print_json(&stats);
    } else {
        print_stats(&stats);
    }
    Ok(())
}

fn print_stats(stats: &CorpusStats) {
    println!("sentences         {}", stats.n_sentences);
    println!("workers           {}", stats.n_workers);
    println!("annotations       {}", stats.n_annotations);
    println!("mean span length  {:.2}", stats.mean_span_length);
    let w = &stats.annotations_per_worker;
    println!("annotations per worker:");
    println!("  max {}  min {}  range {}", w.max, w.min, w.range);
    println!(
        "  mean {:.2}  median {:.2}  sd {:.2}  cv {:.1}%",
        w.mean, w.median, w.sd, w.cv_percent
    );
}

fn score(args: &ScoreArgs, json: bool) -> Result<(), CliError> {
    let pred_text = read_file(&args.predictions)?;
    let gold_text = read_file(&args.gold)?;
    // One tag set over both files so label ids line up.
    let tag_set = infer_tag_set(&format!("{pred_text}\n{gold_text}"))?;
    let pred = parse_corpus(&pred_text, &tag_set)?;
    let gold = parse_corpus(&gold_text, &tag_set)?;

    let mut per_sentence = Vec::with_capacity(pred.sentences.len());
    for sentence in &pred.sentences {
        let reference = gold.sentence(sentence.id).ok_or_else(|| {
            CliError::Validation(format!(
                "sentence {} is not in the gold corpus",
                sentence.id
            ))
        })?;
        per_sentence.push(annotation_prf(
            &sentence.expert,
            &reference.expert,
            args.metric.into(),
        )?);
    }
    let mean = mean_prf(&per_sentence);
    if json {
        print_json(&mean);
    } else {
        println!(
            "precision {:.4}  recall {:.4}  f1 {:.4}  ({} sentences, macro average)",
            mean.precision,
            mean.recall,
            mean.f1,
            per_sentence.len()
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct VotedSentence {
    sentence_id: u32,
    tokens: Vec<String>,
    tags: Vec<String>,
    margins: Vec<f64>,
}

fn vote_sentence(corpus: &Corpus, sentence: &Sentence) -> Result<VotedSentence, CliError> {
    let rows: Vec<&[Tag]> = sentence.crowd.values().map(Vec::as_slice).collect();
    let vote = majority_vote(&rows, &corpus.tag_set)?;
    Ok(VotedSentence {
        sentence_id: sentence.id.0,
        tokens: sentence.tokens.clone(),
        tags: vote
            .aggregated
            .iter()
            .map(|&t| corpus.tag_set.format_tag(t))
            .collect(),
        margins: vote.per_token_margin,
    })
}

fn aggregate(args: &AggregateArgs, json: bool) -> Result<(), CliError> {
    let corpus = load_corpus(&args.corpus)?;
    if let Some(id) = args.sentence {
        let sentence = corpus
            .sentence(SentenceId(id))
            .ok_or_else(|| CliError::Validation(format!("sentence {id} is not in the corpus")))?;
        let voted = vote_sentence(&corpus, sentence)?;
        if json {
            print_json(&voted);
        } else {
            for ((token, tag), margin) in voted.tokens.iter().zip(&voted.tags).zip(&voted.margins) {
                println!("{token}\t{tag}\t{margin:.4}");
            }
        }
        return Ok(());
    }

    let voted: Vec<VotedSentence> = corpus
        .sentences
        .iter()
        .map(|s| vote_sentence(&corpus, s))
        .collect::<Result<_, _>>()?;
    // The voted corpus: each sentence's expert column is the vote.
    let voted_corpus = Corpus {
        tag_set: corpus.tag_set.clone(),
        sentences: corpus
            .sentences
            .iter()
            .zip(&voted)
            .map(|(sentence, vote)| Sentence {
                id: sentence.id,
                tokens: sentence.tokens.clone(),
                expert: vote
                    .tags
                    .iter()
                    .map(|t| corpus.tag_set.parse_tag(t).expect("vote emits known tags"))
                    .collect(),
                crowd: BTreeMap::new(),
            })
            .collect(),
    };
    let text = serialize_corpus(&voted_corpus);
    if let Some(path) = &args.out {
        write_file(path, text.as_bytes())?;
        if json {
            print_json(&voted);
        } else {
            println!("voted {} sentences -> {}", voted.len(), path.display());
        }
    } else if json {
        print_json(&voted);
    } else {
        print!("{text}");
    }
    Ok(())
}

#[derive(Serialize)]
struct AugmentSummary<'a> {
    workers: usize,
    filled_annotations: usize,
    avg_abs_delta_f1: f64,
    max_abs_delta_f1: f64,
    fidelity: &'a [WorkerFidelity],
}

fn augment(args: AugmentArgs, json: bool) -> Result<(), CliError> {
    let corpus = load_corpus(&args.input)?;
    let strategy = match args.baseline {
        None => FillStrategy::Targeted,
        Some(BaselineArg::Random) => FillStrategy::Random,
        Some(BaselineArg::SesOnly) => FillStrategy::SesOnly,
    };
    let before: usize = corpus.sentences.iter().map(|s| s.crowd.len()).sum();
    let result = augment_corpus(&corpus, args.metric.into(), args.cap, args.seed, strategy)?;
    let after: usize = result.corpus.sentences.iter().map(|s| s.crowd.len()).sum();
    write_file(&args.output, serialize_corpus(&result.corpus).as_bytes())?;

    let fidelity_path = args.fidelity.unwrap_or_else(|| {
        let mut name = args.output.as_os_str().to_os_string();
        name.push(".fidelity.csv");
        PathBuf::from(name)
    });
    let mut fidelity_csv = Vec::new();
    write_fidelity_csv(&mut fidelity_csv, &result.fidelity).expect("writing to memory");
    write_file(&fidelity_path, &fidelity_csv)?;

    let deltas: Vec<f64> = result
        .fidelity
        .iter()
        .map(WorkerFidelity::abs_delta)
        .collect();
    let summary = AugmentSummary {
        workers: result.fidelity.len(),
        filled_annotations: after - before,
        avg_abs_delta_f1: deltas.iter().sum::<f64>() / deltas.len().max(1) as f64,
        max_abs_delta_f1: deltas.iter().fold(0.0, |a: f64, &b| a.max(b)),
        fidelity: &result.fidelity,
    };
    if json {
        print_json(&summary);
    } else {
        println!(
            "filled {} annotations for {} workers -> {}",
            summary.filled_annotations,
            summary.workers,
            args.output.display()
        );
        println!(
            "fidelity: avg |dF1| {:.4}, max |dF1| {:.4} -> {}",
            summary.avg_abs_delta_f1,
            summary.max_abs_delta_f1,
            fidelity_path.display()
        );
    }
    Ok(())
}

fn build_config(
    policy: &PolicyArgs,
    reward: RewardArg,
    tau: f64,
    metric: MetricArg,
) -> PolicyConfig {
    PolicyConfig {
        policy: policy.policy.into(),
        epsilon: policy.epsilon,
        epsilon_decay: policy.epsilon_decay,
        superarm_size: policy.superarm,
        k_per_sentence: policy.k,
        tau,
        reward_metric: reward.into(),
        metric_kind: metric.into(),
        seed: policy.seed,
    }
}

#[derive(Serialize)]
struct RunSummary {
    rounds: usize,
    final_f1: f64,
    expert_usage: f64,
    mean_reward: f64,
    cumulative_regret: f64,
}

fn emit_report(report: &SimulationReport, out: Option<&Path>, json: bool) -> Result<(), CliError> {
    if let Some(path) = out {
        let mut csv = Vec::new();
        write_simulation_csv(&mut csv, report).expect("writing to memory");
        write_file(path, &csv)?;
    }
    let summary = RunSummary {
        rounds: report.outcomes.len(),
        final_f1: report.final_f1,
        expert_usage: report.expert_usage,
        mean_reward: report.mean_reward,
        cumulative_regret: report.regret_curve.last().copied().unwrap_or(0.0),
    };
    if json {
        print_json(&summary);
    } else {
        println!(
            "rounds {}  final F1 {:.4}  expert usage {:.4}  mean reward {:.4}  regret {:.2}",
            summary.rounds,
            summary.final_f1,
            summary.expert_usage,
            summary.mean_reward,
            summary.cumulative_regret
        );
    }
    Ok(())
}

fn simulate(args: &SimulateArgs, json: bool) -> Result<(), CliError> {
    let corpus = load_corpus(&args.corpus)?;
    let config = build_config(&args.policy, args.reward, args.tau, args.metric);
    let report = run_simulation(&corpus, &config, args.horizon)?;
    emit_report(&report, args.out.as_deref(), json)
}

fn simulate_bernoulli(args: &SimulateBernoulliArgs, json: bool) -> Result<(), CliError> {
    let text = read_file(&args.profiles)?;
    let profiles = read_profiles_csv(text.as_bytes())?;
    let config = build_config(&args.policy, args.reward, args.tau, MetricArg::Prop);
    let report = simulate_feedback(&profiles, &config, args.horizon)?;
    emit_report(&report, args.out.as_deref(), json)
}

fn sweep_tau(args: &SweepTauArgs, json: bool) -> Result<(), CliError> {
    if !(args.step > 0.0 && args.step.is_finite()) {
        return Err(CliError::Validation(format!(
            "sweep step must be positive, got {}",
            args.step
        )));
    }
    if args.to < args.from {
        return Err(CliError::Validation(format!(
            "sweep range is empty: from {} > to {}",
            args.from, args.to
        )));
    }
    if args.seeds == 0 {
        return Err(CliError::Validation(
            "at least one seed per threshold is required".into(),
        ));
    }
    let text = read_file(&args.profiles)?;
    let profiles = read_profiles_csv(text.as_bytes())?;

    let mut taus = Vec::new();
    let mut i = 0u32;
    loop {
        let tau = args.from + f64::from(i) * args.step;
        if tau > args.to + 1e-9 {
            break;
        }
        taus.push(tau);
        i += 1;
    }

    let rows: Vec<SweepRow> = taus
        .par_iter()
        .map(|&tau| -> Result<SweepRow, CliError> {
            let mut final_f1 = 0.0;
            let mut mean_reward = 0.0;
            let mut expert_usage = 0.0;
            for offset in 0..args.seeds {
                let mut config = build_config(&args.policy, RewardArg::ExpMv, tau, MetricArg::Prop);
                config.seed = args.policy.seed + offset;
                let report = simulate_feedback(&profiles, &config, args.horizon)?;
                final_f1 += report.final_f1;
                mean_reward += report.mean_reward;
                expert_usage += report.expert_usage;
            }
            let n = args.seeds as f64;
            Ok(SweepRow {
                tau,
                final_f1: final_f1 / n,
                mean_reward: mean_reward / n,
                expert_usage: expert_usage / n,
            })
        })
        .collect::<Result<_, _>>()?;

    let mut csv = Vec::new();
    write_sweep_csv(&mut csv, &rows).expect("writing to memory");
    if let Some(path) = &args.out {
        write_file(path, &csv)?;
        if json {
            print_json(&rows);
        } else {
            println!(
                "swept {} thresholds x {} seeds -> {}",
                rows.len(),
                args.seeds,
                path.display()
            );
        }
    } else if json {
        print_json(&rows);
    } else {
        print!("{}", String::from_utf8(csv).expect("CSV is UTF-8"));
    }
    Ok(())
}

#[derive(Serialize)]
struct GenerateSummary {
    sentences: usize,
    workers: usize,
    crowd_annotations: usize,
}

fn generate(args: GenerateArgs, json: bool) -> Result<(), CliError> {
    let spec = SyntheticSpec {
        n_sentences: args.sentences,
        n_workers: args.workers,
        len_range: (args.len_min, args.len_max),
        spans_range: (args.spans_min, args.spans_max),
        quality_range: (args.quality_min, args.quality_max),
        labels: args.labels,
        seed: args.seed,
    };
    let corpus = generate_corpus(&spec)?;
    write_file(&args.out, serialize_corpus(&corpus).as_bytes())?;
    let summary = GenerateSummary {
        sentences: corpus.sentences.len(),
        workers: corpus.workers().len(),
        crowd_annotations: corpus.sentences.iter().map(|s| s.crowd.len()).sum(),
    };
    if json {
        print_json(&summary);
    } else {
        println!(
            "generated {} sentences, {} workers, {} crowd annotations -> {}",
            summary.sentences,
            summary.workers,
            summary.crowd_annotations,
            args.out.display()
        );
    }
    Ok(())
}
