//! The selection simulation over a fully annotated corpus, plus regret
//! accounting shared with the Bernoulli variant.
//!
//! One run proceeds as follows:
//!
//! 1. **Initialization.** Every worker annotates one uniformly random
//!    sentence (drawn with replacement — the warm-up does not consume the
//!    pool) and is scored against the expert, which both seeds the worker's
//!    mean estimate and charges one expert evaluation. The round counter
//!    starts at the worker count, one round per warm-up annotation.
//! 2. **Selection rounds.** While unannotated sentences remain (and the
//!    optional horizon is not exhausted): advance the round counter, let the
//!    policy rank a super-arm of `m` workers, split it in rank order into
//!    groups of `K`, hand each group one sentence drawn uniformly without
//!    replacement from the unannotated pool, reward every group member, and
//!    update their running means. The trailing groups idle when fewer
//!    sentences than groups remain.
//!
//! **Regret** is selection regret against the true means: each round
//! contributes the oracle super-arm's summed true mean minus the summed true
//! means of the workers actually selected. Judging the *decision* rather
//! than the sampled rewards keeps the oracle's regret identically zero and
//! makes every round's contribution non-negative, so curves are comparable
//! across policies and reward schemes. Realized rewards stay available in
//! the per-round log.

use serde::Serialize;
use thiserror::Error;

use crate::aggregate::majority_vote;
use crate::corpus::{spans_of, Corpus, SentenceId, Tag, WorkerId};
use crate::metrics::{
    annotation_f1, fleiss_kappa, span_exact_prf, span_prop_prf, token_prf, MetricError, Prf,
};

use super::policy::{
    select_cucb, select_epsilon_greedy, select_oracle, select_random, select_thompson,
};
use super::reward::RewardError;
use super::{ConfigError, PolicyConfig, PolicyKind, RewardMetric, WorkerState};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Thompson sampling's pseudo-count for the surrogate posterior variance
/// `1 / (T_j + PRIOR_STRENGTH)`.
const THOMPSON_PRIOR_STRENGTH: f64 = 1.0;

/// Simulation failures.
#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    /// Invalid configuration.
    #[error(transparent)]
    Config(#[from] ConfigError),
    /// A corpus without sentences cannot be simulated.
    #[error("corpus has no sentences")]
    EmptyCorpus,
    /// A corpus without workers cannot be simulated.
    #[error("corpus has no crowd workers")]
    NoWorkers,
    /// Any worker must be assignable to any sentence.
    #[error("crowd coverage is not total: worker {worker} has no annotation for sentence {sentence} (augment the corpus first)")]
    SparseCrowd {
        /// A worker missing an annotation.
        worker: WorkerId,
        /// The sentence they are missing it for.
        sentence: SentenceId,
    },
    /// A Bernoulli profile outside `[0, 1]`.
    #[error("worker {worker}: profile probability {value} is outside [0, 1]")]
    BadProfile {
        /// The offending worker.
        worker: WorkerId,
        /// The offending probability.
        value: f64,
    },
    /// Bernoulli profiles must have unique workers.
    #[error("duplicate worker {0} in profiles")]
    DuplicateProfile(WorkerId),
    /// At least one profile is required.
    #[error("no worker profiles given")]
    NoProfiles,
    /// Reward computation failed (corrupt annotations).
    #[error(transparent)]
    Reward(#[from] RewardError),
    /// Metric computation failed (corrupt annotations).
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// What happened to one sentence in one round.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SentenceRecord {
    /// The annotated sentence (a running slot ordinal in Bernoulli runs).
    pub sentence_id: SentenceId,
    /// The group that annotated it, in selection rank order.
    pub workers: Vec<WorkerId>,
    /// The group's Fleiss kappa, when the run computes one.
    pub kappa: Option<f64>,
    /// Whether scoring this sentence consulted the expert.
    pub expert_consulted: bool,
    /// Per-worker rewards, aligned with `workers`.
    pub rewards: Vec<f64>,
    /// Per-worker F1 against the expert, aligned with `workers` (expected
    /// F1 in Bernoulli runs). Evaluation bookkeeping, not reward.
    pub f1_exp: Vec<f64>,
}

/// One selection round.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundOutcome {
    /// Global round counter (warm-up rounds included).
    pub t: u64,
    /// The super-arm in rank order.
    pub selected: Vec<WorkerId>,
    /// Per-sentence records for the groups that annotated this round.
    pub sentences: Vec<SentenceRecord>,
}

/// Mean per-annotation precision/recall/F1 of everything the run produced,
/// under each granularity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProducedPrf {
    /// Token-level mean.
    pub token: Prf,
    /// Exact-span mean.
    pub span_exact: Prf,
    /// Proportional-span mean.
    pub span_prop: Prf,
}

/// Everything a run reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    /// The configuration that produced the run.
    pub config: PolicyConfig,
    /// Worker ordering shared by `true_means` and `worker_states`.
    pub worker_ids: Vec<WorkerId>,
    /// Per-worker true mean reward-quality (mean F1 against the expert, or
    /// the profiled success probability in Bernoulli runs).
    pub true_means: Vec<f64>,
    /// Final arm states.
    pub worker_states: Vec<WorkerState>,
    /// Every selection round, in order.
    pub outcomes: Vec<RoundOutcome>,
    /// Cumulative selection regret after each round.
    pub regret_curve: Vec<f64>,
    /// Cumulative mean F1-against-expert of all annotations produced up to
    /// each round.
    pub f1_curve: Vec<f64>,
    /// Cumulative expert-usage fraction (expert evaluations over all
    /// evaluations, warm-up included) after each round.
    pub expert_usage_curve: Vec<f64>,
    /// Final value of `f1_curve` (0 when no selection round ran).
    pub final_f1: f64,
    /// Final expert-usage fraction (warm-up included).
    pub expert_usage: f64,
    /// Mean reward per pull over the selection rounds.
    pub mean_reward: f64,
    /// Mean per-annotation PRF of the produced dataset (corpus runs only).
    pub produced_prf: Option<ProducedPrf>,
}

/// Shared bookkeeping for both run variants.
pub(super) struct RunAccumulator {
    opt_sum: f64,
    cum_regret: f64,
    pub regret_curve: Vec<f64>,
    pub f1_curve: Vec<f64>,
    pub usage_curve: Vec<f64>,
    f1_sum: f64,
    f1_count: u64,
    expert_evals: u64,
    total_evals: u64,
    reward_sum: f64,
    reward_count: u64,
}

impl RunAccumulator {
    pub fn new(true_means: &[f64], m: usize) -> RunAccumulator {
        let opt_sum = select_oracle(true_means, m)
            .into_iter()
            .map(|i| true_means[i])
            .sum();
        RunAccumulator {
            opt_sum,
            cum_regret: 0.0,
            regret_curve: Vec::new(),
            f1_curve: Vec::new(),
            usage_curve: Vec::new(),
            f1_sum: 0.0,
            f1_count: 0,
            expert_evals: 0,
            total_evals: 0,
            reward_sum: 0.0,
            reward_count: 0,
        }
    }

    /// Charges the warm-up: one expert evaluation per worker.
    pub fn note_warmup(&mut self, n_workers: u64) {
        self.expert_evals += n_workers;
        self.total_evals += n_workers;
    }

    /// Records one annotated sentence.
    pub fn note_sentence(&mut self, expert_consulted: bool, rewards: &[f64], f1_exp: &[f64]) {
        self.total_evals += 1;
        if expert_consulted {
            self.expert_evals += 1;
        }
        for &r in rewards {
            self.reward_sum += r;
            self.reward_count += 1;
        }
        for &f in f1_exp {
            self.f1_sum += f;
            self.f1_count += 1;
        }
    }

    /// Closes one selection round given the selected true means.
    pub fn end_round(&mut self, selected_true_mean_sum: f64) {
        self.cum_regret += self.opt_sum - selected_true_mean_sum;
        self.regret_curve.push(self.cum_regret);
        self.f1_curve.push(self.mean_f1());
        self.usage_curve
            .push(self.expert_evals as f64 / self.total_evals as f64);
    }

    pub fn mean_f1(&self) -> f64 {
        if self.f1_count == 0 {
            0.0
        } else {
            self.f1_sum / self.f1_count as f64
        }
    }

    pub fn expert_usage(&self) -> f64 {
        if self.total_evals == 0 {
            0.0
        } else {
            self.expert_evals as f64 / self.total_evals as f64
        }
    }

    pub fn mean_reward(&self) -> f64 {
        if self.reward_count == 0 {
            0.0
        } else {
            self.reward_sum / self.reward_count as f64
        }
    }
}

/// Dispatches one selection according to the configured policy.
pub(super) fn select(
    config: &PolicyConfig,
    states: &[WorkerState],
    true_means: &[f64],
    t: u64,
    round: u64,
    rng: &mut impl Rng,
) -> Vec<usize> {
    let m = config.superarm_size;
    match config.policy {
        PolicyKind::EpsilonGreedy => {
            select_epsilon_greedy(states, m, config.epsilon_at(round), rng)
        }
        PolicyKind::Cucb => select_cucb(states, m, t),
        PolicyKind::Thompson => select_thompson(states, m, THOMPSON_PRIOR_STRENGTH, rng),
        PolicyKind::Random => select_random(states.len(), m, rng),
        PolicyKind::Oracle => select_oracle(true_means, m),
    }
}

/// Runs the selection simulation over a fully annotated corpus.
///
/// The corpus must be total: every worker annotates every sentence (run
/// augmentation first). `horizon` bounds the number of selection rounds;
/// `None` runs until the sentence pool is exhausted. All randomness derives
/// from `config.seed`.
pub fn run_simulation(
    corpus: &Corpus,
    config: &PolicyConfig,
    horizon: Option<u64>,
) -> Result<SimulationReport, SimError> {
    let n_sentences = corpus.sentences.len();
    if n_sentences == 0 {
        return Err(SimError::EmptyCorpus);
    }
    let workers = corpus.workers();
    if workers.is_empty() {
        return Err(SimError::NoWorkers);
    }
    config.validate(workers.len())?;
    for sentence in &corpus.sentences {
        if sentence.crowd.len() != workers.len() {
            let missing = workers
                .iter()
                .find(|w| !sentence.crowd.contains_key(w))
                .copied()
                .expect("some listed worker is absent");
            return Err(SimError::SparseCrowd {
                worker: missing,
                sentence: sentence.id,
            });
        }
    }

    // True means: each worker's mean F1 against the expert across the whole
    // corpus, under the configured granularity.
    let mut true_means = vec![0.0f64; workers.len()];
    for sentence in &corpus.sentences {
        for (slot, worker) in workers.iter().enumerate() {
            true_means[slot] += annotation_f1(
                &sentence.crowd[worker],
                &sentence.expert,
                config.metric_kind,
            )?;
        }
    }
    for mean in &mut true_means {
        *mean /= n_sentences as f64;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut acc = RunAccumulator::new(&true_means, config.superarm_size);

    // Warm-up: every worker annotates one random sentence (with
    // replacement), scored by the expert.
    let mut states: Vec<WorkerState> = Vec::with_capacity(workers.len());
    for &worker in &workers {
        let sentence = &corpus.sentences[rng.random_range(0..n_sentences)];
        let f1 = annotation_f1(
            &sentence.crowd[&worker],
            &sentence.expert,
            config.metric_kind,
        )?;
        states.push(WorkerState::new(worker, f1));
    }
    acc.note_warmup(workers.len() as u64);
    let mut t = workers.len() as u64;

    let groups = config.superarm_size / config.k_per_sentence;
    let mut pool: Vec<usize> = (0..n_sentences).collect();
    let mut outcomes: Vec<RoundOutcome> = Vec::new();
    let mut prf_sums = PrfSums::default();
    let mut round = 0u64;

    while !pool.is_empty() && horizon.is_none_or(|h| round < h) {
        round += 1;
        t += 1;
        let selected = select(config, &states, &true_means, t, round, &mut rng);

        let mut records = Vec::new();
        for chunk in selected.chunks(config.k_per_sentence).take(groups) {
            if pool.is_empty() {
                break;
            }
            let pick = rng.random_range(0..pool.len());
            let sentence = &corpus.sentences[pool.swap_remove(pick)];
            let group_ids: Vec<WorkerId> = chunk.iter().map(|&i| workers[i]).collect();
            let annotations: Vec<&[Tag]> = group_ids
                .iter()
                .map(|w| sentence.crowd[w].as_slice())
                .collect();

            let f1_exp: Vec<f64> = annotations
                .iter()
                .map(|a| annotation_f1(a, &sentence.expert, config.metric_kind))
                .collect::<Result<_, _>>()?;

            let (rewards, kappa, expert_consulted) = match config.reward_metric {
                RewardMetric::Exp => (f1_exp.clone(), None, true),
                RewardMetric::Mv => {
                    let vote =
                        majority_vote(&annotations, &corpus.tag_set).map_err(RewardError::from)?;
                    let rewards = annotations
                        .iter()
                        .map(|a| annotation_f1(a, &vote.aggregated, config.metric_kind))
                        .collect::<Result<_, _>>()?;
                    (rewards, None, false)
                }
                RewardMetric::ExpMv => {
                    let kappa = fleiss_kappa(&annotations, &corpus.tag_set)?;
                    if kappa > config.tau {
                        let vote = majority_vote(&annotations, &corpus.tag_set)
                            .map_err(RewardError::from)?;
                        let rewards = annotations
                            .iter()
                            .map(|a| annotation_f1(a, &vote.aggregated, config.metric_kind))
                            .collect::<Result<_, _>>()?;
                        (rewards, Some(kappa), false)
                    } else {
                        (f1_exp.clone(), Some(kappa), true)
                    }
                }
            };

            for (&state_idx, &reward) in chunk.iter().zip(&rewards) {
                states[state_idx].record(reward);
            }
            for annotation in &annotations {
                prf_sums.add(annotation, &sentence.expert)?;
            }
            acc.note_sentence(expert_consulted, &rewards, &f1_exp);
            records.push(SentenceRecord {
                sentence_id: sentence.id,
                workers: group_ids,
                kappa,
                expert_consulted,
                rewards,
                f1_exp,
            });
        }

        let selected_mean_sum: f64 = selected.iter().map(|&i| true_means[i]).sum();
        acc.end_round(selected_mean_sum);
        outcomes.push(RoundOutcome {
            t,
            selected: selected.iter().map(|&i| workers[i]).collect(),
            sentences: records,
        });
    }

    Ok(SimulationReport {
        config: config.clone(),
        worker_ids: workers,
        true_means,
        worker_states: states,
        final_f1: acc.mean_f1(),
        expert_usage: acc.expert_usage(),
        mean_reward: acc.mean_reward(),
        regret_curve: acc.regret_curve,
        f1_curve: acc.f1_curve,
        expert_usage_curve: acc.usage_curve,
        outcomes,
        produced_prf: Some(prf_sums.mean()),
    })
}

/// Recomputes the cumulative selection-regret curve from a report's round
/// log: each round contributes the optimal super-arm's summed true mean
/// minus the selected workers' summed true means. `true_means` is aligned
/// with `report.worker_ids`; `m` is the super-arm size.
#[must_use]
pub fn regret(report: &SimulationReport, true_means: &[f64], m: usize) -> Vec<f64> {
    debug_assert_eq!(true_means.len(), report.worker_ids.len());
    let mean_of = |id: WorkerId| -> f64 {
        let slot = report
            .worker_ids
            .iter()
            .position(|&w| w == id)
            .expect("selected worker is listed in the report");
        true_means[slot]
    };
    let opt_sum: f64 = select_oracle(true_means, m)
        .into_iter()
        .map(|i| true_means[i])
        .sum();
    let mut cum = 0.0;
    let mut curve = Vec::with_capacity(report.outcomes.len());
    for outcome in &report.outcomes {
        let selected_sum: f64 = outcome.selected.iter().map(|&w| mean_of(w)).sum();
        cum += opt_sum - selected_sum;
        curve.push(cum);
    }
    curve
}

/// Component-wise PRF accumulation across produced annotations.
#[derive(Default)]
struct PrfSums {
    token: (f64, f64, f64),
    exact: (f64, f64, f64),
    prop: (f64, f64, f64),
    count: u64,
}

impl PrfSums {
    fn add(&mut self, annotation: &[Tag], expert: &[Tag]) -> Result<(), MetricError> {
        let add_to = |acc: &mut (f64, f64, f64), prf: Prf| {
            acc.0 += prf.precision;
            acc.1 += prf.recall;
            acc.2 += prf.f1;
        };
        add_to(&mut self.token, token_prf(annotation, expert)?);
        let pred_spans = spans_of(annotation);
        let gold_spans = spans_of(expert);
        add_to(&mut self.exact, span_exact_prf(&pred_spans, &gold_spans));
        add_to(&mut self.prop, span_prop_prf(&pred_spans, &gold_spans));
        self.count += 1;
        Ok(())
    }

    fn mean(&self) -> ProducedPrf {
        let mean_of = |acc: (f64, f64, f64)| {
            if self.count == 0 {
                Prf::zero()
            } else {
                let n = self.count as f64;
                Prf {
                    precision: acc.0 / n,
                    recall: acc.1 / n,
                    f1: acc.2 / n,
                }
            }
        };
        ProducedPrf {
            token: mean_of(self.token),
            span_exact: mean_of(self.exact),
            span_prop: mean_of(self.prop),
        }
    }
}
