//! Combinatorial bandit machinery for crowd worker selection.
//!
//! Workers are arms. Each round the active policy picks a super-arm of `m`
//! workers, the super-arm splits into groups of `K`, each group annotates
//! one sentence, and every worker receives a reward in `[0, 1]` — their F1
//! against either the expert annotation, the group's majority vote, or an
//! agreement-gated mixture of the two that only consults the expert when the
//! group's Fleiss kappa is at or below a threshold `tau`. Per-worker mean
//! reward estimates update as exact running means.
//!
//! The pieces, re-exported flat from this module:
//!
//! * selection rules — epsilon-greedy, CUCB index, Thompson sampling,
//!   uniform random, and a true-mean oracle;
//! * the three reward functions;
//! * [`run_simulation`] — the full loop over an annotated corpus, plus
//!   regret accounting;
//! * [`simulate_feedback`] — a corpus-free variant where rewards are
//!   Bernoulli draws from per-worker success probabilities;
//! * [`p_mv_lower_bound`] — a Chernoff-style lower bound on majority-vote
//!   correctness.

mod bound;
mod feedback;
mod policy;
mod reward;
mod sim;

pub use bound::{p_mv_lower_bound, BoundError};
pub use feedback::{simulate_feedback, WorkerProfile};
pub use policy::{
    cucb_index, select_cucb, select_epsilon_greedy, select_oracle, select_random, select_thompson,
};
pub use reward::{reward_exp, reward_exp_mv, reward_mv, RewardError};
pub use sim::{
    regret, run_simulation, ProducedPrf, RoundOutcome, SentenceRecord, SimError, SimulationReport,
};

use serde::Serialize;
use thiserror::Error;

use crate::corpus::WorkerId;
use crate::metrics::MetricKind;

/// Empirical state of one arm (worker).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorkerState {
    /// The worker this arm tracks.
    pub worker_id: WorkerId,
    /// Running mean of observed rewards.
    pub mu_bar: f64,
    /// Number of rewards observed (at least 1 after initialization).
    pub t_count: u64,
}

impl WorkerState {
    /// Initializes an arm from its first observed reward.
    #[must_use]
    pub fn new(worker_id: WorkerId, first_reward: f64) -> WorkerState {
        WorkerState {
            worker_id,
            mu_bar: first_reward,
            t_count: 1,
        }
    }

    /// Folds one reward into the running mean:
    /// `mu += (r - mu) / n`, with `n` the new observation count.
    pub fn record(&mut self, reward: f64) {
        self.t_count += 1;
        self.mu_bar += (reward - self.mu_bar) / self.t_count as f64;
    }
}

/// Which selection rule drives the simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    /// Explore a uniform random super-arm with probability epsilon,
    /// exploit the empirical top-m otherwise.
    EpsilonGreedy,
    /// Upper-confidence index: empirical mean plus an exploration bonus.
    Cucb,
    /// Posterior sampling with a normal surrogate per arm.
    Thompson,
    /// Uniform random super-arm every round (no learning).
    Random,
    /// Top-m by true mean (requires knowing the truth; a lower bound on
    /// achievable regret and the benchmark regret is measured against).
    Oracle,
}

/// How each selected worker's reward is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardMetric {
    /// F1 against the expert annotation; every sentence costs one expert
    /// evaluation.
    Exp,
    /// F1 against the group's majority vote; the expert is never consulted.
    Mv,
    /// Agreement-gated: when the group's Fleiss kappa exceeds `tau`, score
    /// against the majority vote; otherwise consult the expert.
    ExpMv,
}

/// Full configuration of a simulation run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyConfig {
    /// Selection rule.
    pub policy: PolicyKind,
    /// Exploration probability for epsilon-greedy (ignored by the others).
    pub epsilon: f64,
    /// When set, epsilon decays as `epsilon * s^(-1/3)` over selection
    /// rounds `s = 1, 2, ...` (capped at 1), trading early exploration for
    /// a vanishing long-run exploration rate.
    pub epsilon_decay: bool,
    /// Super-arm size `m`: workers selected per round.
    pub superarm_size: usize,
    /// Group size `K`: workers per sentence. Must divide `m`.
    pub k_per_sentence: usize,
    /// Agreement threshold for [`RewardMetric::ExpMv`]. `1.0` always
    /// consults the expert; negative infinity never does.
    pub tau: f64,
    /// Reward definition.
    pub reward_metric: RewardMetric,
    /// F1 granularity used for rewards and evaluation.
    pub metric_kind: MetricKind,
    /// Root seed for all randomness in the run.
    pub seed: u64,
}

impl Default for PolicyConfig {
    /// A mid-sized agreement-gated CUCB run; every field is expected to be
    /// overridden as needed.
    fn default() -> PolicyConfig {
        PolicyConfig {
            policy: PolicyKind::Cucb,
            epsilon: 0.1,
            epsilon_decay: false,
            superarm_size: 20,
            k_per_sentence: 10,
            tau: 0.4,
            reward_metric: RewardMetric::ExpMv,
            metric_kind: MetricKind::SpanProp,
            seed: 42,
        }
    }
}

/// Configuration rejections.
#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    /// The super-arm must be non-empty.
    #[error("superarm size must be at least 1")]
    ZeroSuperarm,
    /// Groups must be non-empty.
    #[error("per-sentence group size must be at least 1")]
    ZeroGroup,
    /// The super-arm splits into whole groups.
    #[error("superarm size {superarm} is not divisible by per-sentence group size {group}")]
    NotDivisible {
        /// Configured super-arm size `m`.
        superarm: usize,
        /// Configured group size `K`.
        group: usize,
    },
    /// Cannot select more workers than exist.
    #[error("superarm size {superarm} exceeds the worker count {workers}")]
    SuperarmExceedsWorkers {
        /// Configured super-arm size `m`.
        superarm: usize,
        /// Workers available.
        workers: usize,
    },
    /// Epsilon is a probability.
    #[error("epsilon {0} is outside [0, 1]")]
    BadEpsilon(f64),
    /// Kappa never exceeds 1, so a threshold above 1 (or NaN) is vacuous.
    #[error("tau {0} must be at most 1 (use negative infinity to never consult the expert)")]
    BadTau(f64),
    /// Fleiss kappa — and hence the agreement gate — needs at least two
    /// annotators per sentence.
    #[error("agreement-gated rewards need a per-sentence group of at least 2, got {0}")]
    AgreementNeedsPeers(usize),
}

impl PolicyConfig {
    /// Validates the configuration against the number of available workers.
    pub fn validate(&self, n_workers: usize) -> Result<(), ConfigError> {
        if self.superarm_size == 0 {
            return Err(ConfigError::ZeroSuperarm);
        }
        if self.k_per_sentence == 0 {
            return Err(ConfigError::ZeroGroup);
        }
        if !self.superarm_size.is_multiple_of(self.k_per_sentence) {
            return Err(ConfigError::NotDivisible {
                superarm: self.superarm_size,
                group: self.k_per_sentence,
            });
        }
        if self.superarm_size > n_workers {
            return Err(ConfigError::SuperarmExceedsWorkers {
                superarm: self.superarm_size,
                workers: n_workers,
            });
        }
        if !(0.0..=1.0).contains(&self.epsilon) || self.epsilon.is_nan() {
            return Err(ConfigError::BadEpsilon(self.epsilon));
        }
        if self.tau.is_nan() || self.tau > 1.0 {
            return Err(ConfigError::BadTau(self.tau));
        }
        if self.reward_metric == RewardMetric::ExpMv && self.k_per_sentence < 2 {
            return Err(ConfigError::AgreementNeedsPeers(self.k_per_sentence));
        }
        Ok(())
    }

    /// The effective exploration probability at 1-based selection round `s`.
    #[must_use]
    pub fn epsilon_at(&self, s: u64) -> f64 {
        if self.epsilon_decay {
            (self.epsilon * (s as f64).powf(-1.0 / 3.0)).min(1.0)
        } else {
            self.epsilon
        }
    }
}
