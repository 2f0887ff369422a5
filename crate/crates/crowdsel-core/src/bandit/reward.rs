//! Reward functions: what a worker earns for one annotated sentence.
//!
//! All rewards are F1 scores in `[0, 1]`. The reference the F1 is computed
//! against is what distinguishes the three schemes:
//!
//! * **exp** — the expert annotation. Accurate but every scored sentence
//!   costs an expert evaluation.
//! * **mv** — the majority vote over all `K` annotations of the sentence,
//!   the scored worker's own included (the vote aggregates the whole group's
//!   output; excluding the voter would score each worker against a different
//!   reference). Free of expert cost, but the vote itself may be wrong.
//! * **exp_mv** — vote-based when the group agrees (Fleiss kappa above
//!   `tau`), expert-based otherwise. High agreement is evidence the vote is
//!   trustworthy, so the expert is reserved for contentious sentences. The
//!   flag returned alongside the reward records whether the expert was
//!   consulted, which is what expert-usage accounting counts.

use thiserror::Error;

use crate::aggregate::{majority_vote, AggregateError};
use crate::corpus::{Tag, TagSet};
use crate::metrics::{annotation_f1, fleiss_kappa, MetricError, MetricKind};

/// Errors computing rewards.
#[derive(Debug, Error, PartialEq)]
pub enum RewardError {
    /// Length mismatches or too few annotators for the agreement gate.
    #[error(transparent)]
    Metric(#[from] MetricError),
    /// Majority-vote failures.
    #[error(transparent)]
    Aggregate(#[from] AggregateError),
}

/// F1 of an annotation against the expert annotation.
pub fn reward_exp(
    annotation: &[Tag],
    expert: &[Tag],
    metric: MetricKind,
) -> Result<f64, MetricError> {
    annotation_f1(annotation, expert, metric)
}

/// F1 of an annotation against the majority vote over `group` — all `K`
/// annotations of the sentence, the scored worker's own included.
pub fn reward_mv(
    annotation: &[Tag],
    group: &[&[Tag]],
    tag_set: &TagSet,
    metric: MetricKind,
) -> Result<f64, RewardError> {
    let vote = majority_vote(group, tag_set)?;
    Ok(annotation_f1(annotation, &vote.aggregated, metric)?)
}

/// Agreement-gated reward: `(reward, expert_consulted)`.
///
/// When the group's Fleiss kappa exceeds `tau` the reward is F1 against the
/// majority vote and the expert stays out of the loop; otherwise the reward
/// is F1 against the expert annotation and the consultation is flagged.
pub fn reward_exp_mv(
    annotation: &[Tag],
    group: &[&[Tag]],
    expert: &[Tag],
    tau: f64,
    tag_set: &TagSet,
    metric: MetricKind,
) -> Result<(f64, bool), RewardError> {
    let kappa = fleiss_kappa(group, tag_set)?;
    if kappa > tau {
        Ok((reward_mv(annotation, group, tag_set, metric)?, false))
    } else {
        Ok((annotation_f1(annotation, expert, metric)?, true))
    }
}
