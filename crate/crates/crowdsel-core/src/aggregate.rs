//! Majority-vote aggregation of crowd annotations.
//!
//! Voting is per token: each of the K annotators contributes one tag per
//! position and the plurality tag wins. Ties break deterministically toward
//! `O` first (prefer silence over an arbitrary span) and then toward the
//! earliest tag in the vocabulary order, which makes the vote independent of
//! annotator ordering. Because per-token plurality can splice span fragments
//! into invalid IOB2 (an `I-X` whose predecessor lost the vote), the voted
//! sequence is repaired afterwards; repairing first would instead distort
//! individual ballots before they are counted.

use serde::Serialize;
use thiserror::Error;

use crate::corpus::{Tag, TagSet};

/// Errors from vote aggregation.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum AggregateError {
    /// Voting needs at least one annotation.
    #[error("majority vote needs at least one annotation")]
    NoAnnotations,
    /// All ballots must be token-aligned.
    #[error("annotation length mismatch: {got} vs {expected} tokens")]
    LengthMismatch {
        /// Length of the offending annotation.
        got: usize,
        /// Length of the first annotation.
        expected: usize,
    },
}

/// Outcome of a majority vote.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VoteResult {
    /// The voted tag sequence, IOB2-repaired.
    pub aggregated: Vec<Tag>,
    /// Winning vote share per token (before repair), in `(0, 1]`.
    pub per_token_margin: Vec<f64>,
}

/// Per-token plurality vote over K token-aligned annotations.
pub fn majority_vote(
    annotations: &[&[Tag]],
    tag_set: &TagSet,
) -> Result<VoteResult, AggregateError> {
    if annotations.is_empty() {
        return Err(AggregateError::NoAnnotations);
    }
    let len = annotations[0].len();
    for row in annotations {
        if row.len() != len {
            return Err(AggregateError::LengthMismatch {
                got: row.len(),
                expected: len,
            });
        }
    }
    let k = annotations.len() as f64;
    let mut voted = Vec::with_capacity(len);
    let mut margins = Vec::with_capacity(len);
    let mut counts = vec![0usize; tag_set.vocab_size()];
    for pos in 0..len {
        counts.iter_mut().for_each(|c| *c = 0);
        for row in annotations {
            counts[tag_set.vocab_index(row[pos])] += 1;
        }
        // First maximum in vocabulary order: `O` sits at index 0, so ties
        // involving `O` resolve to `O`, and remaining ties resolve to the
        // earliest tag in the vocabulary.
        let (winner_idx, &winner_count) = counts
            .iter()
            .enumerate()
            .max_by(|(ia, ca), (ib, cb)| ca.cmp(cb).then(ib.cmp(ia)))
            .expect("vocabulary is never empty");
        voted.push(tag_set.tag_at(winner_idx));
        margins.push(winner_count as f64 / k);
    }
    Ok(VoteResult {
        aggregated: bio_repair(&voted),
        per_token_margin: margins,
    })
}

/// Repairs IOB2 violations: an `I-X` that does not continue a span of label
/// `X` becomes `B-X`. Valid sequences pass through unchanged, and repairing
/// twice is the same as repairing once.
#[must_use]
pub fn bio_repair(tags: &[Tag]) -> Vec<Tag> {
    let mut repaired = Vec::with_capacity(tags.len());
    let mut prev: Option<Tag> = None;
    for &tag in tags {
        let fixed = match tag {
            Tag::I(label) => {
                let continues = matches!(prev, Some(Tag::B(l)) | Some(Tag::I(l)) if l == label);
                if continues {
                    tag
                } else {
                    Tag::B(label)
                }
            }
            other => other,
        };
        repaired.push(fixed);
        prev = Some(fixed);
    }
    repaired
}
