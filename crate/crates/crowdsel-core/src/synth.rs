//! Synthetic corpus generation with workers of known quality.
//!
//! Generated sentences carry placeholder tokens and randomly placed expert
//! spans. Each worker gets a per-worker quality target drawn from the
//! configured range and annotates a random subset of sentences; their
//! annotations are picked from the same per-sentence candidate pools the
//! augmentation module uses, steered by the same running-mean thermostat,
//! so a worker's mean F1 against the expert lands close to their target.
//! The result is a sparse corpus — augmentation can later make it total —
//! whose ground-truth worker qualities are known, which is what policy
//! studies need.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::augment::{enumerate_sentence_candidates, select_annotation, WorkerTarget};
use crate::corpus::{
    tags_of, Corpus, LabelId, Sentence, SentenceId, Span, TagSet, TagSetError, WorkerId,
};
use crate::metrics::MetricKind;

/// Longest generated expert span, in tokens.
pub const MAX_SPAN_LEN: usize = 3;

/// Candidate-pool size used when selecting worker annotations.
const POOL_CAP: usize = 1000;

/// Fraction of sentences each worker annotates, drawn uniformly per worker.
const COVERAGE_RANGE: (f64, f64) = (0.2, 0.5);

/// RNG stream for sentence structure (lengths, spans, labels).
const STRUCTURE_STREAM: u64 = 1 << 40;

/// RNG stream for worker parameters (targets, coverage, subsets).
const WORKER_STREAM: u64 = (1 << 40) + 1;

/// Shape of a synthetic corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    /// Number of sentences.
    pub n_sentences: usize,
    /// Number of workers.
    pub n_workers: usize,
    /// Inclusive range of sentence lengths, in tokens.
    pub len_range: (usize, usize),
    /// Inclusive range of expert span counts per sentence.
    pub spans_range: (usize, usize),
    /// Inclusive range worker quality targets are drawn from.
    pub quality_range: (f64, f64),
    /// Span label names (everything but the outside tag).
    pub labels: Vec<String>,
    /// Seed for all generation randomness.
    pub seed: u64,
}

/// Why a corpus could not be generated.
#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    /// Zero sentences or zero workers.
    #[error("a corpus needs at least one sentence and one worker")]
    EmptyShape,
    /// Bad sentence-length range.
    #[error("invalid sentence length range {0}..={1}")]
    BadLength(usize, usize),
    /// Bad span-count range.
    #[error("invalid span count range {0}..={1}")]
    BadSpanCount(usize, usize),
    /// Quality targets must be probabilities.
    #[error("invalid quality range {0}..={1}; targets must lie in [0, 1]")]
    BadQuality(f64, f64),
    /// Too many spans for the shortest sentence.
    #[error("cannot fit {spans} non-adjacent spans into a sentence of {sentence_len} tokens")]
    InfeasibleSpans {
        /// Most spans a sentence may be asked to hold.
        spans: usize,
        /// Fewest tokens a sentence may have.
        sentence_len: usize,
    },
    /// Bad label list.
    #[error(transparent)]
    TagSet(#[from] TagSetError),
}

impl SyntheticSpec {
    fn validate(&self) -> Result<(), SynthError> {
        if self.n_sentences == 0 || self.n_workers == 0 {
            return Err(SynthError::EmptyShape);
        }
        let (len_min, len_max) = self.len_range;
        if len_min == 0 || len_min > len_max {
            return Err(SynthError::BadLength(len_min, len_max));
        }
        let (spans_min, spans_max) = self.spans_range;
        if spans_min > spans_max {
            return Err(SynthError::BadSpanCount(spans_min, spans_max));
        }
        let (q_min, q_max) = self.quality_range;
        if !(0.0..=1.0).contains(&q_min) || !(0.0..=1.0).contains(&q_max) || q_min > q_max {
            return Err(SynthError::BadQuality(q_min, q_max));
        }
        // Worst case: spans_max one-token spans, each after a one-token gap.
        if spans_max > 0 && 2 * spans_max - 1 > len_min {
            return Err(SynthError::InfeasibleSpans {
                spans: spans_max,
                sentence_len: len_min,
            });
        }
        Ok(())
    }
}

/// Places `n_spans` non-adjacent spans left to right, reserving two tokens
/// (gap plus minimal span) for each span still to come.
fn place_spans(
    sentence_len: usize,
    n_spans: usize,
    n_labels: usize,
    rng: &mut impl Rng,
) -> Vec<Span> {
    let mut spans = Vec::with_capacity(n_spans);
    let mut cursor = 0usize;
    for i in 0..n_spans {
        let suffix = 2 * (n_spans - 1 - i);
        let max_len = (sentence_len - suffix - cursor).min(MAX_SPAN_LEN);
        let len = rng.random_range(1..=max_len);
        let start = rng.random_range(cursor..=sentence_len - suffix - len);
        let label = LabelId(rng.random_range(0..n_labels) as u16);
        spans.push(Span::new(label, start, start + len));
        cursor = start + len + 1;
    }
    spans
}

/// Generates a sparse synthetic corpus from `spec`.
///
/// Deterministic in `spec`: sentence structure, worker parameters, and the
/// per-sentence candidate pools each draw from their own stream of the
/// spec's seed, so regeneration is byte-identical regardless of thread
/// scheduling.
pub fn generate_corpus(spec: &SyntheticSpec) -> Result<Corpus, SynthError> {
    spec.validate()?;
    let tag_set = TagSet::new(spec.labels.iter().cloned())?;
    let n_labels = tag_set.n_labels();

    let mut structure_rng = ChaCha8Rng::seed_from_u64(spec.seed);
    structure_rng.set_stream(STRUCTURE_STREAM);
    let mut sentences: Vec<Sentence> = Vec::with_capacity(spec.n_sentences);
    for id in 0..spec.n_sentences {
        let len = structure_rng.random_range(spec.len_range.0..=spec.len_range.1);
        let n_spans = structure_rng.random_range(spec.spans_range.0..=spec.spans_range.1);
        let spans = place_spans(len, n_spans, n_labels, &mut structure_rng);
        sentences.push(Sentence {
            id: SentenceId(id as u32),
            tokens: (0..len).map(|pos| format!("t{pos}")).collect(),
            expert: tags_of(&spans, len),
            crowd: Default::default(),
        });
    }

    // Worker parameters and sentence subsets.
    let mut worker_rng = ChaCha8Rng::seed_from_u64(spec.seed);
    worker_rng.set_stream(WORKER_STREAM);
    let mut assignments: Vec<(WorkerTarget, Vec<usize>)> = Vec::with_capacity(spec.n_workers);
    for j in 0..spec.n_workers {
        let quality = worker_rng.random_range(spec.quality_range.0..=spec.quality_range.1);
        let coverage = worker_rng.random_range(COVERAGE_RANGE.0..=COVERAGE_RANGE.1);
        let count =
            ((coverage * spec.n_sentences as f64).round() as usize).clamp(1, spec.n_sentences);
        let mut subset = index::sample(&mut worker_rng, spec.n_sentences, count).into_vec();
        subset.sort_unstable();
        assignments.push((WorkerTarget::new(WorkerId(j as u32), quality), subset));
    }

    // Candidate pools for every sentence some worker annotates.
    let mut needed = vec![false; spec.n_sentences];
    for (_, subset) in &assignments {
        for &idx in subset {
            needed[idx] = true;
        }
    }
    let pools: Vec<Option<Vec<crate::augment::CandidateAnnotation>>> = sentences
        .par_iter()
        .map(|sentence| {
            if !needed[sentence.id.0 as usize] {
                return Ok(None);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(u64::from(sentence.id.0));
            enumerate_sentence_candidates(
                &sentence.expert,
                MetricKind::SpanProp,
                POOL_CAP,
                &mut rng,
            )
            .map(Some)
        })
        .collect::<Result<_, _>>()
        .expect("generated spans are always in bounds");

    for (mut target, subset) in assignments {
        let worker_id = target.worker_id;
        for idx in subset {
            let pool = pools[idx]
                .as_ref()
                .expect("pool was built for this sentence");
            let chosen = select_annotation(&mut target, pool)
                .expect("pools are never empty")
                .tags
                .clone();
            sentences[idx].crowd.insert(worker_id, chosen);
        }
    }

    Ok(Corpus { tag_set, sentences })
}
