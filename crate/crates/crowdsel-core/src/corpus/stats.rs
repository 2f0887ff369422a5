//! Descriptive statistics over a corpus: sentence and worker counts, the
//! distribution of per-worker annotation counts, and mean expert span length.

use serde::Serialize;
use thiserror::Error;

use super::{spans_of, Corpus};

/// Errors computing corpus statistics.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum StatsError {
    /// Dispersion of per-worker annotation counts is undefined with zero
    /// workers.
    #[error("corpus has no crowd workers; per-worker statistics are undefined")]
    NoWorkers,
}

/// Summary of a sample of counts (per-worker annotation totals).
///
/// `variance` is the population variance (division by `n`, not `n - 1`): the
/// workers of a corpus are the whole population of interest, not a sample
/// from a larger pool. The median of an even-sized sample is the midpoint of
/// the two central values. `cv_percent` is the coefficient of variation,
/// `100 * sd / mean`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountSummary {
    /// Largest count.
    pub max: usize,
    /// Smallest count.
    pub min: usize,
    /// `max - min`.
    pub range: usize,
    /// Arithmetic mean.
    pub mean: f64,
    /// Median (midpoint of the central pair for even sizes).
    pub median: f64,
    /// Population variance.
    pub variance: f64,
    /// Population standard deviation.
    pub sd: f64,
    /// Coefficient of variation in percent: `100 * sd / mean`.
    pub cv_percent: f64,
}

impl CountSummary {
    /// Summarizes a non-empty sample of counts.
    fn of(counts: &[usize]) -> CountSummary {
        debug_assert!(!counts.is_empty());
        let mut sorted = counts.to_vec();
        sorted.sort_unstable();
        let n = sorted.len();
        let nf = n as f64;
        let mean = sorted.iter().sum::<usize>() as f64 / nf;
        let median = if n % 2 == 1 {
            sorted[n / 2] as f64
        } else {
            (sorted[n / 2 - 1] as f64 + sorted[n / 2] as f64) / 2.0
        };
        let variance = sorted
            .iter()
            .map(|&c| {
                let d = c as f64 - mean;
                d * d
            })
            .sum::<f64>()
            / nf;
        let sd = variance.sqrt();
        let cv_percent = if mean == 0.0 { 0.0 } else { 100.0 * sd / mean };
        CountSummary {
            max: sorted[n - 1],
            min: sorted[0],
            range: sorted[n - 1] - sorted[0],
            mean,
            median,
            variance,
            sd,
            cv_percent,
        }
    }
}

/// Corpus-level descriptive statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusStats {
    /// Number of sentences.
    pub n_sentences: usize,
    /// Number of distinct crowd workers.
    pub n_workers: usize,
    /// Total number of crowd annotations (sentence × worker pairs).
    pub n_annotations: usize,
    /// Mean token length of expert spans across the corpus.
    pub mean_span_length: f64,
    /// Distribution of per-worker annotation counts.
    pub annotations_per_worker: CountSummary,
}

/// Computes descriptive statistics for a corpus.
///
/// The corpus must have at least one crowd worker; the per-worker dispersion
/// measures are meaningless otherwise and the caller gets an explicit error
/// rather than NaNs.
pub fn compute_stats(corpus: &Corpus) -> Result<CorpusStats, StatsError> {
    let counts_by_worker = corpus.annotation_counts();
    if counts_by_worker.is_empty() {
        return Err(StatsError::NoWorkers);
    }
    let counts: Vec<usize> = counts_by_worker.values().copied().collect();

    let mut span_tokens = 0usize;
    let mut span_count = 0usize;
    for sentence in &corpus.sentences {
        for span in spans_of(&sentence.expert) {
            span_tokens += span.len();
            span_count += 1;
        }
    }
    let mean_span_length = if span_count == 0 {
        0.0
    } else {
        span_tokens as f64 / span_count as f64
    };

    Ok(CorpusStats {
        n_sentences: corpus.sentences.len(),
        n_workers: counts.len(),
        n_annotations: counts.iter().sum(),
        mean_span_length,
        annotations_per_worker: CountSummary::of(&counts),
    })
}
