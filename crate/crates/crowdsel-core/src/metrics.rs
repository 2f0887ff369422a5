//! Annotation quality and agreement metrics.
//!
//! Three precision/recall/F1 granularities are provided, all over IOB2 tag
//! sequences of equal length:
//!
//! * [`token_prf`] — micro-averaged over non-`O` token tags: precision is
//!   the fraction of predicted non-`O` tokens whose tag equals gold, recall
//!   the fraction of gold non-`O` tokens recovered exactly.
//! * [`span_exact_prf`] — a predicted span counts only if category and both
//!   borders match a gold span exactly.
//! * [`span_prop_prf`] — proportional credit: each predicted span earns its
//!   best same-category token overlap as a fraction of its own length
//!   (best match, not summed, so one long prediction cannot bank credit from
//!   several gold spans); recall mirrors this over gold spans. The measure is
//!   symmetric: precision(a, b) equals recall(b, a).
//!
//! Empty span sets yield zero components; an annotation with no spans scores
//! zero against one with spans, and two span-free annotations score zero
//! under the raw metrics. The reward layer treats the span-free-vs-span-free
//! case as perfect agreement instead — see [`annotation_f1`].
//!
//! Inter-annotator agreement uses Fleiss' kappa with token positions as
//! items and the full tag vocabulary (including `O`) as categories, so
//! agreement on the absence of spans counts as agreement:
//! `kappa = (P_bar - Pe_bar) / (1 - Pe_bar)`.

use serde::Serialize;
use thiserror::Error;

use crate::corpus::{spans_of, Span, Tag, TagSet};

/// Which precision/recall/F1 granularity to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    /// Per-token tag matching, micro-averaged over non-`O` tokens.
    Token,
    /// Exact span matching (category and both borders).
    SpanExact,
    /// Proportional span overlap.
    SpanProp,
}

/// Precision, recall, and their harmonic mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prf {
    /// Precision in `[0, 1]`.
    pub precision: f64,
    /// Recall in `[0, 1]`.
    pub recall: f64,
    /// `2PR / (P + R)`, or 0 when both components are 0.
    pub f1: f64,
}

impl Prf {
    /// Builds a result from precision and recall, deriving F1.
    #[must_use]
    pub fn from_pr(precision: f64, recall: f64) -> Prf {
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Prf {
            precision,
            recall,
            f1,
        }
    }

    /// The all-zero result.
    #[must_use]
    pub fn zero() -> Prf {
        Prf {
            precision: 0.0,
            recall: 0.0,
            f1: 0.0,
        }
    }
}

/// Errors from metric computations.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricError {
    /// Compared sequences must be token-aligned.
    #[error("annotation length mismatch: {pred} vs {gold} tokens")]
    LengthMismatch {
        /// Length of the predicted sequence.
        pred: usize,
        /// Length of the gold sequence.
        gold: usize,
    },
    /// Agreement needs at least two annotators.
    #[error("agreement needs at least 2 annotators, got {0}")]
    TooFewAnnotators(usize),
    /// Agreement over zero tokens is undefined.
    #[error("agreement over an empty sentence is undefined")]
    NoTokens,
}

/// Token-level PRF: micro counts over non-`O` positions.
pub fn token_prf(pred: &[Tag], gold: &[Tag]) -> Result<Prf, MetricError> {
    if pred.len() != gold.len() {
        return Err(MetricError::LengthMismatch {
            pred: pred.len(),
            gold: gold.len(),
        });
    }
    let pred_tagged = pred.iter().filter(|&&t| t != Tag::O).count();
    let gold_tagged = gold.iter().filter(|&&t| t != Tag::O).count();
    let matched = pred
        .iter()
        .zip(gold)
        .filter(|&(&p, &g)| p == g && p != Tag::O)
        .count();
    let precision = ratio(matched, pred_tagged);
    let recall = ratio(matched, gold_tagged);
    Ok(Prf::from_pr(precision, recall))
}

/// Exact-span PRF: a span matches only on identical category and borders.
#[must_use]
pub fn span_exact_prf(pred: &[Span], gold: &[Span]) -> Prf {
    let tp = pred.iter().filter(|p| gold.contains(p)).count();
    Prf::from_pr(ratio(tp, pred.len()), ratio(tp, gold.len()))
}

/// Proportional-span PRF: each span earns its best same-category overlap as
/// a fraction of its own length.
#[must_use]
pub fn span_prop_prf(pred: &[Span], gold: &[Span]) -> Prf {
    Prf::from_pr(prop_credit(pred, gold), prop_credit(gold, pred))
}

/// Mean fractional coverage of each `spans` element by its best
/// same-category counterpart in `against`; 0 for an empty `spans`.
fn prop_credit(spans: &[Span], against: &[Span]) -> f64 {
    if spans.is_empty() {
        return 0.0;
    }
    let total: f64 = spans
        .iter()
        .map(|s| {
            against
                .iter()
                .filter(|g| g.label == s.label)
                .map(|g| s.overlap(g) as f64 / s.len() as f64)
                .fold(0.0, f64::max)
        })
        .sum();
    total / spans.len() as f64
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Precision/recall/F1 between two token-aligned annotations under the
/// chosen granularity, with one reward-oriented refinement: when *neither*
/// annotation contains a span (both all-`O`), the result is a perfect score
/// — agreeing that a sentence has nothing to mark is perfect agreement, not
/// a vacuous zero.
pub fn annotation_prf(pred: &[Tag], gold: &[Tag], kind: MetricKind) -> Result<Prf, MetricError> {
    if pred.len() != gold.len() {
        return Err(MetricError::LengthMismatch {
            pred: pred.len(),
            gold: gold.len(),
        });
    }
    let pred_empty = pred.iter().all(|&t| t == Tag::O);
    let gold_empty = gold.iter().all(|&t| t == Tag::O);
    if pred_empty && gold_empty {
        return Ok(Prf {
            precision: 1.0,
            recall: 1.0,
            f1: 1.0,
        });
    }
    match kind {
        MetricKind::Token => token_prf(pred, gold),
        MetricKind::SpanExact => Ok(span_exact_prf(&spans_of(pred), &spans_of(gold))),
        MetricKind::SpanProp => Ok(span_prop_prf(&spans_of(pred), &spans_of(gold))),
    }
}

/// F1 of [`annotation_prf`].
pub fn annotation_f1(pred: &[Tag], gold: &[Tag], kind: MetricKind) -> Result<f64, MetricError> {
    Ok(annotation_prf(pred, gold, kind)?.f1)
}

/// Unweighted (macro) mean of PRF results: each component is averaged
/// separately, so every sentence counts equally regardless of length.
#[must_use]
pub fn mean_prf(items: &[Prf]) -> Prf {
    if items.is_empty() {
        return Prf::zero();
    }
    let n = items.len() as f64;
    Prf {
        precision: items.iter().map(|p| p.precision).sum::<f64>() / n,
        recall: items.iter().map(|p| p.recall).sum::<f64>() / n,
        f1: items.iter().map(|p| p.f1).sum::<f64>() / n,
    }
}

/// Fleiss' kappa over token positions, with the full tag vocabulary
/// (including `O`) as the category set.
///
/// All annotations must be token-aligned and there must be at least two of
/// them. When expected agreement is degenerate (`Pe_bar` within 1e-12 of 1,
/// i.e. all mass on a single category), kappa's denominator vanishes; the
/// convention here is 1.0 for perfect observed agreement and 0.0 otherwise.
pub fn fleiss_kappa(annotations: &[&[Tag]], tag_set: &TagSet) -> Result<f64, MetricError> {
    let k = annotations.len();
    if k < 2 {
        return Err(MetricError::TooFewAnnotators(k));
    }
    let len = annotations[0].len();
    if len == 0 {
        return Err(MetricError::NoTokens);
    }
    for row in annotations {
        if row.len() != len {
            return Err(MetricError::LengthMismatch {
                pred: row.len(),
                gold: len,
            });
        }
    }

    let vocab = tag_set.vocab_size();
    let kf = k as f64;
    let mut category_mass = vec![0u64; vocab];
    let mut observed_sum = 0.0;
    let mut counts = vec![0u64; vocab];
    for pos in 0..len {
        counts.iter_mut().for_each(|c| *c = 0);
        for row in annotations {
            counts[tag_set.vocab_index(row[pos])] += 1;
        }
        let pairs: u64 = counts.iter().map(|&c| c * c).sum::<u64>() - k as u64;
        observed_sum += pairs as f64 / (kf * (kf - 1.0));
        for (mass, &c) in category_mass.iter_mut().zip(&counts) {
            *mass += c;
        }
    }
    let p_bar = observed_sum / len as f64;
    let total = (len * k) as f64;
    let pe_bar: f64 = category_mass
        .iter()
        .map(|&m| {
            let p = m as f64 / total;
            p * p
        })
        .sum();

    if 1.0 - pe_bar <= 1e-12 {
        // Everyone used one single category throughout; observed agreement
        // decides between perfect (1) and the conventional 0.
        return Ok(if 1.0 - p_bar <= 1e-12 { 1.0 } else { 0.0 });
    }
    Ok((p_bar - pe_bar) / (1.0 - pe_bar))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{LabelId, TagSet};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tag_set() -> TagSet {
        TagSet::new(["NEG", "POS"]).unwrap()
    }

    fn tags(ts: &TagSet, text: &str) -> Vec<Tag> {
        text.split_whitespace()
            .map(|t| ts.parse_tag(t).expect("tag in vocabulary"))
            .collect()
    }

    #[test]
    fn token_prf_identical_is_perfect() {
        let ts = tag_set();
        let a = tags(&ts, "O B-NEG I-NEG O");
        let prf = token_prf(&a, &a).unwrap();
        assert_eq!((prf.precision, prf.recall, prf.f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn token_prf_counts_non_o_matches_only() {
        let ts = tag_set();
        // Prediction tags one of the two gold span tokens and adds a
        // spurious tag elsewhere: one match out of two tagged on each side.
        let pred = tags(&ts, "B-NEG O O B-POS");
        let gold = tags(&ts, "B-NEG I-NEG O O");
        let prf = token_prf(&pred, &gold).unwrap();
        assert_abs_diff_eq!(prf.precision, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(prf.recall, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(prf.f1, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn token_prf_b_vs_i_do_not_match() {
        let ts = tag_set();
        let pred = tags(&ts, "O I-NEG"); // invalid IOB2 is fine for metrics
        let gold = tags(&ts, "O B-NEG");
        let prf = token_prf(&pred, &gold).unwrap();
        assert_eq!(prf.f1, 0.0);
    }

    #[test]
    fn token_prf_empty_prediction_scores_zero() {
        let ts = tag_set();
        let pred = tags(&ts, "O O");
        let gold = tags(&ts, "B-NEG O");
        let prf = token_prf(&pred, &gold).unwrap();
        assert_eq!((prf.precision, prf.recall, prf.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn token_prf_rejects_mismatched_lengths() {
        let ts = tag_set();
        let err = token_prf(&tags(&ts, "O"), &tags(&ts, "O O")).unwrap_err();
        assert_eq!(err, MetricError::LengthMismatch { pred: 1, gold: 2 });
    }

    #[test]
    fn exact_span_requires_identical_borders_and_category() {
        let gold = vec![Span::new(LabelId(0), 3, 5)];
        assert_eq!(span_exact_prf(&gold, &gold).f1, 1.0);
        // Off by one token: no credit at all.
        let shifted = vec![Span::new(LabelId(0), 4, 6)];
        assert_eq!(span_exact_prf(&shifted, &gold).f1, 0.0);
        // Right borders, wrong category.
        let relabeled = vec![Span::new(LabelId(1), 3, 5)];
        assert_eq!(span_exact_prf(&relabeled, &gold).f1, 0.0);
    }

    #[test]
    fn prop_span_gives_fractional_credit() {
        let gold = vec![Span::new(LabelId(0), 3, 5)];
        let shifted = vec![Span::new(LabelId(0), 4, 6)];
        // One of two tokens overlaps, on both sides.
        let prf = span_prop_prf(&shifted, &gold);
        assert_abs_diff_eq!(prf.precision, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(prf.recall, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(prf.f1, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn prop_span_ignores_cross_category_overlap() {
        let gold = vec![Span::new(LabelId(0), 3, 5)];
        let pred = vec![Span::new(LabelId(1), 3, 5)];
        assert_eq!(span_prop_prf(&pred, &gold).f1, 0.0);
    }

    #[test]
    fn prop_span_takes_best_match_not_sum() {
        // One long prediction covering two gold spans of the same category:
        // precision credit is the best single overlap (2/6), not 4/6.
        let gold = vec![Span::new(LabelId(0), 0, 2), Span::new(LabelId(0), 4, 6)];
        let pred = vec![Span::new(LabelId(0), 0, 6)];
        let prf = span_prop_prf(&pred, &gold);
        assert_abs_diff_eq!(prf.precision, 2.0 / 6.0, epsilon = 1e-12);
        // Each gold span is fully covered, so recall is 1.
        assert_abs_diff_eq!(prf.recall, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn prop_span_shift_by_d_scores_l_minus_d_over_l() {
        let l = 4usize;
        let gold = vec![Span::new(LabelId(0), 10, 10 + l)];
        for d in 0..=l {
            let pred = vec![Span::new(LabelId(0), 10 + d, 10 + d + l)];
            let expected = (l - d) as f64 / l as f64;
            assert_abs_diff_eq!(
                span_prop_prf(&pred, &gold).precision,
                expected,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn empty_span_sets_score_zero_under_raw_metrics() {
        assert_eq!(span_prop_prf(&[], &[]).f1, 0.0);
        assert_eq!(span_exact_prf(&[], &[]).f1, 0.0);
        let gold = vec![Span::new(LabelId(0), 0, 1)];
        assert_eq!(span_prop_prf(&[], &gold).f1, 0.0);
        assert_eq!(span_prop_prf(&gold, &[]).f1, 0.0);
    }

    #[test]
    fn annotation_f1_treats_mutual_absence_as_perfect() {
        let ts = tag_set();
        let empty = tags(&ts, "O O O");
        for kind in [
            MetricKind::Token,
            MetricKind::SpanExact,
            MetricKind::SpanProp,
        ] {
            assert_eq!(annotation_f1(&empty, &empty, kind).unwrap(), 1.0);
        }
        // One-sided absence is still zero.
        let spanful = tags(&ts, "B-NEG O O");
        assert_eq!(
            annotation_f1(&empty, &spanful, MetricKind::SpanProp).unwrap(),
            0.0
        );
    }

    #[test]
    fn kappa_of_identical_annotations_is_one() {
        let ts = tag_set();
        let a = tags(&ts, "O B-NEG I-NEG O");
        let rows: Vec<&[Tag]> = vec![&a, &a, &a];
        assert_abs_diff_eq!(fleiss_kappa(&rows, &ts).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn kappa_hand_computed_two_annotator_case() {
        // A: O O O, B: O O B-NEG over a 3-tag vocabulary {O, B-NEG, I-NEG}.
        // Observed: two unanimous tokens, one split -> P_bar = 2/3.
        // Expected: p_O = 5/6, p_B = 1/6 -> Pe_bar = 26/36 = 13/18.
        // kappa = (2/3 - 13/18) / (1 - 13/18) = -0.2.
        let ts = TagSet::new(["NEG"]).unwrap();
        let a = tags(&ts, "O O O");
        let b = tags(&ts, "O O B-NEG");
        let rows: Vec<&[Tag]> = vec![&a, &b];
        assert_abs_diff_eq!(fleiss_kappa(&rows, &ts).unwrap(), -0.2, epsilon = 1e-12);
    }

    #[test]
    fn kappa_degenerate_unanimous_o_is_one() {
        let ts = tag_set();
        let a = tags(&ts, "O O O O");
        let rows: Vec<&[Tag]> = vec![&a, &a];
        assert_eq!(fleiss_kappa(&rows, &ts).unwrap(), 1.0);
    }

    #[test]
    fn kappa_near_zero_for_independent_uniform_annotators() {
        let ts = TagSet::new(["NEG"]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let len = 2000;
        let draw = |rng: &mut ChaCha8Rng| -> Vec<Tag> {
            (0..len)
                .map(|_| ts.tag_at(rng.random_range(0..ts.vocab_size())))
                .collect()
        };
        let a = draw(&mut rng);
        let b = draw(&mut rng);
        let rows: Vec<&[Tag]> = vec![&a, &b];
        let kappa = fleiss_kappa(&rows, &ts).unwrap();
        assert!(
            kappa.abs() < 0.05,
            "independent annotators: kappa = {kappa}"
        );
    }

    #[test]
    fn kappa_requires_two_annotators_and_tokens() {
        let ts = tag_set();
        let a = tags(&ts, "O");
        let one: Vec<&[Tag]> = vec![&a];
        assert_eq!(
            fleiss_kappa(&one, &ts).unwrap_err(),
            MetricError::TooFewAnnotators(1)
        );
        let empty_rows: Vec<&[Tag]> = vec![&[], &[]];
        assert_eq!(
            fleiss_kappa(&empty_rows, &ts).unwrap_err(),
            MetricError::NoTokens
        );
    }

    #[test]
    fn mean_prf_averages_components_unweighted() {
        let items = [Prf::from_pr(1.0, 1.0), Prf::from_pr(0.0, 0.0)];
        let mean = mean_prf(&items);
        assert_abs_diff_eq!(mean.precision, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(mean.f1, 0.5, epsilon = 1e-12);
    }
}
