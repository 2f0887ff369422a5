//! Corpus augmentation: filling in missing worker annotations without
//! disturbing each worker's observed quality.
//!
//! Crowd corpora are sparse — most workers annotate a small share of the
//! sentences — but selection simulations need any worker to be assignable to
//! any sentence. This module synthesizes the missing annotations in three
//! steps:
//!
//! 1. **Candidate spans** ([`ses_candidates`]): every expert span generates
//!    plausible single-span edits — the unmodified span, shifts of the whole
//!    span, expansions of one border, and shrinks of one border down to the
//!    empty span. Edits walk outward one token at a time and stop as soon as
//!    a shift loses all overlap with the source span or a border reaches the
//!    sentence edge or an adjacent expert span; the terminal candidate is
//!    kept. This bounds each span's candidate list while still covering the
//!    full quality range.
//! 2. **Candidate annotations** ([`enumerate_sentence_candidates`]): the
//!    per-span lists combine into whole-sentence annotations, each scored by
//!    F1 against the expert annotation. Same-category collisions merge into
//!    the union span; cross-category collisions discard the combination
//!    (they would fabricate an overlap structure no single annotator
//!    produces). Oversized candidate pools are first sampled uniformly, then
//!    reduced to the cap by stratified sampling across F1 deciles so the
//!    kept pool still spans the quality range; the exact expert annotation
//!    and the span-free annotation always survive.
//! 3. **Quality-targeted selection** ([`select_annotation`]): a worker's
//!    known annotations fix a quality target `phi_bar` (their mean F1).
//!    Selection tracks the running mean `phi_hat` of what has been generated
//!    so far and, for each new sentence, picks the candidate closest to
//!    `phi_bar` from above when `phi_hat <= phi_bar` and from below when
//!    `phi_hat > phi_bar`. The alternation keeps the running mean within one
//!    candidate step of the target, so a worker's post-fill mean F1 drifts
//!    from `phi_bar` by at most `1/M` over `M` sentences.
//!
//! [`augment_corpus`] runs the pipeline for every worker. Two degraded fill
//! strategies exist for comparison: uniform draws from the candidate pools
//! (no targeting) and fully random span placement (no pools at all).

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::corpus::{spans_of, tags_of, Corpus, LabelId, Span, Tag, TagSet, WorkerId};
use crate::metrics::{annotation_f1, MetricError, MetricKind};

/// How many candidate combinations may be materialized before scoring, as a
/// multiple of the pool cap. Keeps enumeration bounded on span-rich
/// sentences while leaving the stratified cap plenty to choose from.
const ENUM_BUDGET_FACTOR: usize = 20;

/// Stream id for the fill-phase generator, chosen above the `u32` sentence
/// id range so per-sentence pool streams can never collide with it.
const FILL_STREAM: u64 = 1 << 40;

/// The kind of single-span edit that produced a candidate span.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModKind {
    /// Both borders moved by the same amount.
    Shift,
    /// One border moved outward, the other fixed.
    Expand,
    /// One border moved inward, the other fixed.
    Shrink,
}

/// Which border moved (for shifts: the direction of travel).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Leftward shift, left-border expand, or left-border shrink.
    Left,
    /// Rightward shift, right-border expand, or right-border shrink.
    Right,
}

/// Provenance of a candidate span: which edit, applied to which expert span,
/// in which direction, by how many tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Modification {
    /// The edit family.
    pub kind: ModKind,
    /// Index of the source span in the sentence's expert span list.
    pub span_index: usize,
    /// Which border moved / which way the span travelled.
    pub direction: Direction,
    /// Number of tokens moved, always at least 1.
    pub steps: usize,
}

/// One candidate replacement for a single expert span.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SpanCandidate {
    /// The resulting span, or `None` when the span was shrunk away entirely.
    pub span: Option<Span>,
    /// The edit that produced it; `None` for the unmodified span.
    pub modification: Option<Modification>,
}

/// A whole-sentence candidate annotation with its score against the expert.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateAnnotation {
    /// Token-aligned IOB2 tags.
    pub tags: Vec<Tag>,
    /// F1 against the expert annotation under the pool's metric.
    pub f1: f64,
}

/// Per-worker quality-targeting state during augmentation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorkerTarget {
    /// The worker being modeled.
    pub worker_id: WorkerId,
    /// Target quality: the worker's mean F1 over their real annotations.
    pub phi_bar: f64,
    /// Running mean F1 of the annotations selected so far (0 until the
    /// first selection).
    pub phi_hat: f64,
    /// Number of annotations selected so far.
    pub n_selected: usize,
}

impl WorkerTarget {
    /// Starts targeting `phi_bar` for a worker with nothing selected yet.
    #[must_use]
    pub fn new(worker_id: WorkerId, phi_bar: f64) -> WorkerTarget {
        WorkerTarget {
            worker_id,
            phi_bar,
            phi_hat: 0.0,
            n_selected: 0,
        }
    }

    /// Folds a selected annotation's F1 into the running mean.
    pub fn record(&mut self, f1: f64) {
        self.n_selected += 1;
        self.phi_hat += (f1 - self.phi_hat) / self.n_selected as f64;
    }
}

/// How missing annotations are filled in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FillStrategy {
    /// Quality-targeted selection from candidate pools (the real method).
    Targeted,
    /// Uniform draws from the same candidate pools, no quality targeting.
    SesOnly,
    /// Random valid span placement, no pools at all.
    Random,
}

/// Post-fill quality accounting for one worker.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorkerFidelity {
    /// The worker.
    pub worker_id: WorkerId,
    /// Mean F1 of the worker's real annotations (the target).
    pub phi_bar: f64,
    /// Mean F1 over all of the worker's annotations after filling.
    pub phi_after: f64,
}

impl WorkerFidelity {
    /// Absolute drift introduced by the fill: `|phi_after - phi_bar|`.
    #[must_use]
    pub fn abs_delta(&self) -> f64 {
        (self.phi_after - self.phi_bar).abs()
    }
}

/// An augmented corpus plus the per-worker fidelity report.
#[derive(Debug, Clone)]
pub struct AugmentResult {
    /// The input corpus with every missing (worker, sentence) pair filled.
    pub corpus: Corpus,
    /// Per-worker drift between target and post-fill quality, ascending by
    /// worker id.
    pub fidelity: Vec<WorkerFidelity>,
}

/// Errors from augmentation.
#[derive(Debug, Error, PartialEq)]
pub enum AugmentError {
    /// Quality targets come from real annotations; a worker without any has
    /// no defined target.
    #[error(
        "worker {0} has no annotations in the source corpus; their quality target is undefined"
    )]
    WorkerWithoutAnnotations(WorkerId),
    /// A corpus without workers has nothing to fill.
    #[error("corpus has no crowd workers to augment")]
    NoWorkers,
    /// Selection from an empty candidate pool.
    #[error("candidate pool is empty")]
    EmptyPool,
    /// Token-alignment failure while scoring (corrupt corpus).
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Generates the single-span candidate list for every expert span of a
/// sentence.
///
/// `expert_spans` must be sorted by position and non-overlapping (anything
/// produced by [`spans_of`] qualifies). For each span the edits walk outward
/// one token at a time:
///
/// * **Shift** moves both borders. Walking stops — keeping the terminal
///   candidate — at the first shift with no overlap left (a shift of the
///   span's full length) or when the leading border reaches the sentence
///   edge or an adjacent span.
/// * **Expand** moves one border outward up to the sentence edge or an
///   adjacent span, the candidate at the limit included.
/// * **Shrink** moves one border inward; the final shrink step erases the
///   span and contributes the empty candidate (once per span).
///
/// Candidates keep the source span's category and are deduplicated within
/// each list (first occurrence wins), so a length-1 span contributes exactly
/// one empty candidate from its two shrink directions.
#[must_use]
pub fn ses_candidates(expert_spans: &[Span], sentence_len: usize) -> Vec<Vec<SpanCandidate>> {
    let n = expert_spans.len();
    let mut lists = Vec::with_capacity(n);
    for (i, span) in expert_spans.iter().enumerate() {
        debug_assert!(span.end <= sentence_len, "span outside the sentence");
        debug_assert!(
            i == 0 || expert_spans[i - 1].end <= span.start,
            "spans must be sorted and disjoint"
        );
        let left_limit = if i > 0 { expert_spans[i - 1].end } else { 0 };
        let right_limit = if i + 1 < n {
            expert_spans[i + 1].start
        } else {
            sentence_len
        };
        lists.push(span_candidates(*span, i, left_limit, right_limit));
    }
    lists
}

/// Candidate list for one span boxed in by `[left_limit, right_limit)`.
fn span_candidates(
    span: Span,
    span_index: usize,
    left_limit: usize,
    right_limit: usize,
) -> Vec<SpanCandidate> {
    let len = span.len();
    let label = span.label;
    let mut out: Vec<SpanCandidate> = Vec::new();
    let mut seen: Vec<Option<Span>> = Vec::new();
    let push = |out: &mut Vec<SpanCandidate>,
                seen: &mut Vec<Option<Span>>,
                span: Option<Span>,
                modification: Option<Modification>| {
        if !seen.contains(&span) {
            seen.push(span);
            out.push(SpanCandidate { span, modification });
        }
    };
    let edit = |kind, direction, steps| {
        Some(Modification {
            kind,
            span_index,
            direction,
            steps,
        })
    };

    push(&mut out, &mut seen, Some(span), None);

    // Shifts: stop (inclusive) at loss of overlap or at a border limit.
    for d in 1..=span.start - left_limit {
        let moved = Span::new(label, span.start - d, span.end - d);
        push(
            &mut out,
            &mut seen,
            Some(moved),
            edit(ModKind::Shift, Direction::Left, d),
        );
        if d >= len || moved.start == left_limit {
            break;
        }
    }
    for d in 1..=right_limit - span.end {
        let moved = Span::new(label, span.start + d, span.end + d);
        push(
            &mut out,
            &mut seen,
            Some(moved),
            edit(ModKind::Shift, Direction::Right, d),
        );
        if d >= len || moved.end == right_limit {
            break;
        }
    }

    // Expansions: one border fixed, the other walks to its limit.
    for d in 1..=span.start - left_limit {
        let grown = Span::new(label, span.start - d, span.end);
        push(
            &mut out,
            &mut seen,
            Some(grown),
            edit(ModKind::Expand, Direction::Left, d),
        );
    }
    for d in 1..=right_limit - span.end {
        let grown = Span::new(label, span.start, span.end + d);
        push(
            &mut out,
            &mut seen,
            Some(grown),
            edit(ModKind::Expand, Direction::Right, d),
        );
    }

    // Shrinks: one border walks inward; the last step erases the span.
    for d in 1..len {
        let cut = Span::new(label, span.start + d, span.end);
        push(
            &mut out,
            &mut seen,
            Some(cut),
            edit(ModKind::Shrink, Direction::Left, d),
        );
    }
    push(
        &mut out,
        &mut seen,
        None,
        edit(ModKind::Shrink, Direction::Left, len),
    );
    for d in 1..len {
        let cut = Span::new(label, span.start, span.end - d);
        push(
            &mut out,
            &mut seen,
            Some(cut),
            edit(ModKind::Shrink, Direction::Right, d),
        );
    }
    push(
        &mut out,
        &mut seen,
        None,
        edit(ModKind::Shrink, Direction::Right, len),
    );

    out
}

/// Enumerates scored whole-sentence candidate annotations for a sentence
/// with the given expert tags.
///
/// Per-span candidate lists are combined into full annotations. When the
/// raw product exceeds a budget of `ENUM_BUDGET_FACTOR * cap`, combinations
/// are drawn uniformly at random instead of exhaustively; the all-unmodified
/// and all-erased combinations are always included. Combinations whose
/// chosen spans collide are merged (same category) or dropped (different
/// categories), results are deduplicated by tag sequence and scored with
/// `metric` against the expert annotation, and pools larger than `cap` are
/// reduced by stratified sampling over F1 deciles (the exact expert
/// annotation and the span-free annotation are always retained). The
/// returned pool is sorted by ascending F1 and never empty.
///
/// A sentence whose expert annotation has no spans admits exactly one
/// candidate — the span-free annotation — scored 1.0, since reproducing an
/// empty gold annotation is exact agreement.
pub fn enumerate_sentence_candidates(
    expert: &[Tag],
    metric: MetricKind,
    cap: usize,
    rng: &mut impl Rng,
) -> Result<Vec<CandidateAnnotation>, AugmentError> {
    let len = expert.len();
    let expert_spans = spans_of(expert);
    if expert_spans.is_empty() {
        return Ok(vec![CandidateAnnotation {
            tags: vec![Tag::O; len],
            f1: 1.0,
        }]);
    }
    let cap = cap.max(2);
    let lists = ses_candidates(&expert_spans, len);
    let sizes: Vec<usize> = lists.iter().map(Vec::len).collect();
    let product = sizes
        .iter()
        .try_fold(1u128, |acc, &s| acc.checked_mul(s as u128))
        .unwrap_or(u128::MAX);
    let budget = (cap * ENUM_BUDGET_FACTOR) as u128;

    let mut tags_seen: HashSet<Vec<Tag>> = HashSet::new();
    let mut pool: Vec<CandidateAnnotation> = Vec::new();
    let admit = |tags: Option<Vec<Tag>>,
                 pool: &mut Vec<CandidateAnnotation>,
                 tags_seen: &mut HashSet<Vec<Tag>>|
     -> Result<(), AugmentError> {
        if let Some(tags) = tags {
            if !tags_seen.contains(&tags) {
                let f1 = annotation_f1(&tags, expert, metric)?;
                tags_seen.insert(tags.clone());
                pool.push(CandidateAnnotation { tags, f1 });
            }
        }
        Ok(())
    };

    if product <= budget {
        let mut tuple = vec![0usize; sizes.len()];
        loop {
            admit(combine(&lists, &tuple, len), &mut pool, &mut tags_seen)?;
            let mut pos = 0;
            loop {
                tuple[pos] += 1;
                if tuple[pos] < sizes[pos] {
                    break;
                }
                tuple[pos] = 0;
                pos += 1;
                if pos == sizes.len() {
                    return Ok(finish_pool(pool, cap, expert, rng));
                }
            }
        }
    }

    // Sampled mode: anchor the quality extremes, then draw uniformly.
    let unmodified = vec![0usize; sizes.len()];
    admit(combine(&lists, &unmodified, len), &mut pool, &mut tags_seen)?;
    let erased: Vec<usize> = lists
        .iter()
        .map(|list| {
            list.iter()
                .position(|c| c.span.is_none())
                .expect("shrink always yields an empty candidate")
        })
        .collect();
    admit(combine(&lists, &erased, len), &mut pool, &mut tags_seen)?;
    let draws = budget as usize - 2;
    let mut tuple = vec![0usize; sizes.len()];
    for _ in 0..draws {
        for (slot, &size) in tuple.iter_mut().zip(&sizes) {
            *slot = rng.random_range(0..size);
        }
        admit(combine(&lists, &tuple, len), &mut pool, &mut tags_seen)?;
    }
    Ok(finish_pool(pool, cap, expert, rng))
}

/// Realizes one combination of per-span candidates as a tag sequence, or
/// `None` when differently-labeled choices collide.
fn combine(lists: &[Vec<SpanCandidate>], tuple: &[usize], len: usize) -> Option<Vec<Tag>> {
    let mut spans: Vec<Span> = tuple
        .iter()
        .enumerate()
        .filter_map(|(i, &j)| lists[i][j].span)
        .collect();
    spans.sort_by_key(|s| (s.start, s.end));
    let mut merged: Vec<Span> = Vec::with_capacity(spans.len());
    for span in spans {
        if let Some(last) = merged.last_mut() {
            if span.start < last.end {
                if span.label != last.label {
                    return None;
                }
                last.end = last.end.max(span.end);
                continue;
            }
        }
        merged.push(span);
    }
    Some(tags_of(&merged, len))
}

/// Applies the pool cap (stratified by F1 decile, anchors retained) and
/// sorts by ascending F1.
fn finish_pool(
    mut pool: Vec<CandidateAnnotation>,
    cap: usize,
    expert: &[Tag],
    rng: &mut impl Rng,
) -> Vec<CandidateAnnotation> {
    if pool.len() > cap {
        let span_free = vec![Tag::O; expert.len()];
        let mut anchors: Vec<CandidateAnnotation> = Vec::with_capacity(2);
        let mut rest: Vec<CandidateAnnotation> = Vec::with_capacity(pool.len());
        for candidate in pool {
            if candidate.tags == expert || candidate.tags == span_free {
                anchors.push(candidate);
            } else {
                rest.push(candidate);
            }
        }
        let mut buckets: Vec<Vec<CandidateAnnotation>> = (0..10).map(|_| Vec::new()).collect();
        for candidate in rest {
            let decile = ((candidate.f1 * 10.0) as usize).min(9);
            buckets[decile].push(candidate);
        }
        for bucket in &mut buckets {
            bucket.shuffle(rng);
        }
        let mut kept = anchors;
        'fill: while kept.len() < cap {
            let mut progressed = false;
            for bucket in &mut buckets {
                if kept.len() >= cap {
                    break 'fill;
                }
                if let Some(candidate) = bucket.pop() {
                    kept.push(candidate);
                    progressed = true;
                }
            }
            if !progressed {
                break;
            }
        }
        pool = kept;
    }
    pool.sort_by(|a, b| a.f1.partial_cmp(&b.f1).expect("F1 is never NaN"));
    pool
}

/// The candidate whose F1 is closest to `phi_bar`, breaking distance ties
/// toward the lower F1: the first annotation anchors the running mean, and
/// undershooting is recoverable from both sides while overshooting against a
/// sparse pool is not.
#[must_use]
pub fn initial_annotation(
    candidates: &[CandidateAnnotation],
    phi_bar: f64,
) -> Option<&CandidateAnnotation> {
    candidates.iter().min_by(|a, b| {
        let da = (a.f1 - phi_bar).abs();
        let db = (b.f1 - phi_bar).abs();
        da.partial_cmp(&db)
            .expect("F1 is never NaN")
            .then(a.f1.partial_cmp(&b.f1).expect("F1 is never NaN"))
    })
}

/// Selects the next annotation for a worker and folds it into the target's
/// running mean.
///
/// The first selection uses [`initial_annotation`]. Afterwards the rule is a
/// thermostat around `phi_bar`: find the closest candidate at or below the
/// target and the closest at or above it (a candidate exactly on target
/// serves as both); take the below-candidate when the running mean
/// overshoots (`phi_hat > phi_bar`), the above-candidate otherwise, and fall
/// back to the only populated side when the pool lies entirely on one side
/// of the target.
pub fn select_annotation<'a>(
    target: &mut WorkerTarget,
    candidates: &'a [CandidateAnnotation],
) -> Result<&'a CandidateAnnotation, AugmentError> {
    if candidates.is_empty() {
        return Err(AugmentError::EmptyPool);
    }
    let chosen = if target.n_selected == 0 {
        initial_annotation(candidates, target.phi_bar).expect("pool is non-empty")
    } else {
        let mut below: Option<&CandidateAnnotation> = None;
        let mut above: Option<&CandidateAnnotation> = None;
        for candidate in candidates {
            if candidate.f1 <= target.phi_bar && below.is_none_or(|b| candidate.f1 > b.f1) {
                below = Some(candidate);
            }
            if candidate.f1 >= target.phi_bar && above.is_none_or(|a| candidate.f1 < a.f1) {
                above = Some(candidate);
            }
        }
        let side = if target.phi_hat > target.phi_bar {
            below.or(above)
        } else {
            above.or(below)
        };
        side.expect("a non-empty pool always has a side")
    };
    target.record(chosen.f1);
    Ok(chosen)
}

/// Fills every missing (worker, sentence) annotation in the corpus.
///
/// Each worker's quality target is the mean F1 of their real annotations
/// under `metric` (a worker with no annotations is an error — there is
/// nothing to target). Candidate pools are enumerated per sentence (in
/// parallel; each sentence's pool derives from `seed` and the sentence id,
/// so results are independent of thread scheduling) and workers are filled
/// in ascending worker id, visiting sentences in ascending sentence id.
/// Real annotations are never modified.
///
/// The returned fidelity report compares each worker's target against their
/// post-fill mean F1 over all sentences.
pub fn augment_corpus(
    corpus: &Corpus,
    metric: MetricKind,
    cap: usize,
    seed: u64,
    strategy: FillStrategy,
) -> Result<AugmentResult, AugmentError> {
    let workers = corpus.workers();
    if workers.is_empty() {
        return Err(AugmentError::NoWorkers);
    }

    // Quality targets from real annotations only.
    let mut real_sum = vec![0.0f64; workers.len()];
    let mut real_count = vec![0usize; workers.len()];
    let worker_slot = |id: WorkerId| workers.binary_search(&id).expect("worker listed");
    for sentence in &corpus.sentences {
        for (worker, tags) in &sentence.crowd {
            let f1 = annotation_f1(tags, &sentence.expert, metric)?;
            let slot = worker_slot(*worker);
            real_sum[slot] += f1;
            real_count[slot] += 1;
        }
    }
    for (slot, &count) in real_count.iter().enumerate() {
        if count == 0 {
            return Err(AugmentError::WorkerWithoutAnnotations(workers[slot]));
        }
    }
    let phi_bar: Vec<f64> = real_sum
        .iter()
        .zip(&real_count)
        .map(|(&sum, &count)| sum / count as f64)
        .collect();

    // Sentence visit order: ascending id.
    let mut order: Vec<usize> = (0..corpus.sentences.len()).collect();
    order.sort_by_key(|&i| corpus.sentences[i].id);

    // Candidate pools, one per sentence that needs filling.
    let needs_pool = strategy != FillStrategy::Random;
    let pools: Result<Vec<Option<Vec<CandidateAnnotation>>>, AugmentError> = corpus
        .sentences
        .par_iter()
        .map(|sentence| {
            if !needs_pool || sentence.crowd.len() == workers.len() {
                return Ok(None);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(u64::from(sentence.id.0));
            enumerate_sentence_candidates(&sentence.expert, metric, cap, &mut rng).map(Some)
        })
        .collect();
    let pools = pools?;

    let mut filled = corpus.clone();
    let mut fill_rng = ChaCha8Rng::seed_from_u64(seed);
    fill_rng.set_stream(FILL_STREAM);
    let mut fidelity = Vec::with_capacity(workers.len());

    for (slot, &worker) in workers.iter().enumerate() {
        let mut target = WorkerTarget::new(worker, phi_bar[slot]);
        let mut generated_sum = 0.0f64;
        for &idx in &order {
            if corpus.sentences[idx].crowd.contains_key(&worker) {
                continue;
            }
            let expert = &corpus.sentences[idx].expert;
            let (tags, f1) = match strategy {
                FillStrategy::Targeted => {
                    let pool = pools[idx]
                        .as_deref()
                        .expect("pool built for unfilled sentence");
                    let chosen = select_annotation(&mut target, pool)?;
                    (chosen.tags.clone(), chosen.f1)
                }
                FillStrategy::SesOnly => {
                    let pool = pools[idx]
                        .as_deref()
                        .expect("pool built for unfilled sentence");
                    let chosen = &pool[fill_rng.random_range(0..pool.len())];
                    (chosen.tags.clone(), chosen.f1)
                }
                FillStrategy::Random => {
                    let tags = random_annotation(expert.len(), &corpus.tag_set, &mut fill_rng);
                    let f1 = annotation_f1(&tags, expert, metric)?;
                    (tags, f1)
                }
            };
            generated_sum += f1;
            filled.sentences[idx].crowd.insert(worker, tags);
        }
        let phi_after = (real_sum[slot] + generated_sum) / corpus.sentences.len() as f64;
        fidelity.push(WorkerFidelity {
            worker_id: worker,
            phi_bar: phi_bar[slot],
            phi_after,
        });
    }

    Ok(AugmentResult {
        corpus: filled,
        fidelity,
    })
}

/// A random valid annotation: up to three random non-overlapping spans of
/// one to three tokens (overlapping draws are simply dropped).
fn random_annotation(len: usize, tag_set: &TagSet, rng: &mut impl Rng) -> Vec<Tag> {
    let mut spans: Vec<Span> = Vec::new();
    if len > 0 {
        let attempts = rng.random_range(0..=3usize);
        for _ in 0..attempts {
            let span_len = rng.random_range(1..=3usize.min(len));
            let start = rng.random_range(0..=len - span_len);
            let label = LabelId(rng.random_range(0..tag_set.n_labels()) as u16);
            let candidate = Span::new(label, start, start + span_len);
            if spans.iter().all(|s| s.overlap(&candidate) == 0) {
                spans.push(candidate);
            }
        }
    }
    spans.sort_by_key(|s| s.start);
    tags_of(&spans, len)
}
