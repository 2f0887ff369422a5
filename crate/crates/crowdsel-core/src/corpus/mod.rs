//! Corpus data model: tag sets, IOB2 tag sequences, spans, sentences, and
//! whole corpora with per-worker crowd annotations.
//!
//! Tags follow the IOB2 convention: `O` for outside, `B-<label>` to open a
//! span, `I-<label>` to continue the span opened immediately before it. A
//! span is a maximal `B-X I-X ... I-X` run and is represented half-open as
//! `[start, end)` over token positions.

mod parse;
mod stats;

pub use parse::{infer_tag_set, parse_corpus, serialize_corpus, ParseError};
pub use stats::{compute_stats, CorpusStats, CountSummary, StatsError};

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index of a span category (label) within a [`TagSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LabelId(pub u16);

/// Identifier of a sentence within a corpus, as given in the source file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SentenceId(pub u32);

/// Identifier of a crowd worker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WorkerId(pub u32);

impl fmt::Display for SentenceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Display for WorkerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// One IOB2 token tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Tag {
    /// Outside any span.
    O,
    /// Beginning of a span with the given label.
    B(LabelId),
    /// Continuation of a span with the given label.
    I(LabelId),
}

impl Tag {
    /// The label carried by a `B`/`I` tag, or `None` for `O`.
    #[must_use]
    pub fn label(self) -> Option<LabelId> {
        match self {
            Tag::O => None,
            Tag::B(l) | Tag::I(l) => Some(l),
        }
    }
}

/// Errors constructing a [`TagSet`].
#[derive(Debug, Error, PartialEq, Eq)]
pub enum TagSetError {
    /// A tag set needs at least one span label.
    #[error("tag set needs at least one span label")]
    Empty,
    /// Labels must be unique.
    #[error("duplicate label `{0}`")]
    Duplicate(String),
    /// `O` is reserved for the outside tag and labels may not contain
    /// whitespace (they appear as whitespace-separated fields on disk).
    #[error("invalid label `{0}`: must be non-empty, not `O`, and contain no whitespace")]
    Invalid(String),
}

/// The closed tag vocabulary of a corpus: `O` plus `B-`/`I-` variants of each
/// span label.
///
/// Labels have a fixed order (their position in the constructing list), which
/// induces a canonical vocabulary order `O, B-l0, I-l0, B-l1, I-l1, ...` used
/// wherever deterministic tie-breaking over tags is required.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagSet {
    labels: Vec<String>,
}

impl TagSet {
    /// Builds a tag set from span labels (category names).
    pub fn new<I, S>(labels: I) -> Result<TagSet, TagSetError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(TagSetError::Empty);
        }
        for (i, label) in labels.iter().enumerate() {
            if label.is_empty() || label == "O" || label.chars().any(char::is_whitespace) {
                return Err(TagSetError::Invalid(label.clone()));
            }
            if labels[..i].contains(label) {
                return Err(TagSetError::Duplicate(label.clone()));
            }
        }
        Ok(TagSet { labels })
    }

    /// The span labels, in canonical order.
    #[must_use]
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Number of span labels.
    #[must_use]
    pub fn n_labels(&self) -> usize {
        self.labels.len()
    }

    /// Size of the full tag vocabulary: `O` plus `B`/`I` per label.
    #[must_use]
    pub fn vocab_size(&self) -> usize {
        1 + 2 * self.labels.len()
    }

    /// Position of a tag in the canonical vocabulary order
    /// `O, B-l0, I-l0, B-l1, I-l1, ...`.
    #[must_use]
    pub fn vocab_index(&self, tag: Tag) -> usize {
        match tag {
            Tag::O => 0,
            Tag::B(LabelId(l)) => 1 + 2 * l as usize,
            Tag::I(LabelId(l)) => 2 + 2 * l as usize,
        }
    }

    /// Inverse of [`TagSet::vocab_index`].
    #[must_use]
    pub fn tag_at(&self, vocab_index: usize) -> Tag {
        debug_assert!(vocab_index < self.vocab_size());
        if vocab_index == 0 {
            Tag::O
        } else {
            let l = LabelId(((vocab_index - 1) / 2) as u16);
            if (vocab_index - 1).is_multiple_of(2) {
                Tag::B(l)
            } else {
                Tag::I(l)
            }
        }
    }

    /// Looks up a label by name.
    #[must_use]
    pub fn label_id(&self, name: &str) -> Option<LabelId> {
        self.labels
            .iter()
            .position(|l| l == name)
            .map(|i| LabelId(i as u16))
    }

    /// The name of a label.
    #[must_use]
    pub fn label_name(&self, id: LabelId) -> &str {
        &self.labels[id.0 as usize]
    }

    /// Parses the textual form of a tag (`O`, `B-<label>`, `I-<label>`).
    /// Returns `None` when the text is not a tag in this vocabulary.
    #[must_use]
    pub fn parse_tag(&self, text: &str) -> Option<Tag> {
        if text == "O" {
            return Some(Tag::O);
        }
        let (prefix, label) = text.split_at(text.len().min(2));
        let id = self.label_id(label)?;
        match prefix {
            "B-" => Some(Tag::B(id)),
            "I-" => Some(Tag::I(id)),
            _ => None,
        }
    }

    /// The textual form of a tag.
    #[must_use]
    pub fn format_tag(&self, tag: Tag) -> String {
        match tag {
            Tag::O => "O".to_string(),
            Tag::B(l) => format!("B-{}", self.label_name(l)),
            Tag::I(l) => format!("I-{}", self.label_name(l)),
        }
    }
}

/// A labeled token span, half-open over token positions: `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Span {
    /// Span category.
    pub label: LabelId,
    /// First token position covered.
    pub start: usize,
    /// One past the last token position covered.
    pub end: usize,
}

impl Span {
    /// Creates a span; `start < end` is the caller's responsibility.
    #[must_use]
    pub fn new(label: LabelId, start: usize, end: usize) -> Span {
        debug_assert!(start < end, "span must cover at least one token");
        Span { label, start, end }
    }

    /// Number of tokens covered.
    #[must_use]
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    /// Spans always cover at least one token.
    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.start >= self.end
    }

    /// Number of token positions shared with `other`, ignoring labels.
    #[must_use]
    pub fn overlap(&self, other: &Span) -> usize {
        let lo = self.start.max(other.start);
        let hi = self.end.min(other.end);
        hi.saturating_sub(lo)
    }
}

/// One sentence: tokens, the expert (gold) annotation, and zero or more crowd
/// annotations keyed by worker.
///
/// The crowd map is ordered by worker id so that iteration order — and hence
/// every downstream computation — is independent of insertion order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sentence {
    /// Stable identifier from the source file.
    pub id: SentenceId,
    /// Surface tokens.
    pub tokens: Vec<String>,
    /// Expert annotation, one tag per token.
    pub expert: Vec<Tag>,
    /// Crowd annotations, one tag sequence per worker, each token-aligned.
    pub crowd: BTreeMap<WorkerId, Vec<Tag>>,
}

impl Sentence {
    /// Number of tokens.
    #[must_use]
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    /// Whether the sentence has zero tokens (never true for parsed corpora).
    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// A full corpus: the tag vocabulary and the sentences in file order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    /// Tag vocabulary shared by all annotations.
    pub tag_set: TagSet,
    /// Sentences in their order of appearance.
    pub sentences: Vec<Sentence>,
}

impl Corpus {
    /// All worker ids appearing anywhere in the corpus, ascending.
    #[must_use]
    pub fn workers(&self) -> Vec<WorkerId> {
        let mut ids: Vec<WorkerId> = self
            .sentences
            .iter()
            .flat_map(|s| s.crowd.keys().copied())
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    /// Number of annotations contributed by each worker.
    #[must_use]
    pub fn annotation_counts(&self) -> BTreeMap<WorkerId, usize> {
        let mut counts = BTreeMap::new();
        for sentence in &self.sentences {
            for worker in sentence.crowd.keys() {
                *counts.entry(*worker).or_insert(0) += 1;
            }
        }
        counts
    }

    /// Looks up a sentence by id.
    #[must_use]
    pub fn sentence(&self, id: SentenceId) -> Option<&Sentence> {
        self.sentences.iter().find(|s| s.id == id)
    }
}

/// Decodes an IOB2 tag sequence into its spans, in left-to-right order.
///
/// The decoder is tolerant: an `I-X` that does not continue a span of label
/// `X` (at sequence start, after `O`, or after a different label) is read as
/// if it were `B-X`, which matches how such sequences are repaired elsewhere.
/// Sequences produced by the parser or by [`tags_of`] never exercise this.
#[must_use]
pub fn spans_of(tags: &[Tag]) -> Vec<Span> {
    let mut spans = Vec::new();
    let mut open: Option<Span> = None;
    for (pos, &tag) in tags.iter().enumerate() {
        match tag {
            Tag::O => {
                if let Some(span) = open.take() {
                    spans.push(span);
                }
            }
            Tag::B(label) => {
                if let Some(span) = open.take() {
                    spans.push(span);
                }
                open = Some(Span::new(label, pos, pos + 1));
            }
            Tag::I(label) => match open {
                Some(ref mut span) if span.label == label => span.end = pos + 1,
                _ => {
                    if let Some(span) = open.take() {
                        spans.push(span);
                    }
                    open = Some(Span::new(label, pos, pos + 1));
                }
            },
        }
    }
    if let Some(span) = open {
        spans.push(span);
    }
    spans
}

/// Encodes spans back into an IOB2 tag sequence of length `len`.
///
/// Spans must lie within `0..len` and must not overlap; spans sharing a start
/// are encoded in input order, so callers pass sorted, disjoint spans
/// (everything [`spans_of`] returns qualifies).
#[must_use]
pub fn tags_of(spans: &[Span], len: usize) -> Vec<Tag> {
    let mut tags = vec![Tag::O; len];
    for span in spans {
        debug_assert!(
            span.start < span.end && span.end <= len,
            "span out of bounds"
        );
        tags[span.start] = Tag::B(span.label);
        for tag in &mut tags[span.start + 1..span.end] {
            *tag = Tag::I(span.label);
        }
    }
    tags
}
