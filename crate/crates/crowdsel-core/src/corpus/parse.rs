//! Text format for corpora, with a strict parser and a canonical serializer.
//!
//! A corpus file is a sequence of sentence blocks separated by blank lines.
//! Each block starts with an id line and continues with one line per token:
//!
//! ```text
//! #id 4
//! The    O      3:O      7:B-NEG
//! film   B-NEG  3:B-NEG  7:I-NEG
//! .      O      3:O      7:O
//! ```
//!
//! Fields are whitespace-separated: the token, the expert tag, then one
//! `<worker>:<tag>` entry per crowd worker. Within a block every token line
//! must carry the same set of workers (a worker annotates whole sentences);
//! across blocks the worker sets may differ freely, which is how sparse crowd
//! coverage is represented. All tag columns must be valid IOB2.
//!
//! The serializer emits workers in ascending id order, one blank line between
//! blocks, and a trailing newline, so `parse ∘ serialize` is the identity on
//! corpora and `serialize ∘ parse` is the identity on canonically formatted
//! files.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use super::{Corpus, Sentence, SentenceId, Tag, TagSet, TagSetError, WorkerId};

/// Parse failures, each pinned to a 1-based line number of the input.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    /// A sentence block must open with `#id <integer>`.
    #[error("line {line}: expected `#id <integer>` to open a sentence block")]
    MissingId {
        /// Offending line.
        line: usize,
    },
    /// A token line needs a token, an expert tag, and well-formed
    /// `<worker>:<tag>` entries.
    #[error(
        "line {line}: malformed token line (expected `<token> <expert-tag> [<worker>:<tag> ...]`)"
    )]
    MalformedLine {
        /// Offending line.
        line: usize,
    },
    /// A tag outside the corpus vocabulary.
    #[error("line {line}: unknown tag `{tag}`")]
    UnknownTag {
        /// Offending line.
        line: usize,
        /// The unrecognized tag text.
        tag: String,
    },
    /// The same worker appeared twice on one token line, i.e. twice for one
    /// sentence.
    #[error("line {line}: worker {worker} appears twice for this sentence")]
    DuplicateWorker {
        /// Offending line.
        line: usize,
        /// The repeated worker id.
        worker: u32,
    },
    /// Token lines within one block disagree about which workers annotated
    /// the sentence.
    #[error("line {line}: worker set differs from the block's first token line")]
    WorkerSetMismatch {
        /// Offending line.
        line: usize,
    },
    /// An `I-` tag that does not continue a span of the same label.
    #[error("line {line}: `{tag}` does not continue a span of the same label")]
    InvalidTransition {
        /// Offending line.
        line: usize,
        /// The offending tag text.
        tag: String,
    },
    /// A block with an id line but no token lines.
    #[error("line {line}: sentence block has no token lines")]
    EmptySentence {
        /// Line of the block's id header.
        line: usize,
    },
    /// Two blocks claimed the same sentence id.
    #[error("line {line}: duplicate sentence id {id}")]
    DuplicateSentence {
        /// Line of the second block's id header.
        line: usize,
        /// The repeated id.
        id: u32,
    },
    /// The input contained no sentence blocks at all.
    #[error("empty corpus: no sentence blocks found")]
    Empty,
    /// Tag-set inference found only `O` tags, so no vocabulary can be built.
    #[error("cannot infer a tag set: no span labels occur in the input")]
    NoLabels,
    /// Tag-set inference produced an invalid vocabulary.
    #[error("inferred tag set is invalid: {0}")]
    BadTagSet(#[from] TagSetError),
}

/// Scans a corpus file and builds its tag vocabulary from the labels that
/// occur, in order of first appearance.
pub fn infer_tag_set(input: &str) -> Result<TagSet, ParseError> {
    let mut labels: Vec<String> = Vec::new();
    let mut note = |text: &str, line: usize| -> Result<(), ParseError> {
        if text == "O" {
            return Ok(());
        }
        if (text.starts_with("B-") || text.starts_with("I-")) && text.len() > 2 {
            let label = &text[2..];
            if !labels.iter().any(|l| l == label) {
                labels.push(label.to_string());
            }
            Ok(())
        } else {
            Err(ParseError::UnknownTag {
                line,
                tag: text.to_string(),
            })
        }
    };
    for (i, line) in input.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() || line.starts_with("#id") {
            continue;
        }
        for (field_idx, field) in line.split_whitespace().enumerate() {
            match field_idx {
                0 => {}
                1 => note(field, lineno)?,
                _ => {
                    let tag = field.split_once(':').map_or(field, |(_, tag)| tag);
                    note(tag, lineno)?;
                }
            }
        }
    }
    if labels.is_empty() {
        return Err(ParseError::NoLabels);
    }
    Ok(TagSet::new(labels)?)
}

/// Parses a corpus file against a known tag vocabulary.
pub fn parse_corpus(input: &str, tag_set: &TagSet) -> Result<Corpus, ParseError> {
    let mut sentences: Vec<Sentence> = Vec::new();
    let mut seen_ids: BTreeMap<u32, ()> = BTreeMap::new();
    let mut block: Vec<(usize, &str)> = Vec::new();

    let flush = |block: &mut Vec<(usize, &str)>,
                 sentences: &mut Vec<Sentence>,
                 seen_ids: &mut BTreeMap<u32, ()>|
     -> Result<(), ParseError> {
        if block.is_empty() {
            return Ok(());
        }
        let sentence = parse_block(block, tag_set)?;
        let header_line = block[0].0;
        if seen_ids.insert(sentence.id.0, ()).is_some() {
            return Err(ParseError::DuplicateSentence {
                line: header_line,
                id: sentence.id.0,
            });
        }
        sentences.push(sentence);
        block.clear();
        Ok(())
    };

    for (i, line) in input.lines().enumerate() {
        if line.trim().is_empty() {
            flush(&mut block, &mut sentences, &mut seen_ids)?;
        } else {
            block.push((i + 1, line));
        }
    }
    flush(&mut block, &mut sentences, &mut seen_ids)?;

    if sentences.is_empty() {
        return Err(ParseError::Empty);
    }
    Ok(Corpus {
        tag_set: tag_set.clone(),
        sentences,
    })
}

fn parse_block(lines: &[(usize, &str)], tag_set: &TagSet) -> Result<Sentence, ParseError> {
    let (header_line, header) = lines[0];
    let mut fields = header.split_whitespace();
    let id = match (fields.next(), fields.next(), fields.next()) {
        (Some("#id"), Some(num), None) => num
            .parse::<u32>()
            .map_err(|_| ParseError::MissingId { line: header_line })?,
        _ => return Err(ParseError::MissingId { line: header_line }),
    };
    if lines.len() == 1 {
        return Err(ParseError::EmptySentence { line: header_line });
    }

    let mut tokens: Vec<String> = Vec::new();
    let mut expert: Vec<Tag> = Vec::new();
    let mut crowd: BTreeMap<WorkerId, Vec<Tag>> = BTreeMap::new();
    let mut worker_set: BTreeSet<WorkerId> = BTreeSet::new();

    for (row, &(lineno, line)) in lines[1..].iter().enumerate() {
        let mut fields = line.split_whitespace();
        let token = fields
            .next()
            .ok_or(ParseError::MalformedLine { line: lineno })?;
        let expert_text = fields
            .next()
            .ok_or(ParseError::MalformedLine { line: lineno })?;
        let expert_tag = tag_set
            .parse_tag(expert_text)
            .ok_or_else(|| ParseError::UnknownTag {
                line: lineno,
                tag: expert_text.to_string(),
            })?;
        check_transition(expert.last().copied(), expert_tag, lineno, tag_set)?;

        let mut line_workers: BTreeMap<WorkerId, Tag> = BTreeMap::new();
        for field in fields {
            let (wid_text, tag_text) = field
                .split_once(':')
                .ok_or(ParseError::MalformedLine { line: lineno })?;
            let wid = wid_text
                .parse::<u32>()
                .map_err(|_| ParseError::MalformedLine { line: lineno })?;
            let tag = tag_set
                .parse_tag(tag_text)
                .ok_or_else(|| ParseError::UnknownTag {
                    line: lineno,
                    tag: tag_text.to_string(),
                })?;
            if line_workers.insert(WorkerId(wid), tag).is_some() {
                return Err(ParseError::DuplicateWorker {
                    line: lineno,
                    worker: wid,
                });
            }
        }

        if row == 0 {
            worker_set = line_workers.keys().copied().collect();
            for worker in &worker_set {
                crowd.insert(*worker, Vec::new());
            }
        } else if line_workers.keys().copied().collect::<BTreeSet<_>>() != worker_set {
            return Err(ParseError::WorkerSetMismatch { line: lineno });
        }

        for (worker, tag) in line_workers {
            let column = crowd.get_mut(&worker).expect("worker set verified above");
            check_transition(column.last().copied(), tag, lineno, tag_set)?;
            column.push(tag);
        }
        tokens.push(token.to_string());
        expert.push(expert_tag);
    }

    Ok(Sentence {
        id: SentenceId(id),
        tokens,
        expert,
        crowd,
    })
}

/// IOB2 rule: `I-X` is only valid immediately after `B-X` or `I-X`.
fn check_transition(
    prev: Option<Tag>,
    cur: Tag,
    line: usize,
    tag_set: &TagSet,
) -> Result<(), ParseError> {
    if let Tag::I(label) = cur {
        let continues = matches!(prev, Some(Tag::B(l)) | Some(Tag::I(l)) if l == label);
        if !continues {
            return Err(ParseError::InvalidTransition {
                line,
                tag: tag_set.format_tag(cur),
            });
        }
    }
    Ok(())
}

/// Serializes a corpus into its canonical text form.
#[must_use]
pub fn serialize_corpus(corpus: &Corpus) -> String {
    let mut out = String::new();
    for (i, sentence) in corpus.sentences.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "#id {}", sentence.id.0);
        for (pos, token) in sentence.tokens.iter().enumerate() {
            let _ = write!(
                out,
                "{token} {}",
                corpus.tag_set.format_tag(sentence.expert[pos])
            );
            for (worker, tags) in &sentence.crowd {
                let _ = write!(
                    out,
                    " {}:{}",
                    worker.0,
                    corpus.tag_set.format_tag(tags[pos])
                );
            }
            out.push('\n');
        }
    }
    out
}
