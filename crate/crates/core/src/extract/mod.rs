//! Hearst-pattern extraction from POS-tagged text.
//!
//! Input is pre-tagged (no tagger is embedded): one token per line as
//! `surface<TAB>lemma<TAB>pos`, a blank line ending each sentence. Matching
//! runs per sentence against compiled [`dsl::PatternRule`]s and the counted
//! records aggregate into a [`HearstGraph`]. Sentences are independent, so
//! extraction fans out across workers and the per-shard graphs merge; the
//! merge is associative and commutative, which makes any sharding of the
//! corpus produce the same graph.

mod dsl;
mod matcher;

pub use dsl::{
    compile_patterns, default_patterns, Atom, AtomKind, DslError, DslErrorKind, PatternRule,
    DEFAULT_PATTERNS,
};
pub use matcher::{match_sentence, MatchOptions, MAX_LIST_ITEMS};

use std::io::BufRead;

use thiserror::Error;

use crate::graph::HearstGraph;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: expected `surface<TAB>lemma<TAB>pos`, got {got} fields")]
    BadFieldCount { line: usize, got: usize },
    #[error("line {line}: empty {field}")]
    EmptyField { line: usize, field: &'static str },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One token of a tagged sentence. Lemmas are lowercased on construction;
/// matching is case-insensitive by way of that normalization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedToken {
    pub surface: String,
    pub lemma: String,
    pub pos: String,
}

impl TaggedToken {
    pub fn new(surface: &str, lemma: &str, pos: &str) -> Option<Self> {
        if lemma.is_empty() || pos.is_empty() {
            return None;
        }
        Some(TaggedToken {
            surface: surface.to_string(),
            lemma: lemma.to_lowercase(),
            pos: pos.to_string(),
        })
    }
}

/// A nonempty sequence of tagged tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedSentence {
    tokens: Vec<TaggedToken>,
}

impl TaggedSentence {
    pub fn new(tokens: Vec<TaggedToken>) -> Option<Self> {
        if tokens.is_empty() {
            None
        } else {
            Some(TaggedSentence { tokens })
        }
    }

    pub fn tokens(&self) -> &[TaggedToken] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// One counted (hyponym, hypernym) extraction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractionRecord {
    pub hypo: String,
    pub hyper: String,
    pub pattern_id: String,
    pub count: u64,
}

/// Streaming reader over the tagged-corpus format.
pub struct SentenceReader<R: BufRead> {
    lines: std::io::Lines<R>,
    lineno: usize,
    done: bool,
}

impl<R: BufRead> SentenceReader<R> {
    pub fn new(reader: R) -> Self {
        SentenceReader {
            lines: reader.lines(),
            lineno: 0,
            done: false,
        }
    }
}

impl<R: BufRead> Iterator for SentenceReader<R> {
    type Item = Result<TaggedSentence, CorpusError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let mut tokens = Vec::new();
        loop {
            self.lineno += 1;
            match self.lines.next() {
                None => {
                    self.done = true;
                    return TaggedSentence::new(tokens).map(Ok);
                }
                Some(Err(e)) => {
                    self.done = true;
                    return Some(Err(e.into()));
                }
                Some(Ok(line)) => {
                    if line.trim().is_empty() {
                        if let Some(s) = TaggedSentence::new(std::mem::take(&mut tokens)) {
                            return Some(Ok(s));
                        }
                        continue; // stray blank lines between sentences
                    }
                    let fields: Vec<&str> = line.split('\t').collect();
                    if fields.len() != 3 {
                        self.done = true;
                        return Some(Err(CorpusError::BadFieldCount {
                            line: self.lineno,
                            got: fields.len(),
                        }));
                    }
                    let field = if fields[1].is_empty() {
                        Some("lemma")
                    } else if fields[2].is_empty() {
                        Some("pos")
                    } else {
                        None
                    };
                    if let Some(field) = field {
                        self.done = true;
                        return Some(Err(CorpusError::EmptyField {
                            line: self.lineno,
                            field,
                        }));
                    }
                    tokens.push(
                        TaggedToken::new(fields[0], fields[1], fields[2])
                            .expect("fields checked nonempty"),
                    );
                }
            }
        }
    }
}

/// Reads a whole tagged corpus into memory.
pub fn read_corpus<R: BufRead>(reader: R) -> Result<Vec<TaggedSentence>, CorpusError> {
    SentenceReader::new(reader).collect()
}

/// Sums records into a graph: counts add up per (hypo, hyper) across
/// patterns, the vocabulary is the set of distinct phrases, self-pairs drop.
pub fn aggregate<I: IntoIterator<Item = ExtractionRecord>>(records: I) -> HearstGraph {
    let mut graph = HearstGraph::new();
    for r in records {
        graph.add_count(&r.hypo, &r.hyper, r.count);
    }
    graph
}

/// Matches every sentence and aggregates the hits. With `workers > 1` the
/// sentences fan out over a rayon pool and per-shard graphs merge.
pub fn extract_graph(
    sentences: &[TaggedSentence],
    rules: &[PatternRule],
    opts: &MatchOptions,
    workers: usize,
) -> HearstGraph {
    if workers <= 1 || sentences.len() < 2 {
        return aggregate(
            sentences
                .iter()
                .flat_map(|s| match_sentence(s, rules, opts)),
        );
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("rayon pool");
    pool.install(|| {
        use rayon::prelude::*;
        let chunk = sentences.len().div_ceil(workers * 4).max(1);
        sentences
            .par_chunks(chunk)
            .map(|shard| {
                aggregate(
                    shard
                        .iter()
                        .flat_map(|s| match_sentence(s, rules, opts)),
                )
            })
            .reduce(HearstGraph::new, |mut a, b| {
                a.merge(&b);
                a
            })
    })
}
