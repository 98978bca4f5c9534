//! SemEval 2010 Task 8 ingestion: labeled sentences, the label set, the
//! vocabulary and the train/dev split.

mod label;
mod parse;
pub mod synthetic;
mod tokenize;
mod vocab;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub use label::{Direction, Family, RelationLabel, NUM_DIRECTED, NUM_FAMILIES, NUM_LABELS, OTHER_ID};
pub use parse::{
    parse_cache, parse_semeval_file, parse_semeval_lenient, read_corpus, write_cache,
    write_semeval,
};
pub use tokenize::{render_tagged, split_words, tokenize, Tokenized};
pub use vocab::{Vocabulary, INDICATOR_TOKENS, PADDING, UNKNOWN};

/// Inclusive token index range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, i: usize) -> bool {
        self.start <= i && i <= self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledSentence {
    pub id: u64,
    pub tokens: Vec<String>,
    pub e1: Span,
    pub e2: Span,
    pub label: RelationLabel,
}

impl LabeledSentence {
    /// Builds a sentence, checking the span invariants.
    pub fn new(
        id: u64,
        tokens: Vec<String>,
        e1: Span,
        e2: Span,
        label: RelationLabel,
    ) -> Result<Self> {
        if e1.start > e1.end || e2.start > e2.end {
            return Err(Error::Invalid(format!("sentence {id}: inverted span")));
        }
        if e1.end >= e2.start {
            return Err(Error::Invalid(format!(
                "sentence {id}: e1 must end before e2 begins"
            )));
        }
        if e2.end >= tokens.len() {
            return Err(Error::Invalid(format!("sentence {id}: span out of bounds")));
        }
        Ok(LabeledSentence {
            id,
            tokens,
            e1,
            e2,
            label,
        })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Seeded uniform dev sample; both parts keep corpus order.
pub fn split_train_dev(
    sentences: &[LabeledSentence],
    dev_size: usize,
    seed: u64,
) -> Result<(Vec<LabeledSentence>, Vec<LabeledSentence>)> {
    if dev_size >= sentences.len() {
        return Err(Error::Invalid(format!(
            "dev size {dev_size} must be smaller than the corpus ({})",
            sentences.len()
        )));
    }
    let mut order: Vec<usize> = (0..sentences.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut is_dev = vec![false; sentences.len()];
    for &i in &order[..dev_size] {
        is_dev[i] = true;
    }
    let (dev, train): (Vec<_>, Vec<_>) = sentences
        .iter()
        .cloned()
        .zip(is_dev)
        .partition(|(_, d)| *d);
    Ok((
        train.into_iter().map(|(s, _)| s).collect(),
        dev.into_iter().map(|(s, _)| s).collect(),
    ))
}
