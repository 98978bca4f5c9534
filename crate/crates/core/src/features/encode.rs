//! Model inputs: CNN feature matrices and RNN trigram sequences.
//!
//! Encoding is split in two: a token is first resolved to a
//! [`TokenSource`] (which table rows it reads), then sources are turned
//! into numbers against the current tables. Sources are fixed for a
//! sentence, so training resolves them once and re-reads the tables on
//! every forward pass.

use crate::corpus::{LabeledSentence, Vocabulary};
use crate::error::{Error, Result};
use crate::numerics::{FeatureColumns, Grad, Tensor};

use super::positions::{
    entity_flags, insert_position_indicators, relative_positions, PositionFeatureConfig,
    PositionVariant,
};

/// The rows a single token (or padding slot) reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TokenSource {
    pub word: usize,
    pub pos_e1: usize,
    pub pos_e2: usize,
    pub flag: bool,
}

impl TokenSource {
    pub fn padding(cfg: &PositionFeatureConfig) -> Self {
        TokenSource {
            word: Vocabulary::PAD,
            pos_e1: cfg.padding_bucket(),
            pos_e2: cfg.padding_bucket(),
            flag: false,
        }
    }
}

/// Word table plus the two distance tables (present only for the
/// embedding variants).
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTables {
    pub words: Tensor,
    pub pos_e1: Option<Tensor>,
    pub pos_e2: Option<Tensor>,
}

impl EmbeddingTables {
    pub fn word_dim(&self) -> usize {
        self.words.cols()
    }

    /// Width of one token's feature vector under `variant`.
    pub fn token_dim(&self, variant: PositionVariant) -> usize {
        let pos = self.pos_e1.as_ref().map_or(0, |t| t.cols()) + self.pos_e2.as_ref().map_or(0, |t| t.cols());
        self.word_dim()
            + match variant {
                PositionVariant::None | PositionVariant::Indicators => 0,
                PositionVariant::Embeddings => pos,
                PositionVariant::EmbeddingsWithFlag => pos + 1,
            }
    }

    /// Appends the feature vector of `src` to `out`.
    pub fn write_token(&self, src: &TokenSource, variant: PositionVariant, out: &mut Vec<f64>) {
        out.extend_from_slice(self.words.row(src.word));
        if variant.uses_embeddings() {
            out.extend_from_slice(self.pos_e1.as_ref().expect("position table").row(src.pos_e1));
            out.extend_from_slice(self.pos_e2.as_ref().expect("position table").row(src.pos_e2));
        }
        if variant == PositionVariant::EmbeddingsWithFlag {
            out.push(if src.flag { 1.0 } else { 0.0 });
        }
    }

    /// Sends the gradient of one token's feature vector back to the table
    /// rows it was read from. The PADDING word row never receives gradient.
    pub fn scatter(
        &self,
        grads: &mut [Grad],
        src: &TokenSource,
        variant: PositionVariant,
        dvec: &[f64],
    ) {
        let wd = self.word_dim();
        if src.word != Vocabulary::PAD {
            grads[0].add_row(src.word, &dvec[..wd]);
        }
        if variant.uses_embeddings() {
            let pd = self.pos_e1.as_ref().expect("position table").cols();
            grads[1].add_row(src.pos_e1, &dvec[wd..wd + pd]);
            grads[2].add_row(src.pos_e2, &dvec[wd + pd..wd + 2 * pd]);
        }
    }
}

/// Resolves every token of `sentence` to its table rows. With the
/// indicator variant the four indicator tokens are inserted first.
pub fn token_sources(
    sentence: &LabeledSentence,
    vocab: &Vocabulary,
    cfg: &PositionFeatureConfig,
) -> Vec<TokenSource> {
    if cfg.variant == PositionVariant::Indicators {
        return insert_position_indicators(sentence)
            .iter()
            .map(|t| TokenSource {
                word: vocab.lookup(t),
                ..TokenSource::padding(cfg)
            })
            .collect();
    }
    let dist = relative_positions(sentence, cfg.clip);
    let flags = entity_flags(sentence);
    sentence
        .tokens
        .iter()
        .zip(dist)
        .zip(flags)
        .map(|((t, (d1, d2)), f)| TokenSource {
            word: vocab.lookup(t),
            pos_e1: cfg.bucket(d1),
            pos_e2: cfg.bucket(d2),
            flag: f == 1,
        })
        .collect()
}

/// Column sources for one CNN context: `max_window - 1` padding slots on
/// each side, widened on the right if needed so the matrix is never
/// narrower than `max_window`.
pub fn cnn_context_sources(
    sentence_sources: &[TokenSource],
    positions: &[usize],
    cfg: &PositionFeatureConfig,
    max_window: usize,
) -> Vec<TokenSource> {
    let pad = TokenSource::padding(cfg);
    let side = max_window.saturating_sub(1);
    let mut out = Vec::with_capacity(positions.len() + 2 * side);
    out.extend(std::iter::repeat_n(pad, side));
    out.extend(positions.iter().map(|&p| sentence_sources[p]));
    out.extend(std::iter::repeat_n(pad, side));
    while out.len() < max_window {
        out.push(pad);
    }
    out
}

pub fn check_cnn_variant(variant: PositionVariant) -> Result<()> {
    match variant {
        PositionVariant::None | PositionVariant::Embeddings => Ok(()),
        v => Err(Error::Config(format!(
            "the CNN takes distance embeddings only; `{}` is an RNN-side option",
            v.name()
        ))),
    }
}

/// Builds the `token_dim × T` matrix for a list of column sources.
pub fn columns_from_sources(
    tables: &EmbeddingTables,
    sources: &[TokenSource],
    variant: PositionVariant,
) -> FeatureColumns {
    let height = tables.token_dim(variant);
    let mut data = Vec::with_capacity(height * sources.len());
    for s in sources {
        tables.write_token(s, variant, &mut data);
    }
    FeatureColumns::from_columns(height, data).expect("consistent column height")
}

#[derive(Debug, Clone, PartialEq)]
pub struct CnnInput {
    pub columns: FeatureColumns,
    pub sources: Vec<TokenSource>,
}

/// Encodes the tokens at `positions` of `sentence` as a padded CNN input.
pub fn encode_cnn_input(
    sentence: &LabeledSentence,
    positions: &[usize],
    vocab: &Vocabulary,
    tables: &EmbeddingTables,
    cfg: &PositionFeatureConfig,
    max_window: usize,
) -> Result<CnnInput> {
    check_cnn_variant(cfg.variant)?;
    if positions.iter().any(|&p| p >= sentence.len()) {
        return Err(Error::Invalid("context position out of range".into()));
    }
    let all = token_sources(sentence, vocab, cfg);
    let sources = cnn_context_sources(&all, positions, cfg, max_window);
    Ok(CnnInput {
        columns: columns_from_sources(tables, &sources, cfg.variant),
        sources,
    })
}

/// Trigram steps: step `t` is `vec(t-1) ⊕ vec(t) ⊕ vec(t+1)` with padding
/// vectors past either end.
pub fn trigram_steps(
    tables: &EmbeddingTables,
    sources: &[TokenSource],
    cfg: &PositionFeatureConfig,
) -> Vec<Vec<f64>> {
    let td = tables.token_dim(cfg.variant);
    let pad = TokenSource::padding(cfg);
    let vec_of = |i: isize| -> TokenSource {
        if i < 0 || i as usize >= sources.len() {
            pad
        } else {
            sources[i as usize]
        }
    };
    (0..sources.len() as isize)
        .map(|t| {
            let mut step = Vec::with_capacity(3 * td);
            for k in [t - 1, t, t + 1] {
                tables.write_token(&vec_of(k), cfg.variant, &mut step);
            }
            step
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RnnInput {
    pub steps: Vec<Vec<f64>>,
    pub sources: Vec<TokenSource>,
}

pub fn encode_rnn_input(
    sentence: &LabeledSentence,
    vocab: &Vocabulary,
    tables: &EmbeddingTables,
    cfg: &PositionFeatureConfig,
) -> Result<RnnInput> {
    if cfg.variant == PositionVariant::Indicators && !vocab.has_indicators() {
        return Err(Error::Config("vocabulary lacks the position indicator tokens".into()));
    }
    let sources = token_sources(sentence, vocab, cfg);
    Ok(RnnInput {
        steps: trigram_steps(tables, &sources, cfg),
        sources,
    })
}
