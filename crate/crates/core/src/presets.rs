//! Named configurations: the CNN and RNN ablation ladders and short
//! architecture aliases.

use crate::cnn::{CnnConfig, ContextMode};
use crate::error::{Error, Result};
use crate::features::{PositionFeatureConfig, PositionVariant, DEFAULT_POSITION_CLIP};
use crate::corpus::synthetic::{random_sentences, random_words};
use crate::corpus::{LabeledSentence, Vocabulary};
use crate::model::{Model, ModelConfig, Objective};
use crate::rnn::{RnnConfig, RnnVariant, DEFAULT_CAP, DEFAULT_HIDDEN};
use crate::training::TrainConfig;

const CNN_LADDER: [&str; 6] = [
    "table1-row1",
    "table1-row2",
    "table1-row3",
    "table1-row4",
    "table1-row5",
    "table1-row6",
];

const RNN_LADDER: [&str; 8] = [
    "table2-row1",
    "table2-row2",
    "table2-row3",
    "table2-row4",
    "table2-row5",
    "table2-row6",
    "table2-row7",
    "table2-row8",
];

/// Alias, preset it stands for, one-line description.
pub const ARCH_ALIASES: [(&str, &str, &str); 6] = [
    ("cnn-baseline", "table1-row1", "middle context, window 3, 1200 maps, softmax"),
    ("er-cnn", "table1-row6", "extended contexts, windows 2-5, ranking, 400-dim words"),
    ("uni-rnn", "table2-row1", "uni-directional RNN, softmax"),
    ("bi-rnn", "table2-row5", "bi-directional RNN with position indicators"),
    ("connectionist-rnn", "table2-row6", "connectionist bi-directional RNN, softmax"),
    ("r-rnn", "table2-row8", "connectionist RNN, ranking, 400-dim words"),
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    CNN_LADDER.into_iter().chain(RNN_LADDER)
}

fn position(variant: PositionVariant, pos_dim: usize) -> PositionFeatureConfig {
    PositionFeatureConfig {
        variant,
        pos_dim: if variant.uses_embeddings() { pos_dim } else { 0 },
        clip: DEFAULT_POSITION_CLIP,
    }
}

fn cnn_row(row: usize) -> CnnConfig {
    let mut c = CnnConfig {
        context_mode: ContextMode::MiddleOnly,
        window_sizes: vec![3],
        feature_maps: 1200,
        word_dim: 50,
        position: position(PositionVariant::None, 0),
        objective: Objective::Softmax,
    };
    if row >= 2 {
        c.position = position(PositionVariant::Embeddings, 5);
    }
    if row >= 3 {
        c.window_sizes = vec![2, 3, 4, 5];
        c.feature_maps = 300;
    }
    if row >= 4 {
        c.objective = Objective::Ranking;
    }
    if row >= 5 {
        c.context_mode = ContextMode::Extended;
    }
    if row >= 6 {
        c.word_dim = 400;
        c.position.pos_dim = 35;
    }
    c
}

fn rnn_row(row: usize) -> RnnConfig {
    let (variant, pos) = match row {
        1 => (RnnVariant::Uni, PositionVariant::None),
        2 => (RnnVariant::Uni, PositionVariant::Embeddings),
        3 => (RnnVariant::Uni, PositionVariant::EmbeddingsWithFlag),
        4 => (RnnVariant::Uni, PositionVariant::Indicators),
        5 => (RnnVariant::Bi, PositionVariant::Indicators),
        _ => (RnnVariant::Connectionist, PositionVariant::Indicators),
    };
    RnnConfig {
        variant,
        word_dim: if row >= 8 { 400 } else { 50 },
        position: position(pos, 5),
        hidden: DEFAULT_HIDDEN,
        objective: if row >= 7 { Objective::Ranking } else { Objective::Softmax },
        cap: DEFAULT_CAP,
        truncation: None,
    }
}

/// Resolves a preset name or architecture alias to model and training
/// settings.
pub fn preset(name: &str) -> Result<(ModelConfig, TrainConfig)> {
    let name = ARCH_ALIASES
        .iter()
        .find(|(alias, _, _)| *alias == name)
        .map_or(name, |(_, target, _)| target);
    if let Some(i) = CNN_LADDER.iter().position(|n| *n == name) {
        return Ok((ModelConfig::Cnn(cnn_row(i + 1)), TrainConfig::cnn_default()));
    }
    if let Some(i) = RNN_LADDER.iter().position(|n| *n == name) {
        return Ok((ModelConfig::Rnn(rnn_row(i + 1)), TrainConfig::rnn_default()));
    }
    Err(Error::Config(format!("unknown preset or architecture `{name}`")))
}

/// Shrinks a configuration to toy size for gradient checks and smoke
/// runs. Structure (contexts, windows, variants, objective) is kept.
pub fn toy(config: &ModelConfig, word_dim: usize, width: usize) -> ModelConfig {
    let shrink_pos = |p: PositionFeatureConfig| PositionFeatureConfig {
        pos_dim: if p.variant.uses_embeddings() { 3 } else { 0 },
        clip: 5,
        ..p
    };
    match config {
        ModelConfig::Cnn(c) => ModelConfig::Cnn(CnnConfig {
            word_dim,
            feature_maps: width,
            position: shrink_pos(c.position),
            ..c.clone()
        }),
        ModelConfig::Rnn(c) => ModelConfig::Rnn(RnnConfig {
            word_dim,
            hidden: width,
            position: shrink_pos(c.position),
            ..c.clone()
        }),
    }
}

/// Words in a gradient-check instance; with the two reserved tokens the
/// vocabulary has 50 entries.
pub const GRADCHECK_WORDS: usize = 48;
/// Weights of gradient-check instances are drawn from `[-0.5, 0.5]` so
/// that gradients stay well above the finite-difference noise floor.
pub const GRADCHECK_WEIGHT_SCALE: f64 = 0.5;

/// A toy-size model (word dim 8, width 16) of the named architecture with
/// `sentences` random sentences of length 3 to 8.
pub fn gradcheck_instance(
    name: &str,
    seed: u64,
    sentences: usize,
) -> Result<(Model, Vec<LabeledSentence>)> {
    let (config, _) = preset(name)?;
    let config = toy(&config, 8, 16);
    let data = random_sentences(sentences, GRADCHECK_WORDS, 3, 8, seed);
    let words = random_words(GRADCHECK_WORDS);
    let vocab = Vocabulary::build(&[], Some(words.iter().map(String::as_str)), config.uses_indicators());
    let mut model = Model::new(&config, vocab, None, seed)?;
    model.randomize_weights(GRADCHECK_WEIGHT_SCALE, seed ^ 0x5eed);
    Ok((model, data))
}
