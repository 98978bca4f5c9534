//! Neural relation classification for SemEval 2010 Task 8 style data.
//!
//! The crate covers the whole pipeline: [`corpus`] ingestion,
//! [`features`] (context splitting, position features, embeddings),
//! [`numerics`] kernels with analytic gradients, the [`cnn`] and [`rnn`]
//! model families, [`training`] (ranking loss, SGD, the epoch loop),
//! [`evaluation`] (official macro-F1, significance, voting ensembles) and
//! the [`checkpoint`] container.

pub mod checkpoint;
pub mod cnn;
pub mod config;
pub mod corpus;
pub mod evaluation;
pub mod features;
pub mod model;
pub mod numerics;
pub mod presets;
pub mod rnn;
pub mod training;

mod error;

pub use error::{Error, Result};

pub use cnn::{CnnConfig, CnnModel, ContextMode};
pub use corpus::{LabeledSentence, RelationLabel, Span, Vocabulary};
pub use evaluation::{EvalReport, PredictionRecord};
pub use features::{PositionFeatureConfig, PositionVariant};
pub use model::{Model, ModelConfig, Objective};
pub use rnn::{RnnConfig, RnnModel, RnnVariant};
pub use training::{RankingLossConfig, TrainConfig};
