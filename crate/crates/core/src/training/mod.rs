//! Objectives, the SGD update and the epoch loop.

mod loss;
mod sgd;
mod trainer;

pub use loss::{cross_entropy_loss, ranking_loss, LossOutput, RankingLossConfig};
pub use sgd::sgd_step;
pub use trainer::{
    accuracy, batch_gradients, predict_all, predict_records, train, EpochControl, EpochRecord, Schedule,
    TrainConfig,
};
