use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::corpus::{LabeledSentence, RelationLabel};
use crate::error::{Error, Result};
use crate::evaluation::{macro_f1, PredictionRecord};
use crate::model::{predict_label, Model, Prepared};
use crate::numerics::Gradients;

use super::loss::RankingLossConfig;
use super::sgd::sgd_step;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schedule {
    Constant,
    /// Halve the rate after every epoch whose dev F1 is not a new best.
    HalveOnPlateau,
}

impl Schedule {
    pub fn name(self) -> &'static str {
        match self {
            Schedule::Constant => "constant",
            Schedule::HalveOnPlateau => "halve-on-plateau",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "constant" => Ok(Schedule::Constant),
            "halve-on-plateau" => Ok(Schedule::HalveOnPlateau),
            _ => Err(Error::Config(format!("unknown schedule `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub l2_weight: f64,
    pub batch_size: usize,
    pub epochs: usize,
    /// Global gradient-norm threshold; `None` disables clipping.
    pub clip: Option<f64>,
    pub seed: u64,
    pub schedule: Schedule,
    pub ranking: RankingLossConfig,
}

impl TrainConfig {
    pub fn cnn_default() -> Self {
        TrainConfig {
            learning_rate: 0.2,
            l2_weight: 1e-4,
            batch_size: 25,
            epochs: 10,
            clip: None,
            seed: 1,
            schedule: Schedule::HalveOnPlateau,
            ranking: RankingLossConfig::default(),
        }
    }

    pub fn rnn_default() -> Self {
        TrainConfig {
            learning_rate: 0.01,
            batch_size: 1,
            epochs: 50,
            clip: Some(10.0),
            ..Self::cnn_default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.learning_rate > 0.0
            && self.learning_rate.is_finite()
            && self.l2_weight >= 0.0
            && self.batch_size > 0
            && self.epochs > 0
            && self.clip.is_none_or(|c| c > 0.0);
        if !ok {
            return Err(Error::Config(format!("invalid training settings {self:?}")));
        }
        self.ranking.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Rate used during this epoch.
    pub learning_rate: f64,
    /// Mean per-example loss over the epoch, before L2.
    pub train_loss: f64,
    pub dev_f1: Option<f64>,
    pub seconds: f64,
}

pub enum EpochControl {
    Continue,
    Stop,
}

/// Predicts every sentence; runs in parallel, output in input order.
pub fn predict_all(model: &Model, sentences: &[LabeledSentence]) -> Result<Vec<RelationLabel>> {
    sentences
        .par_iter()
        .map(|s| model.predict_sentence(s))
        .collect()
}

/// Prediction records in input order, optionally carrying the raw scores.
pub fn predict_records(
    model: &Model,
    sentences: &[LabeledSentence],
    with_scores: bool,
) -> Result<Vec<PredictionRecord>> {
    sentences
        .par_iter()
        .map(|s| {
            let scores = model.scores(&model.prepare(s)?)?;
            Ok(PredictionRecord {
                id: s.id,
                label: predict_label(&scores, model.objective()),
                scores: with_scores.then_some(scores),
            })
        })
        .collect()
}

/// Fraction of sentences whose prediction equals the gold label.
pub fn accuracy(model: &Model, sentences: &[LabeledSentence]) -> Result<f64> {
    if sentences.is_empty() {
        return Ok(0.0);
    }
    let pred = predict_all(model, sentences)?;
    let hits = pred.iter().zip(sentences).filter(|(p, s)| **p == s.label).count();
    Ok(hits as f64 / sentences.len() as f64)
}

/// Mean gradient over a batch. Examples are processed in parallel and
/// summed in batch order.
pub fn batch_gradients(
    model: &Model,
    batch: &[(&Prepared, RelationLabel)],
    ranking: &RankingLossConfig,
) -> Result<(f64, Gradients)> {
    let per: Vec<_> = batch
        .par_iter()
        .map(|(x, y)| model.example_gradients(x, *y, ranking))
        .collect::<Result<_>>()?;
    let mut total = Gradients::zeros_for(model);
    let mut loss = 0.0;
    for g in &per {
        loss += g.loss;
        total.add_assign(&g.gradients);
    }
    let n = batch.len() as f64;
    total.scale(1.0 / n);
    Ok((loss / n, total))
}

/// Runs the epoch loop in place. After every epoch `on_epoch` sees the
/// model and the new record and may stop training early.
pub fn train<F>(
    model: &mut Model,
    train_set: &[LabeledSentence],
    dev_set: &[LabeledSentence],
    cfg: &TrainConfig,
    mut on_epoch: F,
) -> Result<Vec<EpochRecord>>
where
    F: FnMut(&Model, &EpochRecord) -> Result<EpochControl>,
{
    cfg.validate()?;
    if train_set.is_empty() {
        return Err(Error::Invalid("empty training corpus".into()));
    }
    let prepared: Vec<Prepared> = train_set
        .iter()
        .map(|s| model.prepare(s))
        .collect::<Result<_>>()?;
    let dev_gold: Vec<(u64, RelationLabel)> = dev_set.iter().map(|s| (s.id, s.label)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut lr = cfg.learning_rate;
    let mut best_dev = f64::NEG_INFINITY;
    let mut history = Vec::with_capacity(cfg.epochs);

    for epoch in 1..=cfg.epochs {
        let started = Instant::now();
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<(&Prepared, RelationLabel)> =
                chunk.iter().map(|&i| (&prepared[i], train_set[i].label)).collect();
            let (loss, mut grads) = batch_gradients(model, &batch, &cfg.ranking)?;
            if !loss.is_finite() || !grads.is_finite() {
                return Err(Error::NonFinite(format!(
                    "loss or gradient diverged in epoch {epoch} (loss {loss})"
                )));
            }
            if let Some(c) = cfg.clip {
                grads.clip(c);
            }
            sgd_step(model, &grads, lr, cfg.l2_weight)?;
            loss_sum += loss * chunk.len() as f64;
        }

        let dev_f1 = if dev_set.is_empty() {
            None
        } else {
            let pred = predict_all(model, dev_set)?;
            let pred: Vec<(u64, RelationLabel)> =
                dev_set.iter().map(|s| s.id).zip(pred).collect();
            Some(macro_f1(&dev_gold, &pred)?.macro_f1)
        };
        let record = EpochRecord {
            epoch,
            learning_rate: lr,
            train_loss: loss_sum / train_set.len() as f64,
            dev_f1,
            seconds: started.elapsed().as_secs_f64(),
        };
        if let (Some(f1), Schedule::HalveOnPlateau) = (dev_f1, cfg.schedule) {
            if f1 > best_dev {
                best_dev = f1;
            } else {
                lr *= 0.5;
            }
        }
        let control = on_epoch(model, &record)?;
        history.push(record);
        if let EpochControl::Stop = control {
            break;
        }
    }
    Ok(history)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnn::{CnnConfig, ContextMode};
    use crate::corpus::{synthetic::synthetic_corpus, Vocabulary};
    use crate::features::{PositionFeatureConfig, PositionVariant, DEFAULT_POSITION_CLIP};
    use crate::model::{ModelConfig, Objective};
    use crate::numerics::Parameters;

    fn tiny_cnn(data: &[LabeledSentence], seed: u64) -> Model {
        let cfg = ModelConfig::Cnn(CnnConfig {
            context_mode: ContextMode::Extended,
            window_sizes: vec![2, 3],
            feature_maps: 6,
            word_dim: 8,
            position: PositionFeatureConfig {
                variant: PositionVariant::Embeddings,
                pos_dim: 3,
                clip: DEFAULT_POSITION_CLIP,
            },
            objective: Objective::Ranking,
        });
        let vocab = Vocabulary::build(data, None::<Vec<&str>>, false);
        Model::new(&cfg, vocab, None, seed).unwrap()
    }

    #[test]
    fn identical_seeds_give_identical_parameters() {
        let data = synthetic_corpus(30, 3);
        let cfg = TrainConfig {
            epochs: 1,
            batch_size: 4,
            ..TrainConfig::cnn_default()
        };
        let run = || {
            let mut m = tiny_cnn(&data, 5);
            train(&mut m, &data, &[], &cfg, |_, _| Ok(EpochControl::Continue)).unwrap();
            m
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn small_rate_first_epoch_loss_does_not_increase() {
        let data = synthetic_corpus(10, 8);
        let mut m = tiny_cnn(&data, 2);
        let cfg = TrainConfig {
            learning_rate: 1e-3,
            batch_size: 10,
            epochs: 1,
            ..TrainConfig::cnn_default()
        };
        let objective = |m: &Model| -> f64 {
            let data_loss: f64 = data
                .iter()
                .map(|s| {
                    let x = m.prepare(s).unwrap();
                    m.probe(&x, s.label, &cfg.ranking).unwrap().loss
                })
                .sum::<f64>()
                / data.len() as f64;
            let l2: f64 = m
                .params()
                .iter()
                .filter(|(_, k, _)| *k == crate::numerics::ParamKind::Weight)
                .map(|(_, _, t)| crate::numerics::norm_sq(t.data()))
                .sum();
            data_loss + 0.5 * cfg.l2_weight * l2
        };
        let before = objective(&m);
        train(&mut m, &data, &[], &cfg, |_, _| Ok(EpochControl::Continue)).unwrap();
        assert!(objective(&m) <= before);
    }

    #[test]
    fn schedule_halves_on_plateau() {
        let data = synthetic_corpus(20, 1);
        let mut m = tiny_cnn(&data, 0);
        let cfg = TrainConfig {
            learning_rate: 1e-12,
            epochs: 3,
            ..TrainConfig::cnn_default()
        };
        let h = train(&mut m, &data, &data, &cfg, |_, _| Ok(EpochControl::Continue)).unwrap();
        assert_eq!(h[0].learning_rate, 1e-12);
        assert_eq!(h[1].learning_rate, 1e-12);
        assert_eq!(h[2].learning_rate, 0.5e-12);
    }

    #[test]
    fn callback_can_stop() {
        let data = synthetic_corpus(10, 1);
        let mut m = tiny_cnn(&data, 0);
        let cfg = TrainConfig::cnn_default();
        let h = train(&mut m, &data, &[], &cfg, |_, r| {
            Ok(if r.epoch == 2 { EpochControl::Stop } else { EpochControl::Continue })
        })
        .unwrap();
        assert_eq!(h.len(), 2);
    }
}
