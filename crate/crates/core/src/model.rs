//! The two model families behind one interface, plus the shared output
//! layer conventions (objective, decision rule, loss).

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cnn::{CnnConfig, CnnExample, CnnModel};
use crate::corpus::{LabeledSentence, RelationLabel, Vocabulary, NUM_DIRECTED, NUM_LABELS};
use crate::error::{Error, Result};
use crate::features::PretrainedEmbeddings;
use crate::numerics::{
    grad_check, softmax, GradCheckConfig, GradCheckReport, Gradients, ParamKind, Parameters, Probe,
    Tensor,
};
use crate::rnn::{RnnConfig, RnnExample, RnnModel};
use crate::training::{cross_entropy_loss, ranking_loss, LossOutput, RankingLossConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Objective {
    /// 19-way softmax with cross-entropy.
    Softmax,
    /// 18 directed-label scores trained with the ranking loss; `Other` has
    /// no score of its own.
    Ranking,
}

impl Objective {
    pub fn num_scores(self) -> usize {
        match self {
            Objective::Softmax => NUM_LABELS,
            Objective::Ranking => NUM_DIRECTED,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Objective::Softmax => "softmax",
            Objective::Ranking => "ranking",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "softmax" => Ok(Objective::Softmax),
            "ranking" => Ok(Objective::Ranking),
            _ => Err(Error::Config(format!("unknown objective `{s}`"))),
        }
    }
}

/// Decision rule shared by both families. Softmax: argmax over 19 labels.
/// Ranking: argmax over the 18 directed labels, or `Other` when the best
/// score is negative. Ties go to the lowest label id.
pub fn predict_label(scores: &[f64], objective: Objective) -> RelationLabel {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    if objective == Objective::Ranking && scores[best] < 0.0 {
        return RelationLabel::Other;
    }
    RelationLabel::from_id(best).expect("score index is a label id")
}

/// Loss and score gradient for the configured objective.
pub fn objective_loss(
    scores: &[f64],
    gold: RelationLabel,
    objective: Objective,
    ranking: &RankingLossConfig,
) -> Result<LossOutput> {
    match objective {
        Objective::Ranking => ranking_loss(scores, gold.id(), ranking),
        Objective::Softmax => {
            if scores.len() != NUM_LABELS {
                return Err(Error::Shape(format!(
                    "softmax expects {NUM_LABELS} scores, got {}",
                    scores.len()
                )));
            }
            cross_entropy_loss(&softmax(scores), gold.id())
        }
    }
}

pub(crate) fn fingerprint<T: Hash>(value: &T) -> u64 {
    let mut h = DefaultHasher::new();
    value.hash(&mut h);
    h.finish()
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelConfig {
    Cnn(CnnConfig),
    Rnn(RnnConfig),
}

impl ModelConfig {
    pub fn objective(&self) -> Objective {
        match self {
            ModelConfig::Cnn(c) => c.objective,
            ModelConfig::Rnn(c) => c.objective,
        }
    }

    pub fn word_dim(&self) -> usize {
        match self {
            ModelConfig::Cnn(c) => c.word_dim,
            ModelConfig::Rnn(c) => c.word_dim,
        }
    }

    pub fn uses_indicators(&self) -> bool {
        match self {
            ModelConfig::Cnn(_) => false,
            ModelConfig::Rnn(c) => c.position.variant == crate::PositionVariant::Indicators,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelConfig::Cnn(c) => c.validate(),
            ModelConfig::Rnn(c) => c.validate(),
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            ModelConfig::Cnn(_) => "cnn",
            ModelConfig::Rnn(_) => "rnn",
        }
    }
}

/// A sentence resolved against a model's vocabulary and feature layout.
#[derive(Debug, Clone, PartialEq)]
pub enum Prepared {
    Cnn(CnnExample),
    Rnn(RnnExample),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Cnn(CnnModel),
    Rnn(RnnModel),
}

/// One example's loss, gradients and regime fingerprint.
#[derive(Debug, Clone)]
pub struct ExampleGradients {
    pub loss: f64,
    pub gradients: Gradients,
    pub regime: u64,
}

impl Model {
    pub fn new(
        config: &ModelConfig,
        vocab: Vocabulary,
        pretrained: Option<&PretrainedEmbeddings>,
        seed: u64,
    ) -> Result<Self> {
        Ok(match config {
            ModelConfig::Cnn(c) => Model::Cnn(CnnModel::new(c.clone(), vocab, pretrained, seed)?),
            ModelConfig::Rnn(c) => Model::Rnn(RnnModel::new(c.clone(), vocab, pretrained, seed)?),
        })
    }

    pub fn config(&self) -> ModelConfig {
        match self {
            Model::Cnn(m) => ModelConfig::Cnn(m.config().clone()),
            Model::Rnn(m) => ModelConfig::Rnn(m.config().clone()),
        }
    }

    pub fn vocab(&self) -> &Vocabulary {
        match self {
            Model::Cnn(m) => m.vocab(),
            Model::Rnn(m) => m.vocab(),
        }
    }

    pub fn objective(&self) -> Objective {
        self.config().objective()
    }

    pub fn prepare(&self, sentence: &LabeledSentence) -> Result<Prepared> {
        Ok(match self {
            Model::Cnn(m) => Prepared::Cnn(m.prepare(sentence)?),
            Model::Rnn(m) => Prepared::Rnn(m.prepare(sentence)?),
        })
    }

    pub fn scores(&self, example: &Prepared) -> Result<Vec<f64>> {
        match (self, example) {
            (Model::Cnn(m), Prepared::Cnn(e)) => Ok(m.forward(e)?.0),
            (Model::Rnn(m), Prepared::Rnn(e)) => Ok(m.forward(e)?.0),
            _ => Err(Error::Invalid("example prepared for another model family".into())),
        }
    }

    pub fn predict(&self, example: &Prepared) -> Result<RelationLabel> {
        Ok(predict_label(&self.scores(example)?, self.objective()))
    }

    pub fn predict_sentence(&self, sentence: &LabeledSentence) -> Result<RelationLabel> {
        self.predict(&self.prepare(sentence)?)
    }

    /// Forward, loss and backward for one example.
    pub fn example_gradients(
        &self,
        example: &Prepared,
        gold: RelationLabel,
        ranking: &RankingLossConfig,
    ) -> Result<ExampleGradients> {
        let objective = self.objective();
        match (self, example) {
            (Model::Cnn(m), Prepared::Cnn(e)) => {
                let (scores, cache) = m.forward(e)?;
                let out = objective_loss(&scores, gold, objective, ranking)?;
                let gradients = m.backward(&cache, &out.dscores)?;
                Ok(ExampleGradients {
                    loss: out.loss,
                    gradients,
                    regime: fingerprint(&(cache.regime(), out.competitor)),
                })
            }
            (Model::Rnn(m), Prepared::Rnn(e)) => {
                let (scores, cache) = m.forward(e)?;
                let out = objective_loss(&scores, gold, objective, ranking)?;
                let gradients = m.backward(&cache, &out.dscores)?;
                Ok(ExampleGradients {
                    loss: out.loss,
                    gradients,
                    regime: fingerprint(&(cache.regime(), out.competitor)),
                })
            }
            _ => Err(Error::Invalid("example prepared for another model family".into())),
        }
    }

    /// Loss with its regime fingerprint, for finite-difference probing.
    pub fn probe(
        &self,
        example: &Prepared,
        gold: RelationLabel,
        ranking: &RankingLossConfig,
    ) -> Result<Probe> {
        let objective = self.objective();
        let (scores, regime) = match (self, example) {
            (Model::Cnn(m), Prepared::Cnn(e)) => {
                let (s, c) = m.forward(e)?;
                (s, c.regime())
            }
            (Model::Rnn(m), Prepared::Rnn(e)) => {
                let (s, c) = m.forward(e)?;
                (s, c.regime())
            }
            _ => return Err(Error::Invalid("example prepared for another model family".into())),
        };
        let out = objective_loss(&scores, gold, objective, ranking)?;
        Ok(Probe {
            loss: out.loss,
            regime: fingerprint(&(regime, out.competitor)),
        })
    }

    /// Redraws every weight matrix and bias uniformly from
    /// `[-scale, scale]`; embedding tables are left alone.
    pub fn randomize_weights(&mut self, scale: f64, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (_, kind, t) in self.params_mut() {
            if matches!(kind, ParamKind::Weight | ParamKind::Bias) {
                t.data_mut()
                    .iter_mut()
                    .for_each(|x| *x = rng.gen_range(-scale..=scale));
            }
        }
        self.mark_updated();
    }

    /// Compares the analytic gradient of the summed loss over `sentences`
    /// with central finite differences.
    pub fn check_gradients(
        &mut self,
        sentences: &[LabeledSentence],
        ranking: &RankingLossConfig,
        config: &GradCheckConfig,
    ) -> Result<GradCheckReport> {
        let examples: Vec<(Prepared, RelationLabel)> = sentences
            .iter()
            .map(|s| Ok((self.prepare(s)?, s.label)))
            .collect::<Result<_>>()?;
        let mut total = Gradients::zeros_for(self);
        for (x, y) in &examples {
            total.add_assign(&self.example_gradients(x, *y, ranking)?.gradients);
        }
        grad_check(
            self,
            &total,
            |m: &Model| {
                let mut loss = 0.0;
                let mut regimes = Vec::with_capacity(examples.len());
                for (x, y) in &examples {
                    let p = m.probe(x, *y, ranking)?;
                    loss += p.loss;
                    regimes.push(p.regime);
                }
                Ok(Probe {
                    loss,
                    regime: fingerprint(&regimes),
                })
            },
            config,
        )
    }

    /// Named tensors for checkpointing.
    pub fn named_tensors(&self) -> Vec<(String, &Tensor)> {
        self.params().into_iter().map(|(n, _, t)| (n, t)).collect()
    }
}

impl Parameters for Model {
    fn params(&self) -> Vec<(String, ParamKind, &Tensor)> {
        match self {
            Model::Cnn(m) => m.params(),
            Model::Rnn(m) => m.params(),
        }
    }

    fn params_mut(&mut self) -> Vec<(String, ParamKind, &mut Tensor)> {
        match self {
            Model::Cnn(m) => m.params_mut(),
            Model::Rnn(m) => m.params_mut(),
        }
    }

    fn mark_updated(&mut self) {
        match self {
            Model::Cnn(m) => m.mark_updated(),
            Model::Rnn(m) => m.mark_updated(),
        }
    }
}
