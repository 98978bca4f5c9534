//! Training objectives over label score vectors.

use crate::corpus::{NUM_DIRECTED, NUM_LABELS, OTHER_ID};
use crate::error::{Error, Result};
use crate::numerics::{sigmoid, softplus};

/// Pairwise ranking objective: pushes the gold score above `m_plus` and
/// the best competitor below `-m_minus`, with `gamma` scaling both terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankingLossConfig {
    pub gamma: f64,
    pub m_plus: f64,
    pub m_minus: f64,
}

impl Default for RankingLossConfig {
    fn default() -> Self {
        RankingLossConfig {
            gamma: 2.0,
            m_plus: 2.5,
            m_minus: 0.5,
        }
    }
}

impl RankingLossConfig {
    pub fn validate(&self) -> Result<()> {
        if self.gamma > 0.0 && self.m_plus.is_finite() && self.m_minus.is_finite() {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid ranking loss settings {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossOutput {
    pub loss: f64,
    pub dscores: Vec<f64>,
    /// Label id of the best competitor (ranking only).
    pub competitor: Option<usize>,
}

fn argmax_excluding(scores: &[f64], skip: Option<usize>) -> usize {
    let mut best: Option<usize> = None;
    for (i, &s) in scores.iter().enumerate() {
        if Some(i) == skip {
            continue;
        }
        if best.is_none_or(|b| s > scores[b]) {
            best = Some(i);
        }
    }
    best.expect("at least two scores")
}

/// Ranking loss over the 18 directed-label scores. For `gold == Other`
/// only the competitor term is used, with the competitor being the overall
/// best-scoring label.
pub fn ranking_loss(scores: &[f64], gold: usize, cfg: &RankingLossConfig) -> Result<LossOutput> {
    if scores.len() != NUM_DIRECTED {
        return Err(Error::Shape(format!(
            "ranking loss expects {NUM_DIRECTED} scores, got {}",
            scores.len()
        )));
    }
    if gold >= NUM_LABELS {
        return Err(Error::Invalid(format!("gold label id {gold} out of range")));
    }
    let g = cfg.gamma;
    let mut dscores = vec![0.0; scores.len()];
    if gold == OTHER_ID {
        let c = argmax_excluding(scores, None);
        let neg = g * (cfg.m_minus + scores[c]);
        dscores[c] = g * sigmoid(neg);
        return Ok(LossOutput {
            loss: softplus(neg),
            dscores,
            competitor: Some(c),
        });
    }
    let c = argmax_excluding(scores, Some(gold));
    let pos = g * (cfg.m_plus - scores[gold]);
    let neg = g * (cfg.m_minus + scores[c]);
    dscores[gold] = -g * sigmoid(pos);
    dscores[c] = g * sigmoid(neg);
    Ok(LossOutput {
        loss: softplus(pos) + softplus(neg),
        dscores,
        competitor: Some(c),
    })
}

/// `-log p_gold` and its gradient `p - onehot(gold)` with respect to the
/// pre-softmax scores.
pub fn cross_entropy_loss(probabilities: &[f64], gold: usize) -> Result<LossOutput> {
    if gold >= probabilities.len() {
        return Err(Error::Invalid(format!("gold label id {gold} out of range")));
    }
    let loss = -probabilities[gold].max(1e-12).ln();
    let mut dscores = probabilities.to_vec();
    dscores[gold] -= 1.0;
    Ok(LossOutput {
        loss,
        dscores,
        competitor: None,
    })
}
