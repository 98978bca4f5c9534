use std::collections::HashMap;
use std::fmt::{self, Write as _};

use crate::corpus::{Family, RelationLabel, NUM_FAMILIES, NUM_LABELS};
use crate::error::{Error, Result};

use super::IdLabel;

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyScore {
    pub family: Family,
    /// Exact directed matches.
    pub correct: usize,
    /// Predictions in this family, either direction.
    pub predicted: usize,
    /// Gold sentences in this family, either direction.
    pub gold: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl FamilyScore {
    /// Whether the family occurs in the gold labels or the predictions.
    pub fn present(&self) -> bool {
        self.predicted + self.gold > 0
    }
}

/// Scores in percent.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub families: Vec<FamilyScore>,
    pub macro_f1: f64,
    pub accuracy: f64,
    /// `confusion[gold][predicted]` over label ids.
    pub confusion: Vec<Vec<usize>>,
    pub total: usize,
}

fn pct(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

fn index_by_id(records: &[IdLabel], what: &str) -> Result<HashMap<u64, RelationLabel>> {
    let mut map = HashMap::with_capacity(records.len());
    for &(id, label) in records {
        if map.insert(id, label).is_some() {
            return Err(Error::Invalid(format!("duplicate id {id} in {what}")));
        }
    }
    Ok(map)
}

/// Official macro-F1 over the nine relation families.
///
/// A prediction counts as correct only with the right direction. Precision
/// is taken over all predictions of the family and recall over all gold
/// sentences of the family, so a direction error costs both. `Other` has no
/// score of its own. Families that appear in neither gold nor predictions
/// are left out of the mean; if no family appears at all the mean is 0.
pub fn macro_f1(gold: &[IdLabel], predicted: &[IdLabel]) -> Result<EvalReport> {
    let pred = index_by_id(predicted, "predictions")?;
    index_by_id(gold, "gold")?;
    if pred.len() != gold.len() {
        return Err(Error::Invalid(format!(
            "{} predictions for {} gold sentences",
            pred.len(),
            gold.len()
        )));
    }
    let mut confusion = vec![vec![0usize; NUM_LABELS]; NUM_LABELS];
    for &(id, g) in gold {
        let p = pred
            .get(&id)
            .ok_or_else(|| Error::Invalid(format!("no prediction for sentence {id}")))?;
        confusion[g.id()][p.id()] += 1;
    }

    let mut families = Vec::with_capacity(NUM_FAMILIES);
    for family in Family::ALL {
        let ids = [family.index() * 2, family.index() * 2 + 1];
        let correct = ids.iter().map(|&i| confusion[i][i]).sum();
        let predicted = (0..NUM_LABELS)
            .map(|g| ids.iter().map(|&i| confusion[g][i]).sum::<usize>())
            .sum();
        let gold_n = ids.iter().map(|&i| confusion[i].iter().sum::<usize>()).sum();
        let precision = pct(correct, predicted);
        let recall = pct(correct, gold_n);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        families.push(FamilyScore {
            family,
            correct,
            predicted,
            gold: gold_n,
            precision,
            recall,
            f1,
        });
    }
    let present: Vec<f64> = families.iter().filter(|f| f.present()).map(|f| f.f1).collect();
    let macro_f1 = if present.is_empty() {
        0.0
    } else {
        present.iter().sum::<f64>() / present.len() as f64
    };
    let hits = (0..NUM_LABELS).map(|i| confusion[i][i]).sum();
    Ok(EvalReport {
        families,
        macro_f1,
        accuracy: pct(hits, gold.len()),
        confusion,
        total: gold.len(),
    })
}

impl EvalReport {
    /// Machine-readable `key = value` lines.
    pub fn key_values(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "macro_f1 = {}", self.macro_f1);
        let _ = writeln!(out, "accuracy = {}", self.accuracy);
        let _ = writeln!(out, "sentences = {}", self.total);
        for f in &self.families {
            let n = f.family.name();
            let _ = writeln!(out, "precision.{n} = {}", f.precision);
            let _ = writeln!(out, "recall.{n} = {}", f.recall);
            let _ = writeln!(out, "f1.{n} = {}", f.f1);
        }
        out
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<20} {:>7} {:>7} {:>7} {:>8} {:>8} {:>8}",
            "family", "correct", "pred", "gold", "P", "R", "F1"
        )?;
        for s in &self.families {
            writeln!(
                f,
                "{:<20} {:>7} {:>7} {:>7} {:>8.2} {:>8.2} {:>8.2}{}",
                s.family.name(),
                s.correct,
                s.predicted,
                s.gold,
                s.precision,
                s.recall,
                s.f1,
                if s.present() { "" } else { "  (absent)" }
            )?;
        }
        writeln!(f, "accuracy {:.2}% over {} sentences", self.accuracy, self.total)?;
        writeln!(f, "macro-F1 {:.2}", self.macro_f1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Direction;

    fn ce(d: Direction) -> RelationLabel {
        RelationLabel::Directed(Family::CauseEffect, d)
    }

    #[test]
    fn crafted_four_sentences() {
        let ed = RelationLabel::Directed(Family::EntityDestination, Direction::Forward);
        let fwd = ce(Direction::Forward);
        let gold = [(1, fwd), (2, fwd), (3, RelationLabel::Other), (4, ed)];
        let pred = [(1, fwd), (2, RelationLabel::Other), (3, fwd), (4, ed)];
        let r = macro_f1(&gold, &pred).unwrap();
        let c = &r.families[Family::CauseEffect.index()];
        assert_eq!((c.precision, c.recall, c.f1), (50.0, 50.0, 50.0));
        assert_eq!(r.families[Family::EntityDestination.index()].f1, 100.0);
        assert_eq!(r.macro_f1, 75.0);
    }

    #[test]
    fn direction_flip_scores_zero() {
        let gold = [(1, ce(Direction::Forward))];
        let pred = [(1, ce(Direction::Reverse))];
        let r = macro_f1(&gold, &pred).unwrap();
        assert_eq!(r.families[0].f1, 0.0);
        assert_eq!(r.macro_f1, 0.0);
    }

    #[test]
    fn identity_is_perfect() {
        let gold: Vec<IdLabel> = RelationLabel::all().enumerate().map(|(i, l)| (i as u64, l)).collect();
        let r = macro_f1(&gold, &gold).unwrap();
        assert_eq!(r.macro_f1, 100.0);
        assert_eq!(r.accuracy, 100.0);
    }

    #[test]
    fn id_mismatch_is_an_error() {
        let gold = [(1, RelationLabel::Other)];
        assert!(macro_f1(&gold, &[(2, RelationLabel::Other)]).is_err());
        assert!(macro_f1(&gold, &[]).is_err());
        assert!(macro_f1(&gold, &[(1, RelationLabel::Other), (1, RelationLabel::Other)]).is_err());
    }

    #[test]
    fn report_renders() {
        let gold = [(1, ce(Direction::Forward))];
        let r = macro_f1(&gold, &gold).unwrap();
        assert!(r.to_string().contains("macro-F1 100.00"));
        assert!(r.key_values().contains("f1.Cause-Effect = 100\n"));
    }
}
