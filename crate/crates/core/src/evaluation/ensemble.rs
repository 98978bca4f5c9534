use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{RelationLabel, NUM_LABELS};
use crate::error::{Error, Result};

use super::IdLabel;

/// Per-sentence plurality vote. Ties are broken by a seeded uniform pick
/// among the most frequent labels. All sets must list the same ids in the
/// same order.
pub fn ensemble_vote(sets: &[Vec<IdLabel>], seed: u64) -> Result<Vec<IdLabel>> {
    let first = sets
        .first()
        .ok_or_else(|| Error::Invalid("ensemble needs at least one prediction set".into()))?;
    for (k, s) in sets.iter().enumerate().skip(1) {
        if s.len() != first.len() || s.iter().zip(first).any(|(a, b)| a.0 != b.0) {
            return Err(Error::Invalid(format!("prediction set {k} is not aligned with set 0")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(first.len());
    for (i, &(id, _)) in first.iter().enumerate() {
        let mut votes = [0usize; NUM_LABELS];
        for s in sets {
            votes[s[i].1.id()] += 1;
        }
        let top = *votes.iter().max().expect("non-empty");
        let tied: Vec<usize> = (0..NUM_LABELS).filter(|&l| votes[l] == top).collect();
        let pick = if tied.len() == 1 {
            tied[0]
        } else {
            tied[rng.gen_range(0..tied.len())]
        };
        out.push((id, RelationLabel::from_id(pick).expect("label id")));
    }
    Ok(out)
}
