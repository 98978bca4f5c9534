use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

use super::scorer::macro_f1;
use super::IdLabel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZTest {
    pub n: usize,
    pub accuracy_a: f64,
    pub accuracy_b: f64,
    pub z: f64,
    /// Two-tailed.
    pub p_value: f64,
}

/// Two-proportion z-test on per-sentence correctness of two systems over
/// the same sentences, with pooled variance.
pub fn significance_z_test(a: &[IdLabel], b: &[IdLabel], gold: &[IdLabel]) -> Result<ZTest> {
    let n = gold.len();
    if n == 0 {
        return Err(Error::Invalid("significance test over zero sentences".into()));
    }
    // Reuse the scorer's alignment checks and its confusion diagonal.
    let hits = |p: &[IdLabel]| -> Result<usize> {
        let r = macro_f1(gold, p)?;
        Ok((0..r.confusion.len()).map(|i| r.confusion[i][i]).sum())
    };
    let (ka, kb) = (hits(a)?, hits(b)?);
    let nf = n as f64;
    let (pa, pb) = (ka as f64 / nf, kb as f64 / nf);
    let pooled = (ka + kb) as f64 / (2.0 * nf);
    let se = (pooled * (1.0 - pooled) * (2.0 / nf)).sqrt();
    let z = if se > 0.0 { (pa - pb) / se } else { 0.0 };
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let p_value = (2.0 * normal.sf(z.abs())).min(1.0);
    Ok(ZTest {
        n,
        accuracy_a: pa,
        accuracy_b: pb,
        z,
        p_value,
    })
}
