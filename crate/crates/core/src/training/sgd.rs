use crate::error::{Error, Result};
use crate::numerics::{Grad, Gradients, ParamKind, Parameters};

/// `θ ← θ − lr·(g + l2·θ)`, with the L2 term on weight matrices only.
/// Embedding tables move only on the rows present in the gradient, and a
/// table's frozen row never moves.
///
/// The update is validated before anything is written, so a non-finite
/// step leaves the parameters untouched.
pub fn sgd_step<P: Parameters + ?Sized>(
    params: &mut P,
    grads: &Gradients,
    lr: f64,
    l2: f64,
) -> Result<()> {
    let current = params.params();
    if current.len() != grads.grads.len() {
        return Err(Error::Shape(format!(
            "{} gradients for {} parameters",
            grads.grads.len(),
            current.len()
        )));
    }
    let step = |kind: ParamKind, theta: f64, g: f64| match kind {
        ParamKind::Weight => theta - lr * (g + l2 * theta),
        _ => theta - lr * g,
    };
    for ((name, kind, t), g) in current.iter().zip(&grads.grads) {
        let bad = match g {
            Grad::Dense(v) => {
                if v.len() != t.len() {
                    return Err(Error::Shape(format!("gradient of `{name}` has {} entries, want {}", v.len(), t.len())));
                }
                v.iter().zip(t.data()).position(|(&g, &x)| !step(*kind, x, g).is_finite())
            }
            Grad::Rows { rows, .. } => rows.iter().find_map(|(&r, v)| {
                if r >= t.rows() {
                    return Some(r * t.cols());
                }
                v.iter()
                    .zip(t.row(r))
                    .position(|(&g, &x)| !step(*kind, x, g).is_finite())
                    .map(|c| r * t.cols() + c)
            }),
        };
        if let Some(i) = bad {
            return Err(Error::NonFinite(format!(
                "update of `{name}` at flat index {i} is not finite (lr {lr})"
            )));
        }
    }
    drop(current);

    for ((_, kind, t), g) in params.params_mut().into_iter().zip(&grads.grads) {
        match g {
            Grad::Dense(v) => {
                for (x, &g) in t.data_mut().iter_mut().zip(v) {
                    *x = step(kind, *x, g);
                }
            }
            Grad::Rows { rows, .. } => {
                let frozen = match kind {
                    ParamKind::Embedding { frozen_row } => frozen_row,
                    _ => None,
                };
                for (&r, v) in rows {
                    if Some(r) == frozen {
                        continue;
                    }
                    for (x, &g) in t.row_mut(r).iter_mut().zip(v) {
                        *x = step(kind, *x, g);
                    }
                }
            }
        }
    }
    params.mark_updated();
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{Tensor, VecParams};

    #[test]
    fn zero_gradient_no_decay_is_identity() {
        let mut p = VecParams(Tensor::from_vec(&[3], vec![1.0, -2.0, 0.5]).unwrap());
        let g = Gradients::zeros_for(&p);
        sgd_step(&mut p, &g, 0.3, 0.0).unwrap();
        assert_eq!(p.0.data(), &[1.0, -2.0, 0.5]);
    }

    #[test]
    fn weight_decay_arithmetic() {
        let mut p = VecParams(Tensor::from_vec(&[1], vec![1.0]).unwrap());
        let g = Gradients::zeros_for(&p);
        sgd_step(&mut p, &g, 0.1, 0.0001).unwrap();
        assert_eq!(p.0.data()[0], 1.0 - 0.1 * (0.0001 * 1.0));
        assert!((p.0.data()[0] - (1.0 - 0.00001)).abs() < 1e-15);
    }

    #[test]
    fn zero_learning_rate_changes_nothing() {
        let mut p = VecParams(Tensor::from_vec(&[2], vec![3.0, 4.0]).unwrap());
        let mut g = Gradients::zeros_for(&p);
        g.grads[0].dense_mut().copy_from_slice(&[10.0, -7.0]);
        sgd_step(&mut p, &g, 0.0, 0.5).unwrap();
        assert_eq!(p.0.data(), &[3.0, 4.0]);
    }

    #[test]
    fn non_finite_update_is_rejected_without_writing() {
        let mut p = VecParams(Tensor::from_vec(&[2], vec![3.0, 4.0]).unwrap());
        let mut g = Gradients::zeros_for(&p);
        g.grads[0].dense_mut().copy_from_slice(&[1.0, f64::NAN]);
        assert!(matches!(sgd_step(&mut p, &g, 0.1, 0.0), Err(Error::NonFinite(_))));
        assert_eq!(p.0.data(), &[3.0, 4.0]);
    }
}
