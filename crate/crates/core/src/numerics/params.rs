//! Named parameter tensors and matching gradient buffers.

use std::collections::BTreeMap;

use super::kernels::clip_gradients;
use super::tensor::{axpy, norm_sq, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    /// Weight matrices and filters: L2-regularized.
    Weight,
    Bias,
    /// Lookup table updated sparsely by row; `frozen_row` never moves.
    Embedding { frozen_row: Option<usize> },
}

/// Anything that exposes its trainable tensors in a fixed order.
pub trait Parameters {
    fn params(&self) -> Vec<(String, ParamKind, &Tensor)>;
    fn params_mut(&mut self) -> Vec<(String, ParamKind, &mut Tensor)>;

    /// Called after an optimizer step; invalidates forward caches.
    fn mark_updated(&mut self) {}
}

#[derive(Debug, Clone, PartialEq)]
pub enum Grad {
    Dense(Vec<f64>),
    /// Sparse per-row gradient of a lookup table.
    Rows {
        width: usize,
        rows: BTreeMap<usize, Vec<f64>>,
    },
}

impl Grad {
    fn for_param(kind: ParamKind, t: &Tensor) -> Self {
        match kind {
            ParamKind::Embedding { .. } => Grad::Rows {
                width: t.cols(),
                rows: BTreeMap::new(),
            },
            _ => Grad::Dense(vec![0.0; t.len()]),
        }
    }

    pub fn dense_mut(&mut self) -> &mut [f64] {
        match self {
            Grad::Dense(v) => v,
            Grad::Rows { .. } => panic!("dense access to a sparse gradient"),
        }
    }

    pub fn add_row(&mut self, row: usize, values: &[f64]) {
        match self {
            Grad::Rows { width, rows } => {
                debug_assert_eq!(*width, values.len());
                let slot = rows.entry(row).or_insert_with(|| vec![0.0; *width]);
                axpy(1.0, values, slot);
            }
            Grad::Dense(_) => panic!("row access to a dense gradient"),
        }
    }

    /// Full-length copy, with untouched rows zero.
    pub fn to_dense(&self, len: usize) -> Vec<f64> {
        match self {
            Grad::Dense(v) => v.clone(),
            Grad::Rows { width, rows } => {
                let mut out = vec![0.0; len];
                for (&r, v) in rows {
                    out[r * width..(r + 1) * width].copy_from_slice(v);
                }
                out
            }
        }
    }

    fn slices_mut(&mut self) -> Vec<&mut [f64]> {
        match self {
            Grad::Dense(v) => vec![v.as_mut_slice()],
            Grad::Rows { rows, .. } => rows.values_mut().map(|v| v.as_mut_slice()).collect(),
        }
    }

    fn norm_sq(&self) -> f64 {
        match self {
            Grad::Dense(v) => norm_sq(v),
            Grad::Rows { rows, .. } => rows.values().map(|v| norm_sq(v)).sum(),
        }
    }
}

/// Gradients aligned index-by-index with [`Parameters::params`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub grads: Vec<Grad>,
}

impl Gradients {
    pub fn zeros_for<P: Parameters + ?Sized>(params: &P) -> Self {
        Gradients {
            grads: params
                .params()
                .into_iter()
                .map(|(_, kind, t)| Grad::for_param(kind, t))
                .collect(),
        }
    }

    pub fn add_assign(&mut self, other: &Gradients) {
        assert_eq!(self.grads.len(), other.grads.len());
        for (a, b) in self.grads.iter_mut().zip(&other.grads) {
            match (a, b) {
                (Grad::Dense(x), Grad::Dense(y)) => axpy(1.0, y, x),
                (a @ Grad::Rows { .. }, Grad::Rows { rows, .. }) => {
                    for (&r, v) in rows {
                        a.add_row(r, v);
                    }
                }
                _ => panic!("mismatched gradient layouts"),
            }
        }
    }

    pub fn scale(&mut self, s: f64) {
        for g in &mut self.grads {
            for v in g.slices_mut() {
                v.iter_mut().for_each(|x| *x *= s);
            }
        }
    }

    pub fn norm(&self) -> f64 {
        self.grads.iter().map(Grad::norm_sq).sum::<f64>().sqrt()
    }

    /// Global-norm clipping; returns the norm before clipping.
    pub fn clip(&mut self, threshold: f64) -> f64 {
        let mut slices: Vec<&mut [f64]> =
            self.grads.iter_mut().flat_map(|g| g.slices_mut()).collect();
        clip_gradients(&mut slices, threshold)
    }

    pub fn is_finite(&self) -> bool {
        self.norm().is_finite()
    }

    pub fn is_zero(&self) -> bool {
        self.norm() == 0.0
    }
}
