//! Elementwise and dense kernels with their analytic backward passes.

use crate::error::{Error, Result};

use super::tensor::Tensor;

/// `W·x (+ b)`.
pub fn affine(w: &Tensor, x: &[f64], b: Option<&[f64]>) -> Result<Vec<f64>> {
    if w.shape().len() != 2 || w.cols() != x.len() {
        return Err(Error::Shape(format!(
            "affine: weight {:?} vs input of length {}",
            w.shape(),
            x.len()
        )));
    }
    let mut y = w.matvec(x);
    if let Some(b) = b {
        if b.len() != y.len() {
            return Err(Error::Shape(format!(
                "affine: bias of length {} vs output {}",
                b.len(),
                y.len()
            )));
        }
        for (yi, bi) in y.iter_mut().zip(b) {
            *yi += bi;
        }
    }
    Ok(y)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AffineGrads {
    pub dw: Tensor,
    pub dx: Vec<f64>,
    pub db: Vec<f64>,
}

pub fn affine_backward(w: &Tensor, x: &[f64], dy: &[f64]) -> Result<AffineGrads> {
    if w.rows() != dy.len() || w.cols() != x.len() {
        return Err(Error::Shape(format!(
            "affine backward: weight {:?}, input {}, upstream {}",
            w.shape(),
            x.len(),
            dy.len()
        )));
    }
    let mut dw = Tensor::zeros(w.shape());
    dw.add_outer(dy, x);
    let mut dx = vec![0.0; x.len()];
    w.matvec_t_acc(dy, &mut dx);
    Ok(AffineGrads {
        dw,
        dx,
        db: dy.to_vec(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Activation {
    Tanh,
    /// `min(max(x, 0), cap)`.
    CappedRelu { cap: f64 },
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::CappedRelu { cap } => x.max(0.0).min(cap),
        }
    }

    /// Derivative at pre-activation `x` with output `y`. Kinks of the
    /// capped ReLU (0 and cap) get subgradient 0.
    #[inline]
    pub fn derivative(self, x: f64, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::CappedRelu { cap } => {
                if x > 0.0 && x < cap {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn forward(self, x: &[f64]) -> Vec<f64> {
        x.iter().map(|&v| self.apply(v)).collect()
    }

    pub fn backward(self, x: &[f64], y: &[f64], dy: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(y)
            .zip(dy)
            .map(|((&xi, &yi), &g)| g * self.derivative(xi, yi))
            .collect()
    }

    /// Which linear piece `x` falls on; used to detect regime changes
    /// during finite differencing.
    pub fn piece(self, x: f64) -> u8 {
        match self {
            Activation::Tanh => 0,
            Activation::CappedRelu { cap } => {
                if x <= 0.0 {
                    0
                } else if x < cap {
                    1
                } else {
                    2
                }
            }
        }
    }
}

pub fn tanh_act(x: &[f64]) -> Vec<f64> {
    Activation::Tanh.forward(x)
}

pub fn capped_relu(x: &[f64], cap: f64) -> Result<Vec<f64>> {
    if cap <= 0.0 {
        return Err(Error::Invalid(format!("capped ReLU cap must be positive, got {cap}")));
    }
    Ok(Activation::CappedRelu { cap }.forward(x))
}

/// Numerically stable softmax (max-subtracted).
pub fn softmax(scores: &[f64]) -> Vec<f64> {
    let m = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = scores.iter().map(|s| (s - m).exp()).collect();
    let z: f64 = e.iter().sum();
    e.into_iter().map(|v| v / z).collect()
}

/// Gradient through softmax given its output `p`.
pub fn softmax_backward(p: &[f64], dp: &[f64]) -> Vec<f64> {
    let inner: f64 = p.iter().zip(dp).map(|(a, b)| a * b).sum();
    p.iter().zip(dp).map(|(pi, di)| pi * (di - inner)).collect()
}

/// Scales every gradient by `threshold / g` when the global L2 norm `g`
/// exceeds `threshold`. Returns the norm before clipping.
pub fn clip_gradients(grads: &mut [&mut [f64]], threshold: f64) -> f64 {
    assert!(threshold > 0.0, "clip threshold must be positive");
    let g = grads
        .iter()
        .map(|v| super::tensor::norm_sq(v))
        .sum::<f64>()
        .sqrt();
    if g > threshold {
        let s = threshold / g;
        for v in grads.iter_mut() {
            v.iter_mut().for_each(|x| *x *= s);
        }
    }
    g
}

/// `log(1 + exp(z))` without overflow.
#[inline]
pub fn softplus(z: f64) -> f64 {
    if z > 30.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}
