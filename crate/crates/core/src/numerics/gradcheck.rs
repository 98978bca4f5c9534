//! Central finite-difference gradient checking.
//!
//! Piecewise-smooth losses (max pooling, capped ReLU, the argmax inside the
//! ranking loss) report a `regime` fingerprint with every evaluation. A
//! coordinate whose `±ε` probes land in a different regime than the base
//! point straddles a kink, so its difference quotient says nothing about
//! the analytic gradient; such coordinates are skipped and counted.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

use super::params::{Gradients, ParamKind, Parameters};
use super::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckConfig {
    pub epsilon: f64,
    pub tolerance: f64,
    /// Check at most this many coordinates per tensor (seeded sample).
    pub max_coords_per_tensor: Option<usize>,
    pub seed: u64,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        GradCheckConfig {
            epsilon: 1e-4,
            tolerance: 1e-4,
            max_coords_per_tensor: None,
            seed: 0,
        }
    }
}

/// One loss evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probe {
    pub loss: f64,
    pub regime: u64,
}

impl Probe {
    pub fn smooth(loss: f64) -> Self {
        Probe { loss, regime: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TensorCheck {
    pub name: String,
    pub max_relative_error: f64,
    /// Coordinate with the largest error: (index, analytic, numeric).
    pub worst: Option<(usize, f64, f64)>,
    pub checked: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub tensors: Vec<TensorCheck>,
    pub epsilon: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl GradCheckReport {
    pub fn max_relative_error(&self) -> f64 {
        self.tensors
            .iter()
            .map(|t| t.max_relative_error)
            .fold(0.0, f64::max)
    }

    pub fn failures(&self) -> impl Iterator<Item = &TensorCheck> {
        self.tensors
            .iter()
            .filter(move |t| t.max_relative_error > self.tolerance)
    }
}

impl std::fmt::Display for GradCheckReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for t in &self.tensors {
            let status = if t.max_relative_error <= self.tolerance {
                "ok"
            } else {
                "FAIL"
            };
            write!(
                f,
                "{status:>4}  {:<28} max rel err {:.3e}  ({} checked, {} skipped at kinks)",
                t.name, t.max_relative_error, t.checked, t.skipped
            )?;
            if let (Some((i, a, n)), "FAIL") = (t.worst, status) {
                write!(f, "  worst #{i}: analytic {a:.6e} vs numeric {n:.6e}")?;
            }
            writeln!(f)?;
        }
        write!(
            f,
            "{} (epsilon {:e}, tolerance {:e})",
            if self.pass { "PASS" } else { "FAIL" },
            self.epsilon,
            self.tolerance
        )
    }
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8)
}

fn finite(p: Probe) -> Result<Probe> {
    if p.loss.is_finite() {
        Ok(p)
    } else {
        Err(Error::NonFinite(format!("loss evaluated to {}", p.loss)))
    }
}

fn nudge<P: Parameters>(params: &mut P, tensor: usize, coord: usize, delta: f64) {
    let mut ps = params.params_mut();
    ps[tensor].2.data_mut()[coord] += delta;
}

fn set<P: Parameters>(params: &mut P, tensor: usize, coord: usize, value: f64) {
    let mut ps = params.params_mut();
    ps[tensor].2.data_mut()[coord] = value;
}

/// Compares `analytic` against central differences of `loss` around the
/// current parameters. Parameters are restored bit-exactly afterwards.
pub fn grad_check<P, F>(
    params: &mut P,
    analytic: &Gradients,
    mut loss: F,
    config: &GradCheckConfig,
) -> Result<GradCheckReport>
where
    P: Parameters,
    F: FnMut(&P) -> Result<Probe>,
{
    if config.epsilon <= 0.0 {
        return Err(Error::Invalid("epsilon must be positive".into()));
    }
    let base = finite(loss(params)?)?;
    let layout: Vec<(String, ParamKind, usize)> = params
        .params()
        .into_iter()
        .map(|(n, k, t)| (n, k, t.len()))
        .collect();
    if layout.len() != analytic.grads.len() {
        return Err(Error::Shape("gradient layout does not match parameters".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let eps = config.epsilon;
    let mut tensors = Vec::with_capacity(layout.len());
    for (ti, (name, kind, len)) in layout.into_iter().enumerate() {
        let dense = analytic.grads[ti].to_dense(len);
        let frozen = match kind {
            ParamKind::Embedding { frozen_row: Some(r) } => {
                let width = params.params()[ti].2.cols();
                Some(r * width..(r + 1) * width)
            }
            _ => None,
        };
        let coords: Vec<usize> = match config.max_coords_per_tensor {
            Some(m) if m < len => sample(&mut rng, len, m).into_vec(),
            _ => (0..len).collect(),
        };
        let mut check = TensorCheck {
            name,
            max_relative_error: 0.0,
            worst: None,
            checked: 0,
            skipped: 0,
        };
        for c in coords {
            if frozen.as_ref().is_some_and(|r| r.contains(&c)) {
                continue;
            }
            let original = params.params()[ti].2.data()[c];
            nudge(params, ti, c, eps);
            let plus = loss(params);
            set(params, ti, c, original);
            nudge(params, ti, c, -eps);
            let minus = loss(params);
            set(params, ti, c, original);
            let (plus, minus) = (finite(plus?)?, finite(minus?)?);
            if plus.regime != base.regime || minus.regime != base.regime {
                check.skipped += 1;
                continue;
            }
            let numeric = (plus.loss - minus.loss) / (2.0 * eps);
            let err = relative_error(dense[c], numeric);
            check.checked += 1;
            if check.worst.is_none() || err > check.max_relative_error {
                check.max_relative_error = err;
                check.worst = Some((c, dense[c], numeric));
            }
        }
        tensors.push(check);
    }
    let pass = tensors.iter().all(|t| t.max_relative_error <= config.tolerance);
    Ok(GradCheckReport {
        tensors,
        epsilon: eps,
        tolerance: config.tolerance,
        pass,
    })
}

/// A plain vector viewed as a single weight tensor.
#[derive(Debug, Clone)]
pub struct VecParams(pub Tensor);

impl Parameters for VecParams {
    fn params(&self) -> Vec<(String, ParamKind, &Tensor)> {
        vec![("x".into(), ParamKind::Weight, &self.0)]
    }

    fn params_mut(&mut self) -> Vec<(String, ParamKind, &mut Tensor)> {
        vec![("x".into(), ParamKind::Weight, &mut self.0)]
    }
}

/// Gradient check of a smooth scalar function of one vector.
pub fn grad_check_fn<F>(
    x: &[f64],
    analytic: &[f64],
    f: F,
    config: &GradCheckConfig,
) -> Result<GradCheckReport>
where
    F: Fn(&[f64]) -> f64,
{
    if x.len() != analytic.len() {
        return Err(Error::Shape("analytic gradient length differs from input".into()));
    }
    let mut p = VecParams(Tensor::from_vec(&[x.len()], x.to_vec())?);
    let g = Gradients {
        grads: vec![super::params::Grad::Dense(analytic.to_vec())],
    };
    grad_check(&mut p, &g, |p: &VecParams| Ok(Probe::smooth(f(p.0.data()))), config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_at_three() {
        let cfg = GradCheckConfig {
            tolerance: 1e-6,
            ..Default::default()
        };
        let r = grad_check_fn(&[3.0], &[6.0], |w| w[0] * w[0], &cfg).unwrap();
        assert!(r.pass, "{r}");
        assert!(r.max_relative_error() < 1e-6);
    }

    #[test]
    fn detects_wrong_gradient() {
        let r = grad_check_fn(&[3.0], &[-6.0], |w| w[0] * w[0], &Default::default()).unwrap();
        assert!(!r.pass);
        assert!(r.to_string().contains("FAIL"));
    }

    #[test]
    fn non_finite_loss_is_an_error() {
        assert!(grad_check_fn(&[0.0], &[0.0], |w| 1.0 / w[0].abs(), &Default::default()).is_err());
    }

    #[test]
    fn restores_parameters() {
        let mut p = VecParams(Tensor::from_vec(&[3], vec![0.1, 0.2, 0.3]).unwrap());
        let before = p.0.clone();
        let g = Gradients {
            grads: vec![crate::numerics::Grad::Dense(vec![1.0; 3])],
        };
        grad_check(&mut p, &g, |p: &VecParams| Ok(Probe::smooth(p.0.data().iter().sum())), &Default::default())
            .unwrap();
        assert_eq!(p.0, before);
    }
}
