//! Temporal convolution with filters spanning the full column height, and
//! max-over-time pooling.

use crate::error::{Error, Result};

use super::tensor::{axpy, dot, FeatureColumns, Tensor};

fn check_bank(input: &FeatureColumns, filters: &Tensor, bias: &[f64], window: usize) -> Result<()> {
    if window == 0 {
        return Err(Error::Invalid("window must be at least 1".into()));
    }
    if filters.cols() != window * input.height() {
        return Err(Error::Shape(format!(
            "filters {:?} do not span window {window} of height {}",
            filters.shape(),
            input.height()
        )));
    }
    if bias.len() != filters.rows() {
        return Err(Error::Shape(format!(
            "{} biases for {} filters",
            bias.len(),
            filters.rows()
        )));
    }
    if input.width() < window {
        return Err(Error::Invalid(format!(
            "input of width {} is narrower than window {window}",
            input.width()
        )));
    }
    Ok(())
}

/// Valid convolution. `filters` is `n × (window·d)`, where filter entry
/// `j·d + r` weighs row `r` of the `j`-th column in the window. Output
/// entry `(k, t)` is the patch dot product followed by `+ bias[k]`.
pub fn conv_over_time(
    input: &FeatureColumns,
    filters: &Tensor,
    bias: &[f64],
    window: usize,
) -> Result<Tensor> {
    check_bank(input, filters, bias, window)?;
    let steps = input.width() - window + 1;
    let n = filters.rows();
    let mut out = Tensor::zeros(&[n, steps]);
    for k in 0..n {
        let f = filters.row(k);
        let row = out.row_mut(k);
        for (t, slot) in row.iter_mut().enumerate() {
            *slot = dot(f, input.window(t, window)) + bias[k];
        }
    }
    Ok(out)
}

/// Gradient buffers for one filter bank.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvGrads {
    pub dfilters: Tensor,
    pub dbias: Vec<f64>,
    pub dinput: FeatureColumns,
}

impl ConvGrads {
    pub fn zeros(input: &FeatureColumns, filters: &Tensor) -> Self {
        ConvGrads {
            dfilters: Tensor::zeros(filters.shape()),
            dbias: vec![0.0; filters.rows()],
            dinput: input.zeros_like(),
        }
    }

    /// Accumulates the contribution of a single output entry `(k, t)`
    /// with upstream gradient `g`.
    pub fn accumulate(
        &mut self,
        input: &FeatureColumns,
        filters: &Tensor,
        window: usize,
        k: usize,
        t: usize,
        g: f64,
    ) {
        if g == 0.0 {
            return;
        }
        axpy(g, input.window(t, window), self.dfilters.row_mut(k));
        self.dbias[k] += g;
        axpy(g, filters.row(k), self.dinput.window_mut(t, window));
    }
}

pub fn conv_over_time_backward(
    input: &FeatureColumns,
    filters: &Tensor,
    window: usize,
    dmap: &Tensor,
) -> Result<ConvGrads> {
    let steps = input.width().saturating_sub(window) + 1;
    if dmap.shape() != [filters.rows(), steps] {
        return Err(Error::Shape(format!(
            "upstream gradient {:?} vs map {}×{steps}",
            dmap.shape(),
            filters.rows()
        )));
    }
    let mut grads = ConvGrads::zeros(input, filters);
    for k in 0..filters.rows() {
        for t in 0..steps {
            grads.accumulate(input, filters, window, k, t, dmap.row(k)[t]);
        }
    }
    Ok(grads)
}

/// Per-row maximum with its time index; ties go to the lowest index.
pub fn max_pool_over_time(map: &Tensor) -> Result<(Vec<f64>, Vec<usize>)> {
    if map.rows() == 0 || map.cols() == 0 {
        return Err(Error::Invalid("cannot pool an empty feature map".into()));
    }
    let mut maxima = Vec::with_capacity(map.rows());
    let mut argmax = Vec::with_capacity(map.rows());
    for k in 0..map.rows() {
        let row = map.row(k);
        let mut best = 0;
        for (t, &v) in row.iter().enumerate().skip(1) {
            if v > row[best] {
                best = t;
            }
        }
        maxima.push(row[best]);
        argmax.push(best);
    }
    Ok((maxima, argmax))
}

/// Routes `dy[k]` to `(k, argmax[k])`; zeros elsewhere.
pub fn max_pool_backward(dy: &[f64], argmax: &[usize], steps: usize) -> Tensor {
    let mut out = Tensor::zeros(&[dy.len(), steps]);
    for (k, (&g, &t)) in dy.iter().zip(argmax).enumerate() {
        out.row_mut(k)[t] = g;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_ones_filter_on_constant_input() {
        let c = 1.5;
        let input = FeatureColumns::from_columns(2, vec![c; 2 * 6]).unwrap();
        let filters = Tensor::from_vec(&[1, 6], vec![1.0; 6]).unwrap();
        let out = conv_over_time(&input, &filters, &[0.25], 3).unwrap();
        assert_eq!(out.shape(), &[1, 4]);
        assert!(out.data().iter().all(|&v| v == 6.0 * c + 0.25));
    }

    #[test]
    fn unit_filter_selects_row_zero() {
        let input = FeatureColumns::from_columns(3, vec![1., 2., 3., 4., 5., 6.]).unwrap();
        let filters = Tensor::from_vec(&[1, 3], vec![1., 0., 0.]).unwrap();
        let out = conv_over_time(&input, &filters, &[0.0], 1).unwrap();
        assert_eq!(out.data(), &[1.0, 4.0]);
    }

    #[test]
    fn narrow_input_is_rejected() {
        let input = FeatureColumns::from_columns(1, vec![1.0, 2.0]).unwrap();
        let filters = Tensor::zeros(&[1, 3]);
        assert!(conv_over_time(&input, &filters, &[0.0], 3).is_err());
    }

    #[test]
    fn pooling() {
        let map = Tensor::from_vec(&[2, 3], vec![1., 3., 2., 5., 5., 5.]).unwrap();
        let (m, a) = max_pool_over_time(&map).unwrap();
        assert_eq!(m, vec![3.0, 5.0]);
        assert_eq!(a, vec![1, 0]);
        let back = max_pool_backward(&[0.7, -2.0], &a, 3);
        assert_eq!(back.data(), &[0.0, 0.7, 0.0, -2.0, 0.0, 0.0]);
        assert!(max_pool_over_time(&Tensor::zeros(&[1, 0])).is_err());
    }
}
