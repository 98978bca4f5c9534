use crate::error::{Error, Result};

/// Dense row-major tensor of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(shape: &[usize]) -> Self {
        Tensor {
            shape: shape.to_vec(),
            data: vec![0.0; shape.iter().product()],
        }
    }

    pub fn from_vec(shape: &[usize], data: Vec<f64>) -> Result<Self> {
        let n: usize = shape.iter().product();
        if n != data.len() {
            return Err(Error::Shape(format!(
                "shape {shape:?} needs {n} values, got {}",
                data.len()
            )));
        }
        Ok(Tensor {
            shape: shape.to_vec(),
            data,
        })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn rows(&self) -> usize {
        self.shape.first().copied().unwrap_or(0)
    }

    /// Product of all trailing dimensions.
    pub fn cols(&self) -> usize {
        self.shape.iter().skip(1).product()
    }

    pub fn row(&self, r: usize) -> &[f64] {
        let c = self.cols();
        &self.data[r * c..(r + 1) * c]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        let c = self.cols();
        &mut self.data[r * c..(r + 1) * c]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `self · x` for a matrix.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(self.cols(), x.len());
        (0..self.rows()).map(|r| dot(self.row(r), x)).collect()
    }

    /// Accumulates `selfᵀ · y` into `out`.
    pub fn matvec_t_acc(&self, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(self.rows(), y.len());
        debug_assert_eq!(self.cols(), out.len());
        for (r, &yr) in y.iter().enumerate() {
            if yr != 0.0 {
                axpy(yr, self.row(r), out);
            }
        }
    }

    /// Accumulates the outer product `y ⊗ x` into this matrix.
    pub fn add_outer(&mut self, y: &[f64], x: &[f64]) {
        debug_assert_eq!(self.rows(), y.len());
        debug_assert_eq!(self.cols(), x.len());
        for (r, &yr) in y.iter().enumerate() {
            if yr != 0.0 {
                axpy(yr, x, self.row_mut(r));
            }
        }
    }
}

/// Accumulates `y ⊗ x` into a row-major buffer of `y.len()` rows.
pub fn add_outer_into(dst: &mut [f64], y: &[f64], x: &[f64]) {
    debug_assert_eq!(dst.len(), y.len() * x.len());
    let cols = x.len();
    for (r, &yr) in y.iter().enumerate() {
        if yr != 0.0 {
            axpy(yr, x, &mut dst[r * cols..(r + 1) * cols]);
        }
    }
}

/// Sequential dot product; summation order is index order.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn norm_sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// A sequence of equally tall feature columns, stored column after column.
/// This is the `d × T` input of a temporal convolution.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureColumns {
    height: usize,
    data: Vec<f64>,
}

impl FeatureColumns {
    pub fn new(height: usize) -> Self {
        FeatureColumns {
            height,
            data: Vec::new(),
        }
    }

    pub fn from_columns(height: usize, data: Vec<f64>) -> Result<Self> {
        if height == 0 || !data.len().is_multiple_of(height) {
            return Err(Error::Shape(format!(
                "{} values do not form columns of height {height}",
                data.len()
            )));
        }
        Ok(FeatureColumns { height, data })
    }

    pub fn push_column(&mut self, column: &[f64]) {
        debug_assert_eq!(column.len(), self.height);
        self.data.extend_from_slice(column);
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.data.len().checked_div(self.height).unwrap_or(0)
    }

    pub fn column(&self, t: usize) -> &[f64] {
        &self.data[t * self.height..(t + 1) * self.height]
    }

    /// Columns `t..t + w` as one contiguous slice.
    pub fn window(&self, t: usize, w: usize) -> &[f64] {
        &self.data[t * self.height..(t + w) * self.height]
    }

    pub fn window_mut(&mut self, t: usize, w: usize) -> &mut [f64] {
        &mut self.data[t * self.height..(t + w) * self.height]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn zeros_like(&self) -> Self {
        FeatureColumns {
            height: self.height,
            data: vec![0.0; self.data.len()],
        }
    }
}
