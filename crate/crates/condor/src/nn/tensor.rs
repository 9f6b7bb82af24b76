//! Dense row-major tensors. Everything the trainer needs is rank-2, so the
//! arithmetic helpers are matrix-shaped; the shape list stays general for
//! checkpointing and validation.

use crate::error::{CondorError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(shape: &[usize]) -> Self {
        let len = shape.iter().product();
        Self { shape: shape.to_vec(), data: vec![0.0; len] }
    }

    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if data.len() != expected {
            return Err(CondorError::Domain(format!(
                "tensor data length {} does not match shape {:?}",
                data.len(),
                shape
            )));
        }
        Ok(Self { shape, data })
    }

    /// 2-D tensor from per-example rows; rows must share a width.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(CondorError::Domain("no rows".into()));
        }
        let cols = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(CondorError::Domain(format!(
                    "ragged rows: {} vs {}",
                    row.len(),
                    cols
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(Self { shape: vec![rows.len(), cols], data })
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

    /// Rows of a rank-2 tensor.
    pub fn rows(&self) -> usize {
        debug_assert_eq!(self.shape.len(), 2);
        self.shape[0]
    }

    /// Columns of a rank-2 tensor.
    pub fn cols(&self) -> usize {
        debug_assert_eq!(self.shape.len(), 2);
        self.shape[1]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        let c = self.cols();
        &self.data[r * c..(r + 1) * c]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        let c = self.cols();
        &mut self.data[r * c..(r + 1) * c]
    }

    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols() + c]
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Copy of the rows selected by `indices` (2-D only).
    pub fn gather_rows(&self, indices: &[usize]) -> Tensor {
        let c = self.cols();
        let mut data = Vec::with_capacity(indices.len() * c);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Tensor { shape: vec![indices.len(), c], data }
    }

    /// `self [n, in] x weights [in, out] + bias [out]`.
    pub fn affine(&self, weights: &Tensor, bias: &[f64]) -> Tensor {
        let (n, in_dim) = (self.rows(), self.cols());
        let out_dim = weights.cols();
        debug_assert_eq!(weights.rows(), in_dim);
        debug_assert_eq!(bias.len(), out_dim);
        let mut out = Tensor::zeros(&[n, out_dim]);
        for r in 0..n {
            let xrow = self.row(r);
            let orow = out.row_mut(r);
            orow.copy_from_slice(bias);
            for (k, &xv) in xrow.iter().enumerate() {
                let wrow = weights.row(k);
                for (o, &w) in orow.iter_mut().zip(wrow) {
                    *o += xv * w;
                }
            }
        }
        out
    }
}
