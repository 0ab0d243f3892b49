//! Dense row-major `f64` tensors.
//!
//! Only tensor-tensor operations on equal shapes and tensor-scalar operations
//! are supported. There is no broadcasting.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary elementwise operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementwiseOp {
    Add,
    Sub,
    Mul,
    Div,
    /// `a.powf(b)`
    Pow,
    /// `a.max(b)`
    Max,
}

impl ElementwiseOp {
    #[inline]
    fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            ElementwiseOp::Add => a + b,
            ElementwiseOp::Sub => a - b,
            ElementwiseOp::Mul => a * b,
            ElementwiseOp::Div => a / b,
            ElementwiseOp::Pow => a.powf(b),
            ElementwiseOp::Max => a.max(b),
        }
    }
}

/// Right-hand side of an elementwise operation.
#[derive(Debug, Clone, Copy)]
pub enum Operand<'a> {
    Tensor(&'a Tensor),
    Scalar(f64),
}

impl<'a> From<&'a Tensor> for Operand<'a> {
    fn from(t: &'a Tensor) -> Self {
        Operand::Tensor(t)
    }
}

impl From<f64> for Operand<'_> {
    fn from(s: f64) -> Self {
        Operand::Scalar(s)
    }
}

/// A dense array of `f64` in row-major order.
///
/// Element `(i, j)` of an `m x n` tensor lives at `data[i * n + j]`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTensor", into = "RawTensor")]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawTensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl TryFrom<RawTensor> for Tensor {
    type Error = Error;

    fn try_from(raw: RawTensor) -> Result<Self> {
        Tensor::new(raw.shape, raw.data)
    }
}

impl From<Tensor> for RawTensor {
    fn from(t: Tensor) -> Self {
        RawTensor {
            shape: t.shape,
            data: t.data,
        }
    }
}

impl fmt::Debug for Tensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Tensor")
            .field("shape", &self.shape)
            .field("data", &self.data)
            .finish()
    }
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(Error::InvalidShape {
                shape,
                len: data.len(),
            });
        }
        Ok(Tensor { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        Self::full(shape, 0.0)
    }

    pub fn full(shape: &[usize], value: f64) -> Self {
        let len = shape.iter().product();
        Tensor {
            shape: shape.to_vec(),
            data: vec![value; len],
        }
    }

    /// A rank-1 tensor owning `data`.
    pub fn from_vec(data: Vec<f64>) -> Self {
        Tensor {
            shape: vec![data.len()],
            data,
        }
    }

    /// Builds an `m x n` matrix from rows. All rows must have equal length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(m * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::ShapeMismatch {
                    left: vec![n],
                    right: vec![row.len()],
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Tensor {
            shape: vec![m, n],
            data,
        })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Exclusive access to the backing buffer.
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

    fn offset(&self, index: &[usize]) -> Result<usize> {
        if index.len() != self.shape.len() || index.iter().zip(&self.shape).any(|(i, d)| i >= d) {
            return Err(Error::invalid(format!(
                "index {index:?} out of bounds for shape {:?}",
                self.shape
            )));
        }
        Ok(index
            .iter()
            .zip(&self.shape)
            .fold(0, |acc, (&i, &d)| acc * d + i))
    }

    pub fn get(&self, index: &[usize]) -> Result<f64> {
        Ok(self.data[self.offset(index)?])
    }

    pub fn set(&mut self, index: &[usize], value: f64) -> Result<()> {
        let off = self.offset(index)?;
        self.data[off] = value;
        Ok(())
    }

    /// Row `i` of a rank-2 tensor.
    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.shape[1];
        &self.data[i * n..(i + 1) * n]
    }

    pub fn elementwise<'a>(&self, op: ElementwiseOp, rhs: impl Into<Operand<'a>>) -> Result<Tensor> {
        let data = match rhs.into() {
            Operand::Tensor(other) => {
                self.check_same_shape(other)?;
                self.data
                    .iter()
                    .zip(&other.data)
                    .map(|(&a, &b)| op.apply(a, b))
                    .collect()
            }
            Operand::Scalar(s) => self.data.iter().map(|&a| op.apply(a, s)).collect(),
        };
        Ok(Tensor {
            shape: self.shape.clone(),
            data,
        })
    }

    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        self.elementwise(ElementwiseOp::Add, other)
    }

    pub fn sub(&self, other: &Tensor) -> Result<Tensor> {
        self.elementwise(ElementwiseOp::Sub, other)
    }

    pub fn mul(&self, other: &Tensor) -> Result<Tensor> {
        self.elementwise(ElementwiseOp::Mul, other)
    }

    pub fn div(&self, other: &Tensor) -> Result<Tensor> {
        self.elementwise(ElementwiseOp::Div, other)
    }

    pub fn pow_scalar(&self, exponent: f64) -> Tensor {
        self.map(|a| a.powf(exponent))
    }

    pub fn max_scalar(&self, floor: f64) -> Tensor {
        self.map(|a| a.max(floor))
    }

    pub fn scale(&self, s: f64) -> Tensor {
        self.map(|a| a * s)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&a| f(a)).collect(),
        }
    }

    /// `self += s * other`, in place.
    pub fn add_scaled_assign(&mut self, other: &Tensor, s: f64) -> Result<()> {
        self.check_same_shape(other)?;
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
        Ok(())
    }

    pub fn fill(&mut self, value: f64) {
        self.data.fill(value);
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|a| a * a).sum()
    }

    /// Frobenius (L2) norm.
    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|a| a.is_finite())
    }

    pub fn check_same_shape(&self, other: &Tensor) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch {
                left: self.shape.clone(),
                right: other.shape.clone(),
            });
        }
        Ok(())
    }

    fn matrix_dims(&self) -> Result<(usize, usize)> {
        match self.shape[..] {
            [m, n] => Ok((m, n)),
            _ => Err(Error::invalid(format!(
                "expected a matrix, got shape {:?}",
                self.shape
            ))),
        }
    }

    /// Matrix-vector product `W x` for `W: [m, n]`, `x: [n]`.
    pub fn matvec(&self, x: &Tensor) -> Result<Tensor> {
        let (m, n) = self.matrix_dims()?;
        if x.shape != [n] {
            return Err(Error::ShapeMismatch {
                left: self.shape.clone(),
                right: x.shape.clone(),
            });
        }
        let data = self
            .data
            .chunks_exact(n.max(1))
            .take(m)
            .map(|row| row.iter().zip(&x.data).map(|(w, v)| w * v).sum())
            .collect::<Vec<f64>>();
        let data = if n == 0 { vec![0.0; m] } else { data };
        Ok(Tensor::from_vec(data))
    }

    /// Transposed product `Wᵀ y` for `W: [m, n]`, `y: [m]`.
    pub fn matvec_transposed(&self, y: &Tensor) -> Result<Tensor> {
        let (m, n) = self.matrix_dims()?;
        if y.shape != [m] {
            return Err(Error::ShapeMismatch {
                left: self.shape.clone(),
                right: y.shape.clone(),
            });
        }
        let mut out = vec![0.0; n];
        for (row, &yi) in self.data.chunks_exact(n.max(1)).zip(&y.data) {
            for (o, &w) in out.iter_mut().zip(row) {
                *o += w * yi;
            }
        }
        Ok(Tensor::from_vec(out))
    }

    /// Outer product `a bᵀ` as an `[len(a), len(b)]` matrix.
    pub fn outer(a: &Tensor, b: &Tensor) -> Tensor {
        let mut data = Vec::with_capacity(a.len() * b.len());
        for &x in &a.data {
            data.extend(b.data.iter().map(|&y| x * y));
        }
        Tensor {
            shape: vec![a.len(), b.len()],
            data,
        }
    }
}
