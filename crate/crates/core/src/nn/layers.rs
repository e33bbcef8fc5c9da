use rand::Rng;

use super::matrix::check_len;
use super::{Matrix, Parameters};
use crate::{Error, Result};

/// Symbol → vector lookup table.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    table: Matrix,
}

impl Embedding {
    pub fn new<R: Rng + ?Sized>(vocab_size: usize, dim: usize, rng: &mut R) -> Self {
        Embedding {
            table: Matrix::glorot(vocab_size, dim, rng),
        }
    }

    pub fn zeros(vocab_size: usize, dim: usize) -> Self {
        Embedding {
            table: Matrix::zeros(vocab_size, dim),
        }
    }

    pub fn from_table(table: Matrix) -> Self {
        Embedding { table }
    }

    pub fn vocab_size(&self) -> usize {
        self.table.rows()
    }

    pub fn dim(&self) -> usize {
        self.table.cols()
    }

    pub fn lookup(&self, index: usize) -> Result<&[f64]> {
        if index >= self.vocab_size() {
            return Err(Error::Shape(format!(
                "embedding index {index} out of range for vocabulary of {}",
                self.vocab_size()
            )));
        }
        Ok(self.table.row(index))
    }

    pub(crate) fn row(&self, index: usize) -> &[f64] {
        self.table.row(index)
    }

    pub(crate) fn accumulate_row(&mut self, index: usize, grad: &[f64]) {
        for (g, d) in self.table.row_mut(index).iter_mut().zip(grad) {
            *g += d;
        }
    }
}

impl Parameters for Embedding {
    fn tensors(&self) -> Vec<(String, &Matrix)> {
        vec![("table".into(), &self.table)]
    }

    fn tensors_mut(&mut self) -> Vec<&mut Matrix> {
        vec![&mut self.table]
    }
}

/// Affine map `W x + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    w: Matrix,
    b: Matrix,
}

impl Linear {
    pub fn new<R: Rng + ?Sized>(input_dim: usize, output_dim: usize, rng: &mut R) -> Self {
        Linear {
            w: Matrix::glorot(output_dim, input_dim, rng),
            b: Matrix::zeros(output_dim, 1),
        }
    }

    pub fn zeros(input_dim: usize, output_dim: usize) -> Self {
        Linear {
            w: Matrix::zeros(output_dim, input_dim),
            b: Matrix::zeros(output_dim, 1),
        }
    }

    pub fn from_parts(w: Matrix, b: Matrix) -> Result<Self> {
        if b.shape() != (w.rows(), 1) {
            return Err(Error::Shape(format!(
                "bias {:?} does not match weights {:?}",
                b.shape(),
                w.shape()
            )));
        }
        Ok(Linear { w, b })
    }

    pub fn input_dim(&self) -> usize {
        self.w.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.w.rows()
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("linear input", x.len(), self.input_dim())?;
        Ok(self.forward(x))
    }

    pub(crate) fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut out = self.b.as_slice().to_vec();
        self.w.mul_vec_acc(x, &mut out);
        out
    }

    /// Accumulates parameter gradients for output gradient `dy` at input
    /// `x`; returns `dx`.
    pub(crate) fn backward(&self, x: &[f64], dy: &[f64], grads: &mut Linear) -> Vec<f64> {
        grads.w.add_outer(dy, x);
        grads.b.add_to_column(dy);
        let mut dx = vec![0.0; self.input_dim()];
        self.w.mul_vec_t_acc(dy, &mut dx);
        dx
    }
}

impl Parameters for Linear {
    fn tensors(&self) -> Vec<(String, &Matrix)> {
        vec![("w".into(), &self.w), ("b".into(), &self.b)]
    }

    fn tensors_mut(&mut self) -> Vec<&mut Matrix> {
        vec![&mut self.w, &mut self.b]
    }
}

impl Parameters for Matrix {
    fn tensors(&self) -> Vec<(String, &Matrix)> {
        vec![("value".into(), self)]
    }

    fn tensors_mut(&mut self) -> Vec<&mut Matrix> {
        vec![self]
    }
}
