use std::ops::Range;

use rand::Rng;

use crate::{Error, Result};

/// Dense row-major matrix of `f64`. Column vectors (biases) are `n × 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Builds a matrix from row-major data, rejecting wrong lengths and
    /// non-finite entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("{rows}x{cols} matrix data")));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn column(data: Vec<f64>) -> Result<Self> {
        let n = data.len();
        Self::from_vec(n, 1, data)
    }

    /// Uniform in `[-r, r]` with `r = sqrt(6 / (rows + cols))`.
    pub fn glorot<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        let r = (6.0 / (rows + cols) as f64).sqrt();
        Self::uniform(rows, cols, r, rng)
    }

    pub fn uniform<R: Rng + ?Sized>(rows: usize, cols: usize, r: f64, rng: &mut R) -> Self {
        let data = (0..rows * cols).map(|_| rng.gen_range(-r..=r)).collect();
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn fill(&mut self, value: f64) {
        self.data.iter_mut().for_each(|v| *v = value);
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn norm_squared(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn scale(&mut self, factor: f64) {
        self.data.iter_mut().for_each(|v| *v *= factor);
    }

    /// `self += other`.
    pub fn add_assign(&mut self, other: &Matrix) {
        debug_assert_eq!(self.shape(), other.shape());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    /// `out += W x`.
    pub fn mul_vec_acc(&self, x: &[f64], out: &mut [f64]) {
        self.mul_vec_rows_acc(0..self.rows, x, out);
    }

    /// `out += W[rows] x`, `out` indexed from zero.
    pub fn mul_vec_rows_acc(&self, rows: Range<usize>, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), rows.len());
        for (o, r) in out.iter_mut().zip(rows) {
            *o += dot(self.row(r), x);
        }
    }

    /// `out += Wᵀ y`.
    pub fn mul_vec_t_acc(&self, y: &[f64], out: &mut [f64]) {
        self.mul_vec_t_rows_acc(0..self.rows, y, out);
    }

    /// `out += W[rows]ᵀ y`.
    pub fn mul_vec_t_rows_acc(&self, rows: Range<usize>, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(y.len(), rows.len());
        debug_assert_eq!(out.len(), self.cols);
        for (&yv, r) in y.iter().zip(rows) {
            if yv == 0.0 {
                continue;
            }
            for (o, w) in out.iter_mut().zip(self.row(r)) {
                *o += yv * w;
            }
        }
    }

    /// `W += y xᵀ`.
    pub fn add_outer(&mut self, y: &[f64], x: &[f64]) {
        self.add_outer_rows(0..self.rows, y, x);
    }

    /// `W[rows] += y xᵀ`.
    pub fn add_outer_rows(&mut self, rows: Range<usize>, y: &[f64], x: &[f64]) {
        debug_assert_eq!(y.len(), rows.len());
        debug_assert_eq!(x.len(), self.cols);
        for (&yv, r) in y.iter().zip(rows) {
            if yv == 0.0 {
                continue;
            }
            for (w, xv) in self.row_mut(r).iter_mut().zip(x) {
                *w += yv * xv;
            }
        }
    }

    /// Adds `v` to the first column, treating `self` as a bias vector.
    pub fn add_to_column(&mut self, v: &[f64]) {
        debug_assert_eq!(self.cols, 1);
        for (a, b) in self.data.iter_mut().zip(v) {
            *a += b;
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn check_len(what: &str, got: usize, want: usize) -> Result<()> {
    if got == want {
        Ok(())
    } else {
        Err(Error::Shape(format!("{what}: expected length {want}, got {got}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_and_bad_length() {
        assert!(matches!(
            Matrix::from_vec(1, 2, vec![1.0, f64::NAN]),
            Err(Error::NonFinite(_))
        ));
        assert!(matches!(Matrix::from_vec(2, 2, vec![1.0; 3]), Err(Error::Shape(_))));
    }

    #[test]
    fn products_agree_with_hand_values() {
        let m = Matrix::from_vec(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let mut out = vec![0.0; 2];
        m.mul_vec_acc(&[1.0, 0.0, -1.0], &mut out);
        assert_eq!(out, vec![-2.0, -2.0]);

        let mut back = vec![0.0; 3];
        m.mul_vec_t_acc(&[1.0, 1.0], &mut back);
        assert_eq!(back, vec![5.0, 7.0, 9.0]);

        let mut g = Matrix::zeros(2, 3);
        g.add_outer(&[1.0, 2.0], &[1.0, 0.0, 3.0]);
        assert_eq!(g.as_slice(), &[1.0, 0.0, 3.0, 2.0, 0.0, 6.0]);
    }
}
