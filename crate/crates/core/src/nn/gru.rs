use rand::Rng;

use super::matrix::check_len;
use super::ops::{sigmoid, tanh};
use super::{Matrix, Parameters};
use crate::Result;

/// Single GRU layer with the update convention `h = (1 - z)·h_prev + z·h̃`.
///
/// Rows of the stacked weights are ordered update gate `z`, reset gate `r`,
/// candidate `h̃`; the reset gate is applied to `h_prev` before the
/// recurrent candidate product.
#[derive(Debug, Clone, PartialEq)]
pub struct GruCell {
    w_x: Matrix,
    w_h: Matrix,
    b: Matrix,
}

#[derive(Debug, Clone)]
pub struct GruTrace {
    pub x: Vec<f64>,
    pub h_prev: Vec<f64>,
    update: Vec<f64>,
    reset: Vec<f64>,
    candidate: Vec<f64>,
    pub h: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct GruStepGrads {
    pub dx: Vec<f64>,
    pub dh_prev: Vec<f64>,
}

impl GruCell {
    pub fn new<R: Rng + ?Sized>(input_dim: usize, hidden_dim: usize, rng: &mut R) -> Self {
        GruCell {
            w_x: Matrix::glorot(3 * hidden_dim, input_dim, rng),
            w_h: Matrix::glorot(3 * hidden_dim, hidden_dim, rng),
            b: Matrix::zeros(3 * hidden_dim, 1),
        }
    }

    pub fn zeros(input_dim: usize, hidden_dim: usize) -> Self {
        GruCell {
            w_x: Matrix::zeros(3 * hidden_dim, input_dim),
            w_h: Matrix::zeros(3 * hidden_dim, hidden_dim),
            b: Matrix::zeros(3 * hidden_dim, 1),
        }
    }

    pub fn from_parts(w_x: Matrix, w_h: Matrix, b: Matrix) -> Result<Self> {
        let h3 = w_h.rows();
        if h3 % 3 != 0 || w_h.cols() * 3 != h3 || w_x.rows() != h3 || b.shape() != (h3, 1) {
            return Err(crate::Error::Shape(format!(
                "inconsistent GRU parts: w_x {:?}, w_h {:?}, b {:?}",
                w_x.shape(),
                w_h.shape(),
                b.shape()
            )));
        }
        Ok(GruCell { w_x, w_h, b })
    }

    pub fn input_dim(&self) -> usize {
        self.w_x.cols()
    }

    pub fn hidden_dim(&self) -> usize {
        self.w_h.cols()
    }

    pub fn step(&self, x: &[f64], h_prev: &[f64]) -> Result<Vec<f64>> {
        check_len("gru input", x.len(), self.input_dim())?;
        check_len("gru hidden state", h_prev.len(), self.hidden_dim())?;
        Ok(self.forward(x, h_prev).h)
    }

    pub fn forward(&self, x: &[f64], h_prev: &[f64]) -> GruTrace {
        let n = self.hidden_dim();
        let mut a = self.b.as_slice().to_vec();
        self.w_x.mul_vec_acc(x, &mut a);
        self.w_h.mul_vec_rows_acc(0..2 * n, h_prev, &mut a[..2 * n]);

        let update: Vec<f64> = a[..n].iter().map(|&v| sigmoid(v)).collect();
        let reset: Vec<f64> = a[n..2 * n].iter().map(|&v| sigmoid(v)).collect();
        let gated: Vec<f64> = reset.iter().zip(h_prev).map(|(r, h)| r * h).collect();
        self.w_h.mul_vec_rows_acc(2 * n..3 * n, &gated, &mut a[2 * n..]);
        let candidate: Vec<f64> = a[2 * n..].iter().map(|&v| tanh(v)).collect();

        let h = (0..n)
            .map(|k| (1.0 - update[k]) * h_prev[k] + update[k] * candidate[k])
            .collect();
        GruTrace {
            x: x.to_vec(),
            h_prev: h_prev.to_vec(),
            update,
            reset,
            candidate,
            h,
        }
    }

    pub fn backward(&self, trace: &GruTrace, dh: &[f64], grads: &mut GruCell) -> GruStepGrads {
        let n = self.hidden_dim();
        let mut dh_prev: Vec<f64> = (0..n).map(|k| dh[k] * (1.0 - trace.update[k])).collect();

        let mut da = vec![0.0; 3 * n];
        for k in 0..n {
            let z = trace.update[k];
            let c = trace.candidate[k];
            da[k] = dh[k] * (c - trace.h_prev[k]) * z * (1.0 - z);
            da[2 * n + k] = dh[k] * z * (1.0 - c * c);
        }

        // candidate path through r ⊙ h_prev
        let mut d_gated = vec![0.0; n];
        self.w_h.mul_vec_t_rows_acc(2 * n..3 * n, &da[2 * n..], &mut d_gated);
        let gated: Vec<f64> = (0..n).map(|k| trace.reset[k] * trace.h_prev[k]).collect();
        for k in 0..n {
            let r = trace.reset[k];
            da[n + k] = d_gated[k] * trace.h_prev[k] * r * (1.0 - r);
            dh_prev[k] += d_gated[k] * r;
        }

        grads.w_x.add_outer(&da, &trace.x);
        grads.w_h.add_outer_rows(0..2 * n, &da[..2 * n], &trace.h_prev);
        grads.w_h.add_outer_rows(2 * n..3 * n, &da[2 * n..], &gated);
        grads.b.add_to_column(&da);

        let mut dx = vec![0.0; self.input_dim()];
        self.w_x.mul_vec_t_acc(&da, &mut dx);
        self.w_h.mul_vec_t_rows_acc(0..2 * n, &da[..2 * n], &mut dh_prev);
        GruStepGrads { dx, dh_prev }
    }
}

impl Parameters for GruCell {
    fn tensors(&self) -> Vec<(String, &Matrix)> {
        vec![
            ("w_x".into(), &self.w_x),
            ("w_h".into(), &self.w_h),
            ("b".into(), &self.b),
        ]
    }

    fn tensors_mut(&mut self) -> Vec<&mut Matrix> {
        vec![&mut self.w_x, &mut self.w_h, &mut self.b]
    }
}
