use rand::Rng;

use super::matrix::check_len;
use super::ops::{sigmoid, tanh};
use super::{Matrix, Parameters};
use crate::Result;

/// Single LSTM layer. Gate rows are stacked in the order input, forget,
/// candidate, output.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmCell {
    w_x: Matrix,
    w_h: Matrix,
    b: Matrix,
}

/// Everything the backward pass needs from one forward step.
#[derive(Debug, Clone)]
pub struct LstmTrace {
    pub x: Vec<f64>,
    pub h_prev: Vec<f64>,
    pub c_prev: Vec<f64>,
    input_gate: Vec<f64>,
    forget_gate: Vec<f64>,
    candidate: Vec<f64>,
    output_gate: Vec<f64>,
    tanh_c: Vec<f64>,
    pub c: Vec<f64>,
    pub h: Vec<f64>,
}

/// Gradients flowing out of one step.
#[derive(Debug, Clone)]
pub struct LstmStepGrads {
    pub dx: Vec<f64>,
    pub dh_prev: Vec<f64>,
    pub dc_prev: Vec<f64>,
}

impl LstmCell {
    /// Glorot-uniform weights, zero biases except the forget gate, which
    /// starts at 1.
    pub fn new<R: Rng + ?Sized>(input_dim: usize, hidden_dim: usize, rng: &mut R) -> Self {
        let mut b = Matrix::zeros(4 * hidden_dim, 1);
        for v in &mut b.as_mut_slice()[hidden_dim..2 * hidden_dim] {
            *v = 1.0;
        }
        LstmCell {
            w_x: Matrix::glorot(4 * hidden_dim, input_dim, rng),
            w_h: Matrix::glorot(4 * hidden_dim, hidden_dim, rng),
            b,
        }
    }

    pub fn zeros(input_dim: usize, hidden_dim: usize) -> Self {
        LstmCell {
            w_x: Matrix::zeros(4 * hidden_dim, input_dim),
            w_h: Matrix::zeros(4 * hidden_dim, hidden_dim),
            b: Matrix::zeros(4 * hidden_dim, 1),
        }
    }

    pub fn from_parts(w_x: Matrix, w_h: Matrix, b: Matrix) -> Result<Self> {
        let h4 = w_h.rows();
        if h4 % 4 != 0 || w_h.cols() * 4 != h4 || w_x.rows() != h4 || b.shape() != (h4, 1) {
            return Err(crate::Error::Shape(format!(
                "inconsistent LSTM parts: w_x {:?}, w_h {:?}, b {:?}",
                w_x.shape(),
                w_h.shape(),
                b.shape()
            )));
        }
        Ok(LstmCell { w_x, w_h, b })
    }

    pub fn input_dim(&self) -> usize {
        self.w_x.cols()
    }

    pub fn hidden_dim(&self) -> usize {
        self.w_h.cols()
    }

    /// One recurrence step with shape checks. Returns `(h, c)`.
    pub fn step(&self, x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        check_len("lstm input", x.len(), self.input_dim())?;
        check_len("lstm hidden state", h_prev.len(), self.hidden_dim())?;
        check_len("lstm cell state", c_prev.len(), self.hidden_dim())?;
        let t = self.forward(x, h_prev, c_prev);
        Ok((t.h, t.c))
    }

    pub fn forward(&self, x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> LstmTrace {
        let n = self.hidden_dim();
        let mut a = self.b.as_slice().to_vec();
        self.w_x.mul_vec_acc(x, &mut a);
        self.w_h.mul_vec_acc(h_prev, &mut a);

        let input_gate: Vec<f64> = a[..n].iter().map(|&v| sigmoid(v)).collect();
        let forget_gate: Vec<f64> = a[n..2 * n].iter().map(|&v| sigmoid(v)).collect();
        let candidate: Vec<f64> = a[2 * n..3 * n].iter().map(|&v| tanh(v)).collect();
        let output_gate: Vec<f64> = a[3 * n..].iter().map(|&v| sigmoid(v)).collect();

        let c: Vec<f64> = (0..n)
            .map(|k| forget_gate[k] * c_prev[k] + input_gate[k] * candidate[k])
            .collect();
        let tanh_c: Vec<f64> = c.iter().map(|&v| tanh(v)).collect();
        let h: Vec<f64> = (0..n).map(|k| output_gate[k] * tanh_c[k]).collect();

        LstmTrace {
            x: x.to_vec(),
            h_prev: h_prev.to_vec(),
            c_prev: c_prev.to_vec(),
            input_gate,
            forget_gate,
            candidate,
            output_gate,
            tanh_c,
            c,
            h,
        }
    }

    /// Backpropagates `dh`, `dc` through one step, accumulating parameter
    /// gradients into `grads`.
    pub fn backward(&self, trace: &LstmTrace, dh: &[f64], dc: &[f64], grads: &mut LstmCell) -> LstmStepGrads {
        let n = self.hidden_dim();
        let mut da = vec![0.0; 4 * n];
        let mut dc_prev = vec![0.0; n];
        for k in 0..n {
            let (i, f, g, o) = (
                trace.input_gate[k],
                trace.forget_gate[k],
                trace.candidate[k],
                trace.output_gate[k],
            );
            let tc = trace.tanh_c[k];
            let dc_total = dc[k] + dh[k] * o * (1.0 - tc * tc);
            da[k] = dc_total * g * i * (1.0 - i);
            da[n + k] = dc_total * trace.c_prev[k] * f * (1.0 - f);
            da[2 * n + k] = dc_total * i * (1.0 - g * g);
            da[3 * n + k] = dh[k] * tc * o * (1.0 - o);
            dc_prev[k] = dc_total * f;
        }

        grads.w_x.add_outer(&da, &trace.x);
        grads.w_h.add_outer(&da, &trace.h_prev);
        grads.b.add_to_column(&da);

        let mut dx = vec![0.0; self.input_dim()];
        self.w_x.mul_vec_t_acc(&da, &mut dx);
        let mut dh_prev = vec![0.0; n];
        self.w_h.mul_vec_t_acc(&da, &mut dh_prev);
        LstmStepGrads { dx, dh_prev, dc_prev }
    }
}

impl Parameters for LstmCell {
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
