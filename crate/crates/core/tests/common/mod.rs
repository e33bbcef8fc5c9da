//! Naive reference computations used as oracles by the integration tests.
//! Nothing here calls the library's forward code.
#![allow(dead_code, clippy::needless_range_loop)]

/// Registers plain check functions as `#[test]`s of the including target.
/// The acceptance suite includes the same files and calls the functions
/// directly.
macro_rules! register_tests {
    ($($name:ident),* $(,)?) => {
        mod registered {
            $(
                #[test]
                fn $name() {
                    super::$name()
                }
            )*
        }
    };
}

use tasksuggest::char_nlm::{CharLmParams, BOS as CHAR_BOS};
use tasksuggest::nn::{Matrix, Parameters};
use tasksuggest::seq2seq::{Seq2SeqParams, BOS as WORD_BOS};

pub fn tensor<'a, P: Parameters>(params: &'a P, name: &str) -> &'a Matrix {
    params
        .tensors()
        .into_iter()
        .find(|(n, _)| n == name)
        .unwrap_or_else(|| panic!("no tensor {name}"))
        .1
}

pub fn at(m: &Matrix, r: usize, c: usize) -> f64 {
    m.as_slice()[r * m.cols() + c]
}

/// `m x + b` with explicit loops; `b` may be absent.
pub fn affine(m: &Matrix, x: &[f64], b: Option<&Matrix>) -> Vec<f64> {
    assert_eq!(m.cols(), x.len());
    (0..m.rows())
        .map(|r| {
            let mut s = b.map_or(0.0, |b| b.as_slice()[r]);
            for (c, xv) in x.iter().enumerate() {
                s += at(m, r, c) * xv;
            }
            s
        })
        .collect()
}

pub fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

pub fn log_softmax(v: &[f64]) -> Vec<f64> {
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + v.iter().map(|x| (x - max).exp()).sum::<f64>().ln();
    v.iter().map(|x| x - lse).collect()
}

fn rows(v: &[f64], gate: usize, n: usize) -> &[f64] {
    &v[gate * n..(gate + 1) * n]
}

/// Gates i, f, g, o stacked in that order.
pub fn lstm_step(w_x: &Matrix, w_h: &Matrix, b: &Matrix, x: &[f64], h: &[f64], c: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = h.len();
    let a: Vec<f64> = affine(w_x, x, Some(b))
        .iter()
        .zip(affine(w_h, h, None))
        .map(|(p, q)| p + q)
        .collect();
    let mut h_new = vec![0.0; n];
    let mut c_new = vec![0.0; n];
    for k in 0..n {
        let i = sigmoid(rows(&a, 0, n)[k]);
        let f = sigmoid(rows(&a, 1, n)[k]);
        let g = rows(&a, 2, n)[k].tanh();
        let o = sigmoid(rows(&a, 3, n)[k]);
        c_new[k] = f * c[k] + i * g;
        h_new[k] = o * c_new[k].tanh();
    }
    (h_new, c_new)
}

/// Update gate z, reset gate r, candidate over `r ⊙ h`;
/// `h' = (1 - z) h + z h̃`.
pub fn gru_step(w_x: &Matrix, w_h: &Matrix, b: &Matrix, x: &[f64], h: &[f64]) -> Vec<f64> {
    let n = h.len();
    let ax = affine(w_x, x, Some(b));
    let mut out = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut r = vec![0.0; n];
    for k in 0..n {
        let mut az = ax[k];
        let mut ar = ax[n + k];
        for j in 0..n {
            az += at(w_h, k, j) * h[j];
            ar += at(w_h, n + k, j) * h[j];
        }
        z[k] = sigmoid(az);
        r[k] = sigmoid(ar);
    }
    for k in 0..n {
        let mut an = ax[2 * n + k];
        for j in 0..n {
            an += at(w_h, 2 * n + k, j) * r[j] * h[j];
        }
        out[k] = (1.0 - z[k]) * h[k] + z[k] * an.tanh();
    }
    out
}

pub struct RefCharLm<'a> {
    p: &'a CharLmParams,
}

impl<'a> RefCharLm<'a> {
    pub fn new(p: &'a CharLmParams) -> Self {
        RefCharLm { p }
    }

    fn embed(&self, t: usize) -> Vec<f64> {
        let table = tensor(self.p, "embedding.table");
        (0..table.cols()).map(|c| at(table, t, c)).collect()
    }

    fn feed(&self, t: usize, h: &[f64], c: &[f64]) -> (Vec<f64>, Vec<f64>) {
        lstm_step(
            tensor(self.p, "lstm.w_x"),
            tensor(self.p, "lstm.w_h"),
            tensor(self.p, "lstm.b"),
            &self.embed(t),
            h,
            c,
        )
    }

    fn dist(&self, h: &[f64]) -> Vec<f64> {
        log_softmax(&affine(tensor(self.p, "output.w"), h, Some(tensor(self.p, "output.b"))))
    }

    /// `ln P(continuation | BOS ⊕ context)` over token ids.
    pub fn log_prob(&self, context: &[usize], continuation: &[usize]) -> f64 {
        let n = tensor(self.p, "lstm.w_h").cols();
        let (mut h, mut c) = (vec![0.0; n], vec![0.0; n]);
        for &t in std::iter::once(&CHAR_BOS).chain(context) {
            (h, c) = self.feed(t, &h, &c);
        }
        let mut total = 0.0;
        for &t in continuation {
            total += self.dist(&h)[t];
            (h, c) = self.feed(t, &h, &c);
        }
        total
    }
}

pub struct RefSeq2Seq<'a> {
    p: &'a Seq2SeqParams,
}

impl<'a> RefSeq2Seq<'a> {
    pub fn new(p: &'a Seq2SeqParams) -> Self {
        RefSeq2Seq { p }
    }

    fn embed(&self, t: usize) -> Vec<f64> {
        let table = tensor(self.p, "embedding.table");
        (0..table.cols()).map(|c| at(table, t, c)).collect()
    }

    fn gru(&self, prefix: &str, x: &[f64], h: &[f64]) -> Vec<f64> {
        gru_step(
            tensor(self.p, &format!("{prefix}.w_x")),
            tensor(self.p, &format!("{prefix}.w_h")),
            tensor(self.p, &format!("{prefix}.b")),
            x,
            h,
        )
    }

    pub fn context(&self, source: &[usize]) -> Vec<f64> {
        let n = tensor(self.p, "encoder_fwd.w_h").cols();
        let mut fwd = vec![0.0; n];
        for &t in source {
            fwd = self.gru("encoder_fwd", &self.embed(t), &fwd);
        }
        let mut bwd = vec![0.0; n];
        for &t in source.iter().rev() {
            bwd = self.gru("encoder_bwd", &self.embed(t), &bwd);
        }
        fwd.extend(bwd);
        fwd
    }

    /// `ln P(target | source)` where `target` lists every scored token
    /// (append EOS to score termination).
    pub fn log_prob(&self, source: &[usize], target: &[usize]) -> f64 {
        let c = self.context(source);
        let mut h: Vec<f64> = affine(tensor(self.p, "bridge.w"), &c, Some(tensor(self.p, "bridge.b")))
            .into_iter()
            .map(f64::tanh)
            .collect();
        let mut prev = WORD_BOS;
        let mut total = 0.0;
        for &t in target {
            let e = self.embed(prev);
            let input: Vec<f64> = e.iter().chain(&c).copied().collect();
            h = self.gru("decoder", &input, &h);
            let features: Vec<f64> = h.iter().chain(&e).chain(&c).copied().collect();
            let lp = log_softmax(&affine(
                tensor(self.p, "output.w"),
                &features,
                Some(tensor(self.p, "output.b")),
            ));
            total += lp[t];
            prev = t;
        }
        total
    }
}

/// Every token sequence over `alphabet` of length `< max_len` followed by
/// `eos`, plus every sequence of exactly `max_len` tokens left open.
pub fn leaves(alphabet: &[usize], max_len: usize, eos: usize) -> Vec<(Vec<usize>, bool)> {
    let mut out = Vec::new();
    let mut frontier: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for seq in frontier {
            let mut done = seq.clone();
            done.push(eos);
            out.push((done, true));
            for &a in alphabet {
                let mut s = seq.clone();
                s.push(a);
                next.push(s);
            }
        }
        frontier = next;
    }
    out.extend(frontier.into_iter().map(|s| (s, false)));
    out
}

/// Ten task queries with distinct first letters. Their first characters
/// cannot be predicted from the start symbol, which puts a floor of
/// `10 ln 10 / (total chars + 10)` ≈ 0.06 nats/char under any model.
pub const MEMORIZE: [&str; 10] = [
    "make a fluffy pancake with fresh blueberries",
    "buy cheap round trip flights to tokyo",
    "plan a small garden wedding on a budget",
    "learn to swim freestyle as an adult",
    "fix a leaky kitchen faucet without a plumber",
    "grow cherry tomatoes indoors in winter",
    "write a mystery novel in thirty days",
    "clean a greasy oven with baking soda",
    "repaint the living room walls light grey",
    "start a small online bakery business",
];

/// `n` pairs (first two words → four-word phrase) with unique sources.
pub fn prefix_phrase_pairs(n: usize, seed: u64) -> Vec<(String, String)> {
    use rand::seq::SliceRandom;
    let words: Vec<String> = (0..30).map(|i| format!("w{i}")).collect();
    let mut r = tasksuggest::nn::rng::seeded(seed, 81);
    let mut sources = std::collections::HashSet::new();
    let mut out = Vec::new();
    while out.len() < n {
        let phrase: Vec<&str> = (0..4).map(|_| words.choose(&mut r).unwrap().as_str()).collect();
        let source = phrase[..2].join(" ");
        if sources.insert(source.clone()) {
            out.push((source, phrase.join(" ")));
        }
    }
    out
}
