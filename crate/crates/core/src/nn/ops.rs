use rand::Rng;

use crate::{Error, Result};

/// Lower clamp on probabilities fed to [`cross_entropy`].
pub const PROBABILITY_FLOOR: f64 = 1e-12;

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[inline]
pub fn tanh(x: f64) -> f64 {
    x.tanh()
}

/// Numerically stable softmax (max-subtracted).
pub fn softmax(logits: &[f64]) -> Result<Vec<f64>> {
    if logits.is_empty() {
        return Err(Error::Shape("softmax of an empty vector".into()));
    }
    if logits.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("softmax logits".into()));
    }
    Ok(softmax_unchecked(logits))
}

pub(crate) fn softmax_unchecked(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logits.iter().map(|v| (v - max).exp()).collect();
    let sum: f64 = out.iter().sum();
    out.iter_mut().for_each(|v| *v /= sum);
    out
}

/// `log softmax(logits)`, computed without exponentiating back.
pub fn log_softmax(logits: &[f64]) -> Result<Vec<f64>> {
    if logits.is_empty() {
        return Err(Error::Shape("log-softmax of an empty vector".into()));
    }
    if logits.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("log-softmax logits".into()));
    }
    Ok(log_softmax_unchecked(logits))
}

pub(crate) fn log_softmax_unchecked(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_sum = logits.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
    logits.iter().map(|v| v - max - log_sum).collect()
}

/// `-ln pred[target]` in nats, with `pred[target]` clamped below at
/// [`PROBABILITY_FLOOR`].
pub fn cross_entropy(pred: &[f64], target: usize) -> Result<f64> {
    let p = *pred
        .get(target)
        .ok_or_else(|| Error::Shape(format!("target index {target} out of range for {} classes", pred.len())))?;
    Ok(-p.max(PROBABILITY_FLOOR).ln())
}

/// Inverted-dropout mask: each entry is 0 with probability `rate`, otherwise
/// `1 / (1 - rate)`.
pub fn dropout_mask<R: Rng + ?Sized>(dim: usize, rate: f64, rng: &mut R) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::Parameter(format!("dropout rate {rate} not in [0, 1)")));
    }
    if rate == 0.0 {
        return Ok(vec![1.0; dim]);
    }
    let keep = 1.0 / (1.0 - rate);
    Ok((0..dim)
        .map(|_| if rng.gen::<f64>() < rate { 0.0 } else { keep })
        .collect())
}

/// Dropout applied to non-recurrent connections. Masks are only drawn in
/// training mode; inference is the identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dropout {
    rate: f64,
}

impl Dropout {
    pub fn new(rate: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&rate) {
            return Err(Error::Parameter(format!("dropout rate {rate} not in [0, 1)")));
        }
        Ok(Dropout { rate })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn mask<R: Rng + ?Sized>(&self, dim: usize, training: bool, rng: &mut R) -> Option<Vec<f64>> {
        if !training || self.rate == 0.0 {
            return None;
        }
        Some(dropout_mask(dim, self.rate, rng).expect("rate validated on construction"))
    }
}

pub(crate) fn apply_mask(x: &mut [f64], mask: Option<&[f64]>) {
    if let Some(m) = mask {
        for (v, k) in x.iter_mut().zip(m) {
            *v *= k;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn softmax_examples() {
        assert_eq!(softmax(&[0.0, 0.0]).unwrap(), vec![0.5, 0.5]);
        let p = softmax(&[1000.0, 1000.0, 1000.0]).unwrap();
        for v in p {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
        let p = softmax(&[1f64.ln(), 2f64.ln(), 3f64.ln()]).unwrap();
        for (v, want) in p.iter().zip([1.0 / 6.0, 2.0 / 6.0, 3.0 / 6.0]) {
            assert!((v - want).abs() < 1e-15);
        }
        assert!(softmax(&[]).is_err());
    }

    #[test]
    fn cross_entropy_examples() {
        let uniform = [0.25; 4];
        for t in 0..4 {
            assert!((cross_entropy(&uniform, t).unwrap() - 4f64.ln()).abs() < 1e-15);
        }
        assert_eq!(cross_entropy(&[0.0, 1.0], 1).unwrap(), 0.0);
        assert!((cross_entropy(&[1.0, 0.0], 1).unwrap() - 1e12f64.ln()).abs() < 1e-12);
        assert!(cross_entropy(&[1.0], 1).is_err());
    }

    #[test]
    fn dropout_examples() {
        let mut rng = crate::nn::rng::seeded(7, 0);
        assert_eq!(dropout_mask(5, 0.0, &mut rng).unwrap(), vec![1.0; 5]);
        assert!(dropout_mask(5, 1.0, &mut rng).is_err());

        let mask = dropout_mask(100_000, 0.5, &mut rng).unwrap();
        let zeros = mask.iter().filter(|&&v| v == 0.0).count() as f64 / 1e5;
        assert!((zeros - 0.5).abs() < 0.01, "zero fraction {zeros}");
        assert!(mask.iter().all(|&v| v == 0.0 || v == 2.0));

        let d = Dropout::new(0.5).unwrap();
        assert!(d.mask(10, false, &mut rng).is_none());
        assert!(d.mask(10, true, &mut rng).is_some());
    }

    proptest! {
        #[test]
        fn softmax_shift_invariant_and_normalized(
            logits in prop::collection::vec(-50.0f64..50.0, 1..12),
            shift in -100.0f64..100.0,
        ) {
            let p = softmax(&logits).unwrap();
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(p.iter().all(|&v| v > 0.0));
            let shifted: Vec<f64> = logits.iter().map(|v| v + shift).collect();
            let q = softmax(&shifted).unwrap();
            for (a, b) in p.iter().zip(&q) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn softmax_permutation_equivariant(logits in prop::collection::vec(-20.0f64..20.0, 2..10)) {
            let p = softmax(&logits).unwrap();
            let rev: Vec<f64> = logits.iter().rev().copied().collect();
            let q = softmax(&rev).unwrap();
            for (a, b) in p.iter().zip(q.iter().rev()) {
                prop_assert!((a - b).abs() < 1e-15);
            }
        }

        #[test]
        fn log_softmax_matches_softmax(logits in prop::collection::vec(-30.0f64..30.0, 1..10)) {
            let p = softmax(&logits).unwrap();
            let lp = log_softmax(&logits).unwrap();
            for (a, b) in p.iter().zip(&lp) {
                prop_assert!((a.ln() - b).abs() < 1e-12);
            }
        }
    }
}
