//! Central finite-difference oracle for analytic gradients.

use rand::seq::index::sample;

use super::{rng, Parameters};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckConfig {
    /// Finite-difference step.
    pub step: f64,
    /// Coordinates to check; every coordinate is checked when the model is
    /// smaller than this.
    pub samples: usize,
    pub tolerance: f64,
    /// Lower bound on the relative-error denominator, so that gradients that
    /// are zero up to round-off are compared absolutely.
    pub denominator_floor: f64,
    pub seed: u64,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        GradCheckConfig {
            step: 1e-5,
            samples: 200,
            tolerance: 1e-4,
            denominator_floor: 1e-6,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    pub worst_tensor: String,
    pub worst_index: usize,
    pub analytic_at_worst: f64,
    pub numeric_at_worst: f64,
    pub coordinates_checked: usize,
    pub tolerance: f64,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.max_relative_error <= self.tolerance
    }
}

/// Compares `analytic` against central differences of `loss` around `params`.
///
/// `loss` must be deterministic (dropout off); this is verified by evaluating
/// it twice at `params`.
pub fn grad_check<P, F>(params: &P, analytic: &P, loss: F, config: &GradCheckConfig) -> Result<GradCheckReport>
where
    P: Parameters + Clone,
    F: Fn(&P) -> f64,
{
    let base = loss(params);
    if base.to_bits() != loss(params).to_bits() {
        return Err(Error::Oracle("loss is not deterministic at fixed parameters".into()));
    }
    if !base.is_finite() {
        return Err(Error::Oracle(format!("loss is not finite: {base}")));
    }

    let names_and_sizes: Vec<(String, usize)> = params.tensors().iter().map(|(n, t)| (n.clone(), t.len())).collect();
    let grad_tensors = analytic.tensors();
    if grad_tensors.len() != names_and_sizes.len()
        || grad_tensors
            .iter()
            .zip(&names_and_sizes)
            .any(|((_, g), (_, n))| g.len() != *n)
    {
        return Err(Error::Shape("gradient layout differs from parameters".into()));
    }

    let total: usize = names_and_sizes.iter().map(|(_, n)| n).sum();
    let chosen: Vec<usize> = if total <= config.samples {
        (0..total).collect()
    } else {
        let mut r = rng::seeded(config.seed, rng::GRAD_CHECK);
        let mut v = sample(&mut r, total, config.samples).into_vec();
        v.sort_unstable();
        v
    };

    let locate = |mut flat: usize| -> (usize, usize) {
        for (t, (_, n)) in names_and_sizes.iter().enumerate() {
            if flat < *n {
                return (t, flat);
            }
            flat -= n;
        }
        unreachable!("coordinate within total")
    };

    let mut report = GradCheckReport {
        max_relative_error: 0.0,
        worst_tensor: String::new(),
        worst_index: 0,
        analytic_at_worst: 0.0,
        numeric_at_worst: 0.0,
        coordinates_checked: chosen.len(),
        tolerance: config.tolerance,
    };
    let mut probe = params.clone();
    for flat in chosen {
        let (t, i) = locate(flat);
        let original = params.tensors()[t].1.as_slice()[i];

        probe.tensors_mut()[t].as_mut_slice()[i] = original + config.step;
        let plus = loss(&probe);
        probe.tensors_mut()[t].as_mut_slice()[i] = original - config.step;
        let minus = loss(&probe);
        probe.tensors_mut()[t].as_mut_slice()[i] = original;

        let numeric = (plus - minus) / (2.0 * config.step);
        let a = grad_tensors[t].1.as_slice()[i];
        let denom = a.abs().max(numeric.abs()).max(config.denominator_floor);
        let rel = (a - numeric).abs() / denom;
        if rel > report.max_relative_error || !rel.is_finite() {
            report.max_relative_error = if rel.is_finite() { rel } else { f64::INFINITY };
            report.worst_tensor = names_and_sizes[t].0.clone();
            report.worst_index = i;
            report.analytic_at_worst = a;
            report.numeric_at_worst = numeric;
        }
    }
    Ok(report)
}
