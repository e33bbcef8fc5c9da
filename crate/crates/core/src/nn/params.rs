use super::Matrix;

/// A fixed, ordered collection of named parameter tensors.
///
/// Gradients of a model are stored in a value of the same type, so the
/// optimizer, clipping and the gradient oracle can walk parameters and
/// gradients in lock-step.
pub trait Parameters {
    /// Tensors with stable names, in a fixed order.
    fn tensors(&self) -> Vec<(String, &Matrix)>;

    /// The same tensors as [`Parameters::tensors`], same order.
    fn tensors_mut(&mut self) -> Vec<&mut Matrix>;

    fn zero(&mut self) {
        for t in self.tensors_mut() {
            t.fill(0.0);
        }
    }

    fn parameter_count(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }

    fn global_norm(&self) -> f64 {
        self.tensors().iter().map(|(_, t)| t.norm_squared()).sum::<f64>().sqrt()
    }

    fn scale(&mut self, factor: f64) {
        for t in self.tensors_mut() {
            t.scale(factor);
        }
    }

    fn all_finite(&self) -> bool {
        self.tensors().iter().all(|(_, t)| t.is_finite())
    }

    /// `self += other`, tensor by tensor.
    fn accumulate(&mut self, other: &Self)
    where
        Self: Sized,
    {
        let src = other.tensors();
        for (dst, (_, s)) in self.tensors_mut().into_iter().zip(src) {
            dst.add_assign(s);
        }
    }
}

/// Rescales `grads` so their global L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
pub fn clip_global_norm<P: Parameters>(grads: &mut P, max_norm: f64) -> f64 {
    let norm = grads.global_norm();
    if norm > max_norm && norm > 0.0 {
        grads.scale(max_norm / norm);
    }
    norm
}

pub(crate) fn prefixed<'a>(
    prefix: &str,
    tensors: Vec<(String, &'a Matrix)>,
) -> impl Iterator<Item = (String, &'a Matrix)> + 'a {
    let prefix = prefix.to_string();
    tensors
        .into_iter()
        .map(move |(name, t)| (format!("{prefix}.{name}"), t))
}
