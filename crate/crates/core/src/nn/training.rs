use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::rng::{self, ModelRng};
use super::{clip_global_norm, AdamState, Parameters};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean next-token cross-entropy over the epoch, nats per token.
    pub loss: f64,
}

/// Per-epoch losses of one training run, tagged with the seed that drove it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    pub seed: u64,
    pub epochs: Vec<EpochRecord>,
}

impl TrainingLog {
    pub fn new(seed: u64) -> Self {
        TrainingLog {
            seed,
            epochs: Vec::new(),
        }
    }

    pub fn final_loss(&self) -> Option<f64> {
        self.epochs.last().map(|e| e.loss)
    }

    /// Tab-separated `epoch<TAB>loss` lines under a `# seed` comment.
    pub fn to_tsv(&self) -> String {
        let mut out = format!("# seed\t{}\nepoch\tloss\n", self.seed);
        for e in &self.epochs {
            out.push_str(&format!("{}\t{}\n", e.epoch, e.loss));
        }
        out
    }
}

/// Hyperparameters shared by both sequence models' training loops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct LoopSettings {
    pub batch_size: usize,
    pub clip_norm: f64,
    pub seed: u64,
}

/// A model trained by teacher-forced next-token cross-entropy.
pub(crate) trait SequenceObjective {
    type Params: Parameters + Clone;
    type Example;

    fn params(&self) -> &Self::Params;
    fn params_mut(&mut self) -> &mut Self::Params;

    /// Adds the gradient of the summed token losses of `example` to `grads`.
    /// Returns `(summed loss, token count)`.
    fn accumulate(
        &self,
        example: &Self::Example,
        dropout: Option<&mut ModelRng>,
        grads: &mut Self::Params,
    ) -> (f64, usize);
}

/// One pass over `examples` in a seed- and epoch-determined order. Each
/// batch's gradient is the mean over its tokens, clipped by global norm.
pub(crate) fn run_epoch<M: SequenceObjective>(
    model: &mut M,
    adam: &mut AdamState,
    examples: &[M::Example],
    settings: LoopSettings,
    epoch: usize,
    use_dropout: bool,
) -> Result<f64> {
    let mut order: Vec<usize> = (0..examples.len()).collect();
    order.shuffle(&mut rng::derive(settings.seed, rng::SHUFFLE, epoch as u64, 0));

    let mut grads = model.params().clone();
    let mut total_loss = 0.0;
    let mut total_tokens = 0usize;
    for batch in order.chunks(settings.batch_size.max(1)) {
        grads.zero();
        let mut batch_tokens = 0;
        for &i in batch {
            let mut r = rng::derive(settings.seed, rng::DROPOUT, epoch as u64, i as u64);
            let (loss, tokens) = model.accumulate(&examples[i], use_dropout.then_some(&mut r), &mut grads);
            total_loss += loss;
            batch_tokens += tokens;
        }
        if batch_tokens == 0 {
            continue;
        }
        total_tokens += batch_tokens;
        grads.scale(1.0 / batch_tokens as f64);
        if !grads.all_finite() {
            return Err(Error::Divergence {
                epoch,
                detail: "non-finite gradient".into(),
            });
        }
        clip_global_norm(&mut grads, settings.clip_norm);
        adam.step(model.params_mut(), &grads)?;
    }
    let mean = total_loss / total_tokens.max(1) as f64;
    if !mean.is_finite() || !model.params().all_finite() {
        return Err(Error::Divergence {
            epoch,
            detail: format!("loss {mean}"),
        });
    }
    Ok(mean)
}
