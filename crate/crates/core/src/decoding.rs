//! Beam search over any left-to-right token model.

use std::cmp::Ordering;

use crate::{Error, Result};

/// A model that can be stepped one token at a time.
pub trait StepModel {
    type State: Clone;

    /// Feeds `token` after `state`; returns the new state and the
    /// log-distribution over the token that follows it.
    fn advance(&self, state: &Self::State, token: usize) -> (Self::State, Vec<f64>);
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamConfig {
    pub width: usize,
    /// Maximum generated tokens, end-of-sequence excluded.
    pub max_len: usize,
    pub eos: usize,
    /// Tokens never generated (e.g. begin-of-sequence, unknown).
    pub banned: Vec<usize>,
    /// Hypotheses wanted; lets the search stop once no live beam can reach
    /// the top `k`.
    pub k: usize,
    /// Rank by log-probability per token instead of the raw product.
    pub length_normalize: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    pub tokens: Vec<usize>,
    /// Sum of per-step log-probabilities, including the end-of-sequence
    /// step when `finished`.
    pub log_prob: f64,
    pub finished: bool,
}

impl Hypothesis {
    pub fn ranking_score(&self, length_normalize: bool) -> f64 {
        if length_normalize {
            let steps = self.tokens.len() + usize::from(self.finished);
            self.log_prob / steps.max(1) as f64
        } else {
            self.log_prob
        }
    }
}

struct Live<S> {
    tokens: Vec<usize>,
    log_prob: f64,
    state: S,
    next: Vec<f64>,
}

fn by_score_then_tokens(a: (f64, &[usize]), b: (f64, &[usize])) -> Ordering {
    b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1))
}

/// Breadth-limited search from `start`, whose next-token log-distribution is
/// `start_next`.
///
/// Each step expands every live hypothesis by every allowed token; an
/// end-of-sequence expansion finishes a hypothesis, the rest compete for
/// `width` live slots. Hypotheses still live after `max_len` tokens are
/// returned unfinished. The result is every finished and unfinished
/// hypothesis, best first.
pub fn beam_search<M: StepModel>(
    model: &M,
    start: M::State,
    start_next: Vec<f64>,
    config: &BeamConfig,
) -> Result<Vec<Hypothesis>> {
    beam_search_filtered(model, start, start_next, config, |_| true)
}

/// [`beam_search`] where a hypothesis may only finish when `accept` holds
/// for its tokens, so that the early stop counts only usable outputs.
pub fn beam_search_filtered<M, F>(
    model: &M,
    start: M::State,
    start_next: Vec<f64>,
    config: &BeamConfig,
    accept: F,
) -> Result<Vec<Hypothesis>>
where
    M: StepModel,
    F: Fn(&[usize]) -> bool,
{
    if config.width == 0 {
        return Err(Error::Parameter("beam width must be at least 1".into()));
    }
    if config.eos >= start_next.len() {
        return Err(Error::Shape("end-of-sequence token outside the vocabulary".into()));
    }
    let allowed: Vec<usize> = (0..start_next.len())
        .filter(|t| *t != config.eos && !config.banned.contains(t))
        .collect();

    let mut finished: Vec<Hypothesis> = Vec::new();
    let mut live = vec![Live {
        tokens: Vec::new(),
        log_prob: 0.0,
        state: start,
        next: start_next,
    }];

    for _ in 0..config.max_len {
        let mut expansions: Vec<(f64, Vec<usize>, usize, usize)> = Vec::new();
        for (i, h) in live.iter().enumerate() {
            if accept(&h.tokens) {
                finished.push(Hypothesis {
                    tokens: h.tokens.clone(),
                    log_prob: h.log_prob + h.next[config.eos],
                    finished: true,
                });
            }
            for &t in &allowed {
                let mut tokens = h.tokens.clone();
                tokens.push(t);
                expansions.push((h.log_prob + h.next[t], tokens, i, t));
            }
        }
        expansions.sort_by(|a, b| by_score_then_tokens((a.0, &a.1), (b.0, &b.1)));
        expansions.truncate(config.width);

        live = expansions
            .into_iter()
            .map(|(log_prob, tokens, parent, t)| {
                let (state, next) = model.advance(&live[parent].state, t);
                Live {
                    tokens,
                    log_prob,
                    state,
                    next,
                }
            })
            .collect();
        if live.is_empty() {
            break;
        }
        if !config.length_normalize && finished.len() >= config.k && config.k > 0 {
            // Scores only fall as hypotheses grow, so a live beam strictly
            // below the k-th finished score can never enter the top k.
            let mut scores: Vec<f64> = finished.iter().map(|h| h.log_prob).collect();
            scores.sort_by(|a, b| b.total_cmp(a));
            let kth = scores[config.k - 1];
            if live.iter().all(|h| h.log_prob < kth) {
                live.clear();
                break;
            }
        }
    }

    let mut out = finished;
    out.extend(live.into_iter().map(|h| Hypothesis {
        tokens: h.tokens,
        log_prob: h.log_prob,
        finished: false,
    }));
    let ln = config.length_normalize;
    out.sort_by(|a, b| by_score_then_tokens((a.ranking_score(ln), &a.tokens), (b.ranking_score(ln), &b.tokens)));
    Ok(out)
}
