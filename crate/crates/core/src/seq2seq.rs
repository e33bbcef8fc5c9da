//! Word-level encoder-decoder: a bidirectional GRU encodes the initial
//! query into a context vector, and a GRU decoder conditioned on that
//! context at every step generates suggestions word by word.
//!
//! The context is the concatenation of the forward chain's last state and
//! the backward chain's last state. The decoder's initial state is
//! `tanh(W c + b)`; its input at each step is `[embedding(w'_{i-1}); c]`
//! and the softmax classifier reads `[h'_i; embedding(w'_{i-1}); c]`.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::decoding::{beam_search_filtered, BeamConfig, StepModel};
use crate::nn::checkpoint::{self, Checkpoint};
use crate::nn::ops::{apply_mask, log_softmax_unchecked, softmax_unchecked};
use crate::nn::rng::{self, ModelRng};
use crate::nn::training::{run_epoch, LoopSettings, SequenceObjective};
use crate::nn::{
    prefixed, AdamConfig, AdamState, Dropout, Embedding, GruCell, GruTrace, Linear, Matrix, Parameters, TrainingLog,
};
use crate::suggestion::{classify, rank_order, Suggestion};
use crate::{Error, PairCorpus, Result};

pub const KIND: &str = "seq2seq";

pub const BOS: usize = 0;
pub const EOS: usize = 1;
pub const UNK: usize = 2;
const RESERVED: [&str; 3] = ["<bos>", "<eos>", "<unk>"];

/// Words seen at least `min_count` times across sources and targets, in
/// lexicographic order after the reserved symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordVocab {
    words: Vec<String>,
    index: HashMap<String, usize>,
}

impl WordVocab {
    pub fn from_pairs(pairs: &PairCorpus, min_count: u64) -> Self {
        let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
        for (s, t) in pairs.pairs() {
            for w in s.split(' ').chain(t.split(' ')) {
                *counts.entry(w).or_default() += 1;
            }
        }
        Self::from_words(
            counts
                .into_iter()
                .filter(|(_, c)| *c >= min_count.max(1))
                .map(|(w, _)| w.to_string()),
        )
    }

    fn from_words<I: IntoIterator<Item = String>>(words: I) -> Self {
        let mut words: Vec<String> = words.into_iter().collect();
        words.sort();
        words.dedup();
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i + RESERVED.len()))
            .collect();
        WordVocab { words, index }
    }

    pub fn len(&self) -> usize {
        RESERVED.len() + self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn encode(&self, word: &str) -> usize {
        self.index.get(word).copied().unwrap_or(UNK)
    }

    pub fn encode_text(&self, text: &str) -> Vec<usize> {
        text.split_whitespace().map(|w| self.encode(w)).collect()
    }

    pub fn decode(&self, index: usize) -> Option<&str> {
        index
            .checked_sub(RESERVED.len())
            .and_then(|i| self.words.get(i))
            .map(String::as_str)
    }

    pub fn symbols(&self) -> Vec<String> {
        RESERVED
            .iter()
            .map(|s| s.to_string())
            .chain(self.words.iter().cloned())
            .collect()
    }

    pub fn from_symbols(symbols: &[String]) -> Result<Self> {
        if symbols.len() < RESERVED.len() || symbols[..RESERVED.len()] != RESERVED {
            return Err(Error::Checkpoint("vocabulary lacks reserved symbols".into()));
        }
        let rest = &symbols[RESERVED.len()..];
        let vocab = Self::from_words(rest.iter().cloned());
        if vocab.words != rest || rest.iter().any(|w| w.is_empty() || w.contains(' ')) {
            return Err(Error::Checkpoint(
                "vocabulary words not sorted, unique single words".into(),
            ));
        }
        Ok(vocab)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Seq2SeqConfig {
    pub embed_dim: usize,
    /// Size of each encoder direction.
    pub encoder_dim: usize,
    pub decoder_dim: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub dropout: f64,
    pub min_count: u64,
    pub clip_norm: f64,
    pub seed: u64,
}

impl Default for Seq2SeqConfig {
    fn default() -> Self {
        Seq2SeqConfig {
            embed_dim: 64,
            encoder_dim: 100,
            decoder_dim: 200,
            epochs: 10,
            batch_size: 32,
            learning_rate: 1e-4,
            dropout: 0.5,
            min_count: 2,
            clip_norm: 5.0,
            seed: 0,
        }
    }
}

impl Seq2SeqConfig {
    pub fn validate(&self) -> Result<()> {
        if self.embed_dim == 0 || self.encoder_dim == 0 || self.decoder_dim == 0 || self.batch_size == 0 {
            return Err(Error::Parameter("dimensions and batch_size must be positive".into()));
        }
        if self.clip_norm.is_nan() || self.clip_norm <= 0.0 {
            return Err(Error::Parameter(format!("clip_norm = {}", self.clip_norm)));
        }
        Dropout::new(self.dropout)?;
        AdamConfig::with_learning_rate(self.learning_rate).validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Seq2SeqParams {
    pub embedding: Embedding,
    pub encoder_fwd: GruCell,
    pub encoder_bwd: GruCell,
    /// Context → initial decoder state.
    pub bridge: Linear,
    pub decoder: GruCell,
    /// `[h'; embedding(w_prev); c]` → vocabulary logits.
    pub output: Linear,
}

impl Seq2SeqParams {
    pub fn zeros(vocab_size: usize, embed_dim: usize, encoder_dim: usize, decoder_dim: usize) -> Self {
        let context = 2 * encoder_dim;
        Seq2SeqParams {
            embedding: Embedding::zeros(vocab_size, embed_dim),
            encoder_fwd: GruCell::zeros(embed_dim, encoder_dim),
            encoder_bwd: GruCell::zeros(embed_dim, encoder_dim),
            bridge: Linear::zeros(context, decoder_dim),
            decoder: GruCell::zeros(embed_dim + context, decoder_dim),
            output: Linear::zeros(decoder_dim + embed_dim + context, vocab_size),
        }
    }

    pub fn embed_dim(&self) -> usize {
        self.embedding.dim()
    }

    pub fn encoder_dim(&self) -> usize {
        self.encoder_fwd.hidden_dim()
    }

    pub fn context_dim(&self) -> usize {
        2 * self.encoder_dim()
    }

    pub fn decoder_dim(&self) -> usize {
        self.decoder.hidden_dim()
    }

    fn check(&self, vocab_size: usize) -> Result<()> {
        let (e, enc, ctx, d) = (
            self.embed_dim(),
            self.encoder_dim(),
            self.context_dim(),
            self.decoder_dim(),
        );
        let ok = self.embedding.vocab_size() == vocab_size
            && self.encoder_fwd.input_dim() == e
            && self.encoder_bwd.input_dim() == e
            && self.encoder_bwd.hidden_dim() == enc
            && self.bridge.input_dim() == ctx
            && self.bridge.output_dim() == d
            && self.decoder.input_dim() == e + ctx
            && self.output.input_dim() == d + e + ctx
            && self.output.output_dim() == vocab_size;
        if ok {
            Ok(())
        } else {
            Err(Error::Shape("seq2seq parameter shapes are inconsistent".into()))
        }
    }
}

impl Parameters for Seq2SeqParams {
    fn tensors(&self) -> Vec<(String, &Matrix)> {
        prefixed("embedding", self.embedding.tensors())
            .chain(prefixed("encoder_fwd", self.encoder_fwd.tensors()))
            .chain(prefixed("encoder_bwd", self.encoder_bwd.tensors()))
            .chain(prefixed("bridge", self.bridge.tensors()))
            .chain(prefixed("decoder", self.decoder.tensors()))
            .chain(prefixed("output", self.output.tensors()))
            .collect()
    }

    fn tensors_mut(&mut self) -> Vec<&mut Matrix> {
        let mut v = self.embedding.tensors_mut();
        v.extend(self.encoder_fwd.tensors_mut());
        v.extend(self.encoder_bwd.tensors_mut());
        v.extend(self.bridge.tensors_mut());
        v.extend(self.decoder.tensors_mut());
        v.extend(self.output.tensors_mut());
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Seq2SeqModel {
    vocab: WordVocab,
    params: Seq2SeqParams,
    config: Seq2SeqConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Seq2SeqDecodeOptions {
    pub beam_width: usize,
    pub k: usize,
    pub max_words: usize,
    pub length_normalize: bool,
}

impl Default for Seq2SeqDecodeOptions {
    fn default() -> Self {
        Seq2SeqDecodeOptions {
            beam_width: 100,
            k: 20,
            max_words: 12,
            length_normalize: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Seq2SeqSuggestions {
    pub suggestions: Vec<Suggestion>,
    /// Every word of the initial query was out of vocabulary, so the
    /// suggestions carry no information about it.
    pub source_all_unknown: bool,
}

struct EncoderPass {
    inputs: Vec<Vec<f64>>,
    masks: Vec<Option<Vec<f64>>>,
    forward: Vec<GruTrace>,
    /// Indexed by source position.
    backward: Vec<GruTrace>,
    context: Vec<f64>,
}

impl Seq2SeqModel {
    pub fn new(vocab: WordVocab, config: Seq2SeqConfig) -> Result<Self> {
        config.validate()?;
        let mut r = rng::seeded(config.seed, rng::INIT);
        let (v, e, enc, d) = (vocab.len(), config.embed_dim, config.encoder_dim, config.decoder_dim);
        let ctx = 2 * enc;
        let params = Seq2SeqParams {
            embedding: Embedding::new(v, e, &mut r),
            encoder_fwd: GruCell::new(e, enc, &mut r),
            encoder_bwd: GruCell::new(e, enc, &mut r),
            bridge: Linear::new(ctx, d, &mut r),
            decoder: GruCell::new(e + ctx, d, &mut r),
            output: Linear::new(d + e + ctx, v, &mut r),
        };
        Ok(Seq2SeqModel { vocab, params, config })
    }

    pub fn from_parts(vocab: WordVocab, params: Seq2SeqParams, mut config: Seq2SeqConfig) -> Result<Self> {
        params.check(vocab.len())?;
        config.embed_dim = params.embed_dim();
        config.encoder_dim = params.encoder_dim();
        config.decoder_dim = params.decoder_dim();
        Ok(Seq2SeqModel { vocab, params, config })
    }

    pub fn vocab(&self) -> &WordVocab {
        &self.vocab
    }

    pub fn params(&self) -> &Seq2SeqParams {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut Seq2SeqParams {
        &mut self.params
    }

    pub fn config(&self) -> &Seq2SeqConfig {
        &self.config
    }

    fn run_encoder(&self, source: &[usize], mut dropout: Option<&mut ModelRng>) -> EncoderPass {
        let p = &self.params;
        let drop = Dropout::new(self.config.dropout).expect("validated config");
        let mut inputs = Vec::with_capacity(source.len());
        let mut masks = Vec::with_capacity(source.len());
        for &w in source {
            let mut x = p.embedding.row(w).to_vec();
            let m = dropout.as_deref_mut().and_then(|r| drop.mask(x.len(), true, r));
            apply_mask(&mut x, m.as_deref());
            inputs.push(x);
            masks.push(m);
        }
        let n = p.encoder_dim();
        let mut forward = Vec::with_capacity(source.len());
        let mut h = vec![0.0; n];
        for x in &inputs {
            let t = p.encoder_fwd.forward(x, &h);
            h = t.h.clone();
            forward.push(t);
        }
        let mut backward: Vec<GruTrace> = Vec::with_capacity(source.len());
        let mut h = vec![0.0; n];
        for x in inputs.iter().rev() {
            let t = p.encoder_bwd.forward(x, &h);
            h = t.h.clone();
            backward.push(t);
        }
        backward.reverse();
        let mut context = forward.last().map(|t| t.h.clone()).unwrap_or_else(|| vec![0.0; n]);
        context.extend_from_slice(backward.first().map(|t| t.h.as_slice()).unwrap_or(&vec![0.0; n]));
        EncoderPass {
            inputs,
            masks,
            forward,
            backward,
            context,
        }
    }

    /// Context vector for `q0`: last forward state ⊕ last backward state.
    pub fn encode(&self, q0: &str) -> Result<Vec<f64>> {
        let source = self.vocab.encode_text(q0);
        if source.is_empty() {
            return Err(Error::EmptyInput("initial query has no words".into()));
        }
        Ok(self.run_encoder(&source, None).context)
    }

    /// Decoder state before the first word.
    pub fn initial_decoder_state(&self, context: &[f64]) -> Vec<f64> {
        self.params.bridge.forward(context).into_iter().map(f64::tanh).collect()
    }

    fn classifier_input(&self, h: &[f64], prev: &[f64], context: &[f64]) -> Vec<f64> {
        let mut o = Vec::with_capacity(h.len() + prev.len() + context.len());
        o.extend_from_slice(h);
        o.extend_from_slice(prev);
        o.extend_from_slice(context);
        o
    }

    fn decoder_input(&self, prev: &[f64], context: &[f64]) -> Vec<f64> {
        let mut u = Vec::with_capacity(prev.len() + context.len());
        u.extend_from_slice(prev);
        u.extend_from_slice(context);
        u
    }

    fn step_logits(&self, h_prev: &[f64], prev_word: usize, context: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let e = self.params.embedding.row(prev_word);
        let h = self.params.decoder.forward(&self.decoder_input(e, context), h_prev).h;
        let logits = self.params.output.forward(&self.classifier_input(&h, e, context));
        (logits, h)
    }

    /// One decoder step: the distribution over the next word and the new
    /// decoder state.
    pub fn decode_step(&self, h_prev: &[f64], prev_word: usize, context: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        crate::nn::matrix_check("decoder state", h_prev.len(), self.params.decoder_dim())?;
        crate::nn::matrix_check("context", context.len(), self.params.context_dim())?;
        if prev_word >= self.vocab.len() {
            return Err(Error::Shape(format!("word index {prev_word} out of range")));
        }
        let (logits, h) = self.step_logits(h_prev, prev_word, context);
        Ok((softmax_unchecked(&logits), h))
    }

    /// `ln P(target | source)` with end-of-sequence, recomputed step by step.
    pub fn target_log_prob(&self, source: &str, target: &str, terminated: bool) -> Result<f64> {
        let context = self.encode(source)?;
        let mut h = self.initial_decoder_state(&context);
        let mut prev = BOS;
        let mut total = 0.0;
        let words = self.vocab.encode_text(target);
        let ends = terminated.then_some(EOS);
        for w in words.into_iter().chain(ends) {
            let (probs, next_h) = self.decode_step(&h, prev, &context)?;
            total += probs[w].ln();
            h = next_h;
            prev = w;
        }
        Ok(total)
    }

    /// Summed token cross-entropy of `target` given `source`, dropout off.
    pub fn pair_loss(&self, source: &[usize], target: &[usize]) -> f64 {
        let context = self.run_encoder(source, None).context;
        let mut h = self.initial_decoder_state(&context);
        let mut prev = BOS;
        let mut loss = 0.0;
        for &w in target.iter().chain(std::iter::once(&EOS)) {
            let (logits, next_h) = self.step_logits(&h, prev, &context);
            loss -= log_softmax_unchecked(&logits)[w];
            h = next_h;
            prev = w;
        }
        loss
    }

    /// Teacher-forced summed loss of one pair and its gradient.
    pub fn loss_and_gradient(
        &self,
        source: &[usize],
        target: &[usize],
        mut dropout: Option<&mut ModelRng>,
        grads: &mut Seq2SeqParams,
    ) -> f64 {
        let p = &self.params;
        let drop = Dropout::new(self.config.dropout).expect("validated config");
        let (e, enc, ctx, d) = (p.embed_dim(), p.encoder_dim(), p.context_dim(), p.decoder_dim());

        let encoder = self.run_encoder(source, dropout.as_deref_mut());
        let c = &encoder.context;
        let bridge_out: Vec<f64> = self.initial_decoder_state(c);

        struct Step {
            prev: usize,
            target: usize,
            embed_mask: Option<Vec<f64>>,
            out_mask: Option<Vec<f64>>,
            trace: GruTrace,
            features: Vec<f64>,
            probs: Vec<f64>,
        }
        let inputs: Vec<usize> = std::iter::once(BOS).chain(target.iter().copied()).collect();
        let outputs: Vec<usize> = target.iter().copied().chain(std::iter::once(EOS)).collect();
        let mut steps = Vec::with_capacity(inputs.len());
        let mut h = bridge_out.clone();
        let mut loss = 0.0;
        for (&prev, &tgt) in inputs.iter().zip(&outputs) {
            let mut emb = p.embedding.row(prev).to_vec();
            let embed_mask = dropout.as_deref_mut().and_then(|r| drop.mask(e, true, r));
            apply_mask(&mut emb, embed_mask.as_deref());
            let trace = p.decoder.forward(&self.decoder_input(&emb, c), &h);
            let mut features = self.classifier_input(&trace.h, &emb, c);
            let out_mask = dropout.as_deref_mut().and_then(|r| drop.mask(features.len(), true, r));
            apply_mask(&mut features, out_mask.as_deref());
            let lp = log_softmax_unchecked(&p.output.forward(&features));
            loss -= lp[tgt];
            h = trace.h.clone();
            steps.push(Step {
                prev,
                target: tgt,
                embed_mask,
                out_mask,
                trace,
                features,
                probs: lp.iter().map(|v| v.exp()).collect(),
            });
        }

        let mut dc = vec![0.0; ctx];
        let mut dh_next = vec![0.0; d];
        for s in steps.iter().rev() {
            let mut dlogits = s.probs.clone();
            dlogits[s.target] -= 1.0;
            let mut dfeat = p.output.backward(&s.features, &dlogits, &mut grads.output);
            apply_mask(&mut dfeat, s.out_mask.as_deref());
            let mut dh: Vec<f64> = dfeat[..d].to_vec();
            for (a, b) in dh.iter_mut().zip(&dh_next) {
                *a += b;
            }
            let g = p.decoder.backward(&s.trace, &dh, &mut grads.decoder);
            let mut demb: Vec<f64> = (0..e).map(|k| dfeat[d + k] + g.dx[k]).collect();
            for k in 0..ctx {
                dc[k] += dfeat[d + e + k] + g.dx[e + k];
            }
            apply_mask(&mut demb, s.embed_mask.as_deref());
            grads.embedding.accumulate_row(s.prev, &demb);
            dh_next = g.dh_prev;
        }

        let dpre: Vec<f64> = dh_next
            .iter()
            .zip(&bridge_out)
            .map(|(g, y)| g * (1.0 - y * y))
            .collect();
        let dctx = p.bridge.backward(c, &dpre, &mut grads.bridge);
        for (a, b) in dc.iter_mut().zip(&dctx) {
            *a += b;
        }

        let mut dxs = vec![vec![0.0; e]; source.len()];
        let mut dh: Vec<f64> = dc[..enc].to_vec();
        for (t, trace) in encoder.forward.iter().enumerate().rev() {
            let g = p.encoder_fwd.backward(trace, &dh, &mut grads.encoder_fwd);
            dxs[t] = g.dx;
            dh = g.dh_prev;
        }
        let mut dh: Vec<f64> = dc[enc..].to_vec();
        for (t, trace) in encoder.backward.iter().enumerate() {
            let g = p.encoder_bwd.backward(trace, &dh, &mut grads.encoder_bwd);
            for (a, b) in dxs[t].iter_mut().zip(&g.dx) {
                *a += b;
            }
            dh = g.dh_prev;
        }
        for ((dx, mask), &w) in dxs.iter_mut().zip(&encoder.masks).zip(source) {
            apply_mask(dx, mask.as_deref());
            grads.embedding.accumulate_row(w, dx);
        }
        debug_assert_eq!(encoder.inputs.len(), source.len());
        loss
    }

    /// Beam-searched suggestions for `q0`, best first. Each suggestion's
    /// flavor is decided by whether `q0` is a word prefix of it.
    pub fn suggest(&self, q0: &str, options: &Seq2SeqDecodeOptions) -> Result<Seq2SeqSuggestions> {
        let source = self.vocab.encode_text(q0);
        if source.is_empty() {
            return Err(Error::EmptyInput("initial query is empty".into()));
        }
        if options.k == 0 {
            return Err(Error::Parameter("k must be at least 1".into()));
        }
        let q0_text = q0.split_whitespace().collect::<Vec<_>>().join(" ");
        let context = self.run_encoder(&source, None).context;
        let decoder = ContextDecoder {
            model: self,
            context: &context,
        };
        let (start, next) = decoder.advance(&self.initial_decoder_state(&context), BOS);
        let config = BeamConfig {
            width: options.beam_width,
            max_len: options.max_words,
            eos: EOS,
            banned: vec![BOS, UNK],
            k: options.k,
            length_normalize: options.length_normalize,
        };
        let hyps = beam_search_filtered(&decoder, start, next, &config, |t| !t.is_empty())?;

        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for hyp in hyps {
            if hyp.tokens.is_empty() {
                continue;
            }
            let text = hyp
                .tokens
                .iter()
                .filter_map(|&t| self.vocab.decode(t))
                .collect::<Vec<_>>()
                .join(" ");
            if !seen.insert(text.clone()) {
                continue;
            }
            let flavor = classify(&q0_text, &text);
            let rank = hyp.ranking_score(options.length_normalize);
            out.push((
                rank,
                Suggestion::from_log_score(text, hyp.log_prob, flavor, !hyp.finished),
            ));
        }
        out.sort_by(|a, b| rank_order((a.0, &a.1.text), (b.0, &b.1.text)));
        out.truncate(options.k);
        Ok(Seq2SeqSuggestions {
            suggestions: out.into_iter().map(|(_, s)| s).collect(),
            source_all_unknown: source.iter().all(|&w| w == UNK),
        })
    }

    pub fn to_checkpoint(&self, log: &TrainingLog, adam: Option<&AdamState>, source: Option<&str>) -> Checkpoint {
        Checkpoint {
            format_version: checkpoint::FORMAT_VERSION,
            kind: KIND.into(),
            source: source.map(str::to_string),
            seed: self.config.seed,
            dims: [
                ("vocab_size".to_string(), self.vocab.len()),
                ("embed_dim".to_string(), self.params.embed_dim()),
                ("encoder_dim".to_string(), self.params.encoder_dim()),
                ("decoder_dim".to_string(), self.params.decoder_dim()),
            ]
            .into(),
            hyperparameters: serde_json::to_value(&self.config).expect("config serializes"),
            vocabulary: self.vocab.symbols(),
            tensors: checkpoint::capture_tensors(&self.params),
            optimizer: adam.map(|a| checkpoint::capture_optimizer(a, &self.params)),
            training_log: log.epochs.clone(),
        }
    }

    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self> {
        ckpt.expect_kind(KIND)?;
        let vocab = WordVocab::from_symbols(&ckpt.vocabulary)?;
        let config: Seq2SeqConfig = serde_json::from_value(ckpt.hyperparameters.clone())
            .map_err(|e| Error::Checkpoint(format!("hyperparameters: {e}")))?;
        if ckpt.dim("vocab_size")? != vocab.len() {
            return Err(Error::Checkpoint("vocab_size disagrees with vocabulary".into()));
        }
        let mut params = Seq2SeqParams::zeros(
            vocab.len(),
            ckpt.dim("embed_dim")?,
            ckpt.dim("encoder_dim")?,
            ckpt.dim("decoder_dim")?,
        );
        checkpoint::restore_tensors(&mut params, &ckpt.tensors)?;
        Self::from_parts(vocab, params, config)
    }
}

/// The decoder with a fixed context, steppable by beam search.
pub struct ContextDecoder<'a> {
    pub model: &'a Seq2SeqModel,
    pub context: &'a [f64],
}

impl StepModel for ContextDecoder<'_> {
    type State = Vec<f64>;

    fn advance(&self, h_prev: &Vec<f64>, token: usize) -> (Vec<f64>, Vec<f64>) {
        let (logits, h) = self.model.step_logits(h_prev, token, self.context);
        (h, log_softmax_unchecked(&logits))
    }
}

impl SequenceObjective for Seq2SeqModel {
    type Params = Seq2SeqParams;
    type Example = (Vec<usize>, Vec<usize>);

    fn params(&self) -> &Seq2SeqParams {
        &self.params
    }

    fn params_mut(&mut self) -> &mut Seq2SeqParams {
        &mut self.params
    }

    fn accumulate(
        &self,
        (source, target): &(Vec<usize>, Vec<usize>),
        dropout: Option<&mut ModelRng>,
        grads: &mut Seq2SeqParams,
    ) -> (f64, usize) {
        (self.loss_and_gradient(source, target, dropout, grads), target.len() + 1)
    }
}

#[derive(Debug, Clone)]
pub struct Seq2SeqTrainer {
    model: Seq2SeqModel,
    adam: AdamState,
    log: TrainingLog,
    examples: Vec<(Vec<usize>, Vec<usize>)>,
}

impl Seq2SeqTrainer {
    pub fn new(pairs: &PairCorpus, config: Seq2SeqConfig) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::EmptyInput("seq2seq needs a non-empty pair corpus".into()));
        }
        config.validate()?;
        let vocab = WordVocab::from_pairs(pairs, config.min_count);
        let model = Seq2SeqModel::new(vocab, config)?;
        let adam = AdamState::new(
            AdamConfig::with_learning_rate(model.config.learning_rate),
            &model.params,
        )?;
        let log = TrainingLog::new(model.config.seed);
        Ok(Self::assemble(model, adam, log, pairs))
    }

    pub fn resume(ckpt: &Checkpoint, pairs: &PairCorpus) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::EmptyInput("seq2seq needs a non-empty pair corpus".into()));
        }
        let model = Seq2SeqModel::from_checkpoint(ckpt)?;
        let adam = match &ckpt.optimizer {
            Some(snap) => checkpoint::restore_optimizer(snap, &model.params)?,
            None => AdamState::new(
                AdamConfig::with_learning_rate(model.config.learning_rate),
                &model.params,
            )?,
        };
        let log = TrainingLog {
            seed: ckpt.seed,
            epochs: ckpt.training_log.clone(),
        };
        Ok(Self::assemble(model, adam, log, pairs))
    }

    fn assemble(model: Seq2SeqModel, adam: AdamState, log: TrainingLog, pairs: &PairCorpus) -> Self {
        let examples = pairs
            .pairs()
            .iter()
            .map(|(s, t)| (model.vocab.encode_text(s), model.vocab.encode_text(t)))
            .collect();
        Seq2SeqTrainer {
            model,
            adam,
            log,
            examples,
        }
    }

    /// Trains until `target` epochs are logged and records `target` as the
    /// configured epoch count.
    pub fn train_to(&mut self, target: usize) -> Result<()> {
        self.model.config.epochs = target;
        self.run_epochs(target.saturating_sub(self.log.epochs.len()))
    }

    pub fn run_epochs(&mut self, epochs: usize) -> Result<()> {
        let settings = LoopSettings {
            batch_size: self.model.config.batch_size,
            clip_norm: self.model.config.clip_norm,
            seed: self.model.config.seed,
        };
        let use_dropout = self.model.config.dropout > 0.0;
        for _ in 0..epochs {
            let epoch = self.log.epochs.len();
            let loss = run_epoch(
                &mut self.model,
                &mut self.adam,
                &self.examples,
                settings,
                epoch,
                use_dropout,
            )?;
            self.log.epochs.push(crate::nn::EpochRecord { epoch, loss });
        }
        Ok(())
    }

    pub fn model(&self) -> &Seq2SeqModel {
        &self.model
    }

    pub fn log(&self) -> &TrainingLog {
        &self.log
    }

    pub fn checkpoint(&self, source: Option<&str>) -> Checkpoint {
        self.model.to_checkpoint(&self.log, Some(&self.adam), source)
    }

    pub fn finish(self) -> (Seq2SeqModel, TrainingLog) {
        (self.model, self.log)
    }
}

pub fn train_seq2seq(pairs: &PairCorpus, config: Seq2SeqConfig) -> Result<(Seq2SeqModel, TrainingLog)> {
    let epochs = config.epochs;
    let mut trainer = Seq2SeqTrainer::new(pairs, config)?;
    trainer.run_epochs(epochs)?;
    Ok(trainer.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs() -> PairCorpus {
        [
            ("make a", "make a pancake"),
            ("make", "make a pancake"),
            ("buy", "buy flour"),
        ]
        .into_iter()
        .collect()
    }

    fn small(encoder_dim: usize) -> Seq2SeqModel {
        let vocab = WordVocab::from_pairs(&pairs(), 1);
        Seq2SeqModel::new(
            vocab,
            Seq2SeqConfig {
                embed_dim: 4,
                encoder_dim,
                decoder_dim: 6,
                ..Default::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn vocab_respects_min_count() {
        let v = WordVocab::from_pairs(&pairs(), 2);
        assert_eq!(v.symbols()[3..], ["a", "buy", "make", "pancake"]);
        assert_eq!(v.encode("flour"), UNK);
        assert_eq!(WordVocab::from_symbols(&v.symbols()).unwrap(), v);
    }

    #[test]
    fn context_has_both_directions() {
        let m = small(100);
        assert_eq!(m.encode("make a").unwrap().len(), 200);
        assert_eq!(m.encode("make").unwrap().len(), 200);
        assert!(m.encode("   ").is_err());
        assert_eq!(m.encode("make a").unwrap(), m.encode(" make  a ").unwrap());
    }

    #[test]
    fn zero_parameters_give_zero_context_and_uniform_output() {
        let vocab = WordVocab::from_pairs(&pairs(), 1);
        let v = vocab.len();
        let m = Seq2SeqModel::from_parts(vocab, Seq2SeqParams::zeros(v, 3, 4, 5), Seq2SeqConfig::default()).unwrap();
        let c = m.encode("make a pancake").unwrap();
        assert_eq!(c, vec![0.0; 8]);
        let h0 = m.initial_decoder_state(&c);
        let (probs, _) = m.decode_step(&h0, BOS, &c).unwrap();
        for p in probs {
            assert!((p - 1.0 / v as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn decode_step_is_normalized_and_deterministic() {
        let m = small(5);
        let c = m.encode("make a").unwrap();
        let h0 = m.initial_decoder_state(&c);
        let a = m.decode_step(&h0, BOS, &c).unwrap();
        let b = m.decode_step(&h0, BOS, &c).unwrap();
        assert_eq!(a, b);
        assert!((a.0.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(m.decode_step(&h0[1..], BOS, &c).is_err());
    }

    #[test]
    fn unknown_source_is_flagged() {
        let m = small(5);
        let out = m
            .suggest(
                "zzz qqq",
                &Seq2SeqDecodeOptions {
                    beam_width: 3,
                    k: 3,
                    ..Default::default()
                },
            )
            .unwrap();
        assert!(out.source_all_unknown);
        let out = m
            .suggest(
                "make zzz",
                &Seq2SeqDecodeOptions {
                    beam_width: 3,
                    k: 3,
                    ..Default::default()
                },
            )
            .unwrap();
        assert!(!out.source_all_unknown);
    }

    #[test]
    fn empty_pairs_are_rejected() {
        assert!(train_seq2seq(&PairCorpus::new(), Seq2SeqConfig::default()).is_err());
    }
}
