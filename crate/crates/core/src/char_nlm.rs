//! Character-level LSTM language model generating query completions
//! character by character, scored by the product of next-character
//! probabilities.

use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::decoding::{beam_search_filtered, BeamConfig, StepModel};
use crate::nn::checkpoint::{self, Checkpoint};
use crate::nn::ops::{apply_mask, log_softmax_unchecked, softmax_unchecked};
use crate::nn::rng::{self, ModelRng};
use crate::nn::training::{run_epoch, LoopSettings, SequenceObjective};
use crate::nn::{
    prefixed, AdamConfig, AdamState, Dropout, Embedding, Linear, LstmCell, Matrix, Parameters, TrainingLog,
};
use crate::suggestion::{classify, rank_order, Suggestion};
use crate::{normalize_text, Error, Result, TextCorpus};

pub const KIND: &str = "char_nlm";

pub const BOS: usize = 0;
pub const EOS: usize = 1;
pub const UNK: usize = 2;
const RESERVED: [&str; 3] = ["<bos>", "<eos>", "<unk>"];

/// Characters seen in training, after the three reserved symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharVocab {
    chars: Vec<char>,
    index: HashMap<char, usize>,
}

impl CharVocab {
    pub fn from_chars<I: IntoIterator<Item = char>>(chars: I) -> Self {
        let chars: Vec<char> = chars.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        let index = chars
            .iter()
            .enumerate()
            .map(|(i, &c)| (c, i + RESERVED.len()))
            .collect();
        CharVocab { chars, index }
    }

    pub fn from_corpus(corpus: &TextCorpus) -> Self {
        Self::from_chars(corpus.entries().iter().flat_map(|e| e.chars()))
    }

    pub fn len(&self) -> usize {
        RESERVED.len() + self.chars.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn encode(&self, c: char) -> usize {
        self.index.get(&c).copied().unwrap_or(UNK)
    }

    pub fn decode(&self, index: usize) -> Option<char> {
        index
            .checked_sub(RESERVED.len())
            .and_then(|i| self.chars.get(i).copied())
    }

    pub fn symbols(&self) -> Vec<String> {
        RESERVED
            .iter()
            .map(|s| s.to_string())
            .chain(self.chars.iter().map(|c| c.to_string()))
            .collect()
    }

    pub fn from_symbols(symbols: &[String]) -> Result<Self> {
        if symbols.len() < RESERVED.len() || symbols[..RESERVED.len()] != RESERVED {
            return Err(Error::Checkpoint("vocabulary lacks reserved symbols".into()));
        }
        let mut chars = Vec::new();
        for s in &symbols[RESERVED.len()..] {
            let mut it = s.chars();
            match (it.next(), it.next()) {
                (Some(c), None) => chars.push(c),
                _ => return Err(Error::Checkpoint(format!("bad vocabulary symbol {s:?}"))),
            }
        }
        let vocab = Self::from_chars(chars.iter().copied());
        if vocab.chars != chars {
            return Err(Error::Checkpoint("vocabulary symbols not sorted and unique".into()));
        }
        Ok(vocab)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CharLmConfig {
    pub hidden_dim: usize,
    pub embed_dim: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub dropout: f64,
    pub clip_norm: f64,
    pub seed: u64,
}

impl Default for CharLmConfig {
    fn default() -> Self {
        CharLmConfig {
            hidden_dim: 64,
            embed_dim: 32,
            epochs: 30,
            batch_size: 16,
            learning_rate: 1e-3,
            dropout: 0.0,
            clip_norm: 5.0,
            seed: 0,
        }
    }
}

impl CharLmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden_dim == 0 || self.embed_dim == 0 || self.batch_size == 0 {
            return Err(Error::Parameter(
                "hidden_dim, embed_dim and batch_size must be positive".into(),
            ));
        }
        if self.clip_norm.is_nan() || self.clip_norm <= 0.0 {
            return Err(Error::Parameter(format!("clip_norm = {}", self.clip_norm)));
        }
        Dropout::new(self.dropout)?;
        AdamConfig::with_learning_rate(self.learning_rate).validate()
    }
}

/// Embedding, one LSTM layer and a projection to vocabulary logits.
#[derive(Debug, Clone, PartialEq)]
pub struct CharLmParams {
    pub embedding: Embedding,
    pub lstm: LstmCell,
    pub output: Linear,
}

impl CharLmParams {
    pub fn zeros(vocab_size: usize, embed_dim: usize, hidden_dim: usize) -> Self {
        CharLmParams {
            embedding: Embedding::zeros(vocab_size, embed_dim),
            lstm: LstmCell::zeros(embed_dim, hidden_dim),
            output: Linear::zeros(hidden_dim, vocab_size),
        }
    }

    fn check(&self, vocab_size: usize) -> Result<()> {
        let ok = self.embedding.vocab_size() == vocab_size
            && self.lstm.input_dim() == self.embedding.dim()
            && self.output.input_dim() == self.lstm.hidden_dim()
            && self.output.output_dim() == vocab_size;
        if ok {
            Ok(())
        } else {
            Err(Error::Shape("char LM parameter shapes are inconsistent".into()))
        }
    }
}

impl Parameters for CharLmParams {
    fn tensors(&self) -> Vec<(String, &Matrix)> {
        prefixed("embedding", self.embedding.tensors())
            .chain(prefixed("lstm", self.lstm.tensors()))
            .chain(prefixed("output", self.output.tensors()))
            .collect()
    }

    fn tensors_mut(&mut self) -> Vec<&mut Matrix> {
        let mut v = self.embedding.tensors_mut();
        v.extend(self.lstm.tensors_mut());
        v.extend(self.output.tensors_mut());
        v
    }
}

/// Recurrent state after some prefix.
#[derive(Debug, Clone, PartialEq)]
pub struct LmState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CharLm {
    vocab: CharVocab,
    params: CharLmParams,
    config: CharLmConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NlmDecodeOptions {
    pub beam_width: usize,
    pub k: usize,
    pub max_chars: usize,
    /// Continue after an implicit space when `q0` does not end in one, so
    /// suggestions extend the query by whole words.
    pub append_space: bool,
    pub length_normalize: bool,
}

impl Default for NlmDecodeOptions {
    fn default() -> Self {
        NlmDecodeOptions {
            beam_width: 30,
            k: 20,
            max_chars: 60,
            append_space: true,
            length_normalize: false,
        }
    }
}

impl CharLm {
    /// Randomly initialized model over `vocab`.
    pub fn new(vocab: CharVocab, config: CharLmConfig) -> Result<Self> {
        config.validate()?;
        let mut r = rng::seeded(config.seed, rng::INIT);
        let v = vocab.len();
        let params = CharLmParams {
            embedding: Embedding::new(v, config.embed_dim, &mut r),
            lstm: LstmCell::new(config.embed_dim, config.hidden_dim, &mut r),
            output: Linear::new(config.hidden_dim, v, &mut r),
        };
        Ok(CharLm { vocab, params, config })
    }

    /// Model with explicit parameters; dimensions in `config` are taken
    /// from the parameters.
    pub fn from_parts(vocab: CharVocab, params: CharLmParams, mut config: CharLmConfig) -> Result<Self> {
        params.check(vocab.len())?;
        config.hidden_dim = params.lstm.hidden_dim();
        config.embed_dim = params.embedding.dim();
        Ok(CharLm { vocab, params, config })
    }

    pub fn vocab(&self) -> &CharVocab {
        &self.vocab
    }

    pub fn params(&self) -> &CharLmParams {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut CharLmParams {
        &mut self.params
    }

    pub fn config(&self) -> &CharLmConfig {
        &self.config
    }

    pub fn initial_state(&self) -> LmState {
        let n = self.params.lstm.hidden_dim();
        LmState {
            h: vec![0.0; n],
            c: vec![0.0; n],
        }
    }

    fn feed(&self, state: &LmState, token: usize) -> LmState {
        let x = self.params.embedding.row(token);
        let t = self.params.lstm.forward(x, &state.h, &state.c);
        LmState { h: t.h, c: t.c }
    }

    fn logits(&self, state: &LmState) -> Vec<f64> {
        self.params.output.forward(&state.h)
    }

    /// State after `BOS ⊕ context`, unknown characters mapped to UNK.
    pub fn state_after(&self, context: &str) -> LmState {
        let mut s = self.feed(&self.initial_state(), BOS);
        for c in context.chars() {
            s = self.feed(&s, self.vocab.encode(c));
        }
        s
    }

    /// `P(c_next | BOS ⊕ context)` over the whole vocabulary.
    pub fn next_char_dist(&self, context: &str) -> Vec<f64> {
        softmax_unchecked(&self.logits(&self.state_after(context)))
    }

    /// `ln P(continuation | context)`, including the end-of-sequence step
    /// when `terminated`.
    pub fn continuation_log_prob(&self, context: &str, continuation: &str, terminated: bool) -> f64 {
        let mut state = self.state_after(context);
        let mut total = 0.0;
        for c in continuation.chars() {
            let lp = log_softmax_unchecked(&self.logits(&state));
            let t = self.vocab.encode(c);
            total += lp[t];
            state = self.feed(&state, t);
        }
        if terminated {
            total += log_softmax_unchecked(&self.logits(&state))[EOS];
        }
        total
    }

    /// Training tokens `BOS c1 … cn EOS` for one text.
    pub fn encode_sequence(&self, text: &str) -> Vec<usize> {
        std::iter::once(BOS)
            .chain(text.chars().map(|c| self.vocab.encode(c)))
            .chain(std::iter::once(EOS))
            .collect()
    }

    /// Summed next-token cross-entropy of one encoded sequence, dropout off.
    pub fn sequence_loss(&self, tokens: &[usize]) -> f64 {
        let mut state = self.initial_state();
        let mut loss = 0.0;
        for w in tokens.windows(2) {
            state = self.feed(&state, w[0]);
            loss -= log_softmax_unchecked(&self.logits(&state))[w[1]];
        }
        loss
    }

    /// Summed loss of `tokens` and its gradient, accumulated into `grads`.
    pub fn loss_and_gradient(
        &self,
        tokens: &[usize],
        mut dropout: Option<&mut ModelRng>,
        grads: &mut CharLmParams,
    ) -> f64 {
        let p = &self.params;
        let drop = Dropout::new(self.config.dropout).expect("validated config");
        let training = dropout.is_some();
        let (e, h) = (p.embedding.dim(), p.lstm.hidden_dim());

        struct Step {
            input_mask: Option<Vec<f64>>,
            output_mask: Option<Vec<f64>>,
            trace: crate::nn::LstmTrace,
            features: Vec<f64>,
            probs: Vec<f64>,
        }

        let mut steps = Vec::with_capacity(tokens.len());
        let mut state = self.initial_state();
        let mut loss = 0.0;
        for w in tokens.windows(2) {
            let (input, target) = (w[0], w[1]);
            let mut x = p.embedding.row(input).to_vec();
            let input_mask = dropout.as_deref_mut().and_then(|r| drop.mask(e, training, r));
            apply_mask(&mut x, input_mask.as_deref());
            let trace = p.lstm.forward(&x, &state.h, &state.c);
            let mut features = trace.h.clone();
            let output_mask = dropout.as_deref_mut().and_then(|r| drop.mask(h, training, r));
            apply_mask(&mut features, output_mask.as_deref());
            let lp = log_softmax_unchecked(&p.output.forward(&features));
            loss -= lp[target];
            state = LmState {
                h: trace.h.clone(),
                c: trace.c.clone(),
            };
            steps.push(Step {
                input_mask,
                output_mask,
                trace,
                features,
                probs: lp.iter().map(|v| v.exp()).collect(),
            });
        }

        let mut dh_next = vec![0.0; h];
        let mut dc_next = vec![0.0; h];
        for (step, w) in steps.iter().zip(tokens.windows(2)).rev() {
            let mut dlogits = step.probs.clone();
            dlogits[w[1]] -= 1.0;
            let mut dh = p.output.backward(&step.features, &dlogits, &mut grads.output);
            apply_mask(&mut dh, step.output_mask.as_deref());
            for (a, b) in dh.iter_mut().zip(&dh_next) {
                *a += b;
            }
            let g = p.lstm.backward(&step.trace, &dh, &dc_next, &mut grads.lstm);
            let mut dx = g.dx;
            apply_mask(&mut dx, step.input_mask.as_deref());
            grads.embedding.accumulate_row(w[0], &dx);
            dh_next = g.dh_prev;
            dc_next = g.dc_prev;
        }
        loss
    }

    /// Beam-searched completions of `q0`, best first.
    ///
    /// The score of `q = q0 ⊕ s` is the product of the probabilities of every
    /// character of `s` (the implicit space included) and of end-of-sequence.
    /// Hypotheses that reach `max_chars` without ending are kept and flagged
    /// `truncated`. Generations that are empty or not in normalized form are
    /// dropped.
    pub fn suggest(&self, q0: &str, options: &NlmDecodeOptions) -> Result<Vec<Suggestion>> {
        let q0 = normalize_text(q0);
        if q0.is_empty() {
            return Err(Error::EmptyInput("initial query is empty".into()));
        }
        if options.k == 0 {
            return Err(Error::Parameter("k must be at least 1".into()));
        }
        let mut prefix = q0.clone();
        let mut state = self.state_after(&q0);
        let mut next = log_softmax_unchecked(&self.logits(&state));
        let mut forced = 0.0;
        if options.append_space && !q0.ends_with(' ') && self.vocab.encode(' ') != UNK {
            let space = self.vocab.encode(' ');
            forced = next[space];
            state = self.feed(&state, space);
            next = log_softmax_unchecked(&self.logits(&state));
            prefix.push(' ');
        }

        let config = BeamConfig {
            width: options.beam_width,
            max_len: options.max_chars,
            eos: EOS,
            banned: vec![BOS, UNK],
            k: options.k,
            length_normalize: options.length_normalize,
        };
        let accept = |tokens: &[usize]| {
            let generated: String = tokens.iter().filter_map(|&t| self.vocab.decode(t)).collect();
            let text = format!("{prefix}{generated}");
            !generated.trim().is_empty() && normalize_text(&text) == text
        };
        let hyps = beam_search_filtered(self, state, next, &config, accept)?;

        let mut seen = HashSet::new();
        let mut out: Vec<Suggestion> = Vec::new();
        for hyp in hyps {
            let generated: String = hyp.tokens.iter().filter_map(|&t| self.vocab.decode(t)).collect();
            let text = format!("{prefix}{generated}");
            if generated.trim().is_empty() || normalize_text(&text) != text || !seen.insert(text.clone()) {
                continue;
            }
            let flavor = classify(&q0, &text);
            out.push(Suggestion::from_log_score(
                text,
                forced + hyp.log_prob,
                flavor,
                !hyp.finished,
            ));
        }
        let ln = options.length_normalize;
        let key = |s: &Suggestion| {
            if ln {
                let steps = s.text.chars().count() - q0.chars().count() + usize::from(!s.truncated);
                s.log_score / steps as f64
            } else {
                s.log_score
            }
        };
        out.sort_by(|a, b| rank_order((key(a), &a.text), (key(b), &b.text)));
        out.truncate(options.k);
        Ok(out)
    }

    pub fn to_checkpoint(&self, log: &TrainingLog, adam: Option<&AdamState>, source: Option<&str>) -> Checkpoint {
        Checkpoint {
            format_version: checkpoint::FORMAT_VERSION,
            kind: KIND.into(),
            source: source.map(str::to_string),
            seed: self.config.seed,
            dims: [
                ("vocab_size".to_string(), self.vocab.len()),
                ("embed_dim".to_string(), self.config.embed_dim),
                ("hidden_dim".to_string(), self.config.hidden_dim),
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
        let vocab = CharVocab::from_symbols(&ckpt.vocabulary)?;
        let config: CharLmConfig = serde_json::from_value(ckpt.hyperparameters.clone())
            .map_err(|e| Error::Checkpoint(format!("hyperparameters: {e}")))?;
        if ckpt.dim("vocab_size")? != vocab.len() {
            return Err(Error::Checkpoint("vocab_size disagrees with vocabulary".into()));
        }
        let mut params = CharLmParams::zeros(vocab.len(), ckpt.dim("embed_dim")?, ckpt.dim("hidden_dim")?);
        checkpoint::restore_tensors(&mut params, &ckpt.tensors)?;
        Self::from_parts(vocab, params, config)
    }
}

impl StepModel for CharLm {
    type State = LmState;

    fn advance(&self, state: &LmState, token: usize) -> (LmState, Vec<f64>) {
        let s = self.feed(state, token);
        let lp = log_softmax_unchecked(&self.logits(&s));
        (s, lp)
    }
}

impl SequenceObjective for CharLm {
    type Params = CharLmParams;
    type Example = Vec<usize>;

    fn params(&self) -> &CharLmParams {
        &self.params
    }

    fn params_mut(&mut self) -> &mut CharLmParams {
        &mut self.params
    }

    fn accumulate(
        &self,
        tokens: &Vec<usize>,
        dropout: Option<&mut ModelRng>,
        grads: &mut CharLmParams,
    ) -> (f64, usize) {
        (self.loss_and_gradient(tokens, dropout, grads), tokens.len() - 1)
    }
}

/// Incremental trainer; checkpoints carry its optimizer state so a resumed
/// run continues exactly where it stopped.
#[derive(Debug, Clone)]
pub struct CharLmTrainer {
    model: CharLm,
    adam: AdamState,
    log: TrainingLog,
    sequences: Vec<Vec<usize>>,
}

impl CharLmTrainer {
    pub fn new(corpus: &TextCorpus, config: CharLmConfig) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::EmptyInput("character LM needs a non-empty corpus".into()));
        }
        let model = CharLm::new(CharVocab::from_corpus(corpus), config)?;
        let adam = AdamState::new(
            AdamConfig::with_learning_rate(model.config.learning_rate),
            &model.params,
        )?;
        let log = TrainingLog::new(model.config.seed);
        Ok(Self::assemble(model, adam, log, corpus))
    }

    /// Continues from a checkpoint. Without saved optimizer state a fresh
    /// optimizer is started.
    pub fn resume(ckpt: &Checkpoint, corpus: &TextCorpus) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::EmptyInput("character LM needs a non-empty corpus".into()));
        }
        let model = CharLm::from_checkpoint(ckpt)?;
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
        Ok(Self::assemble(model, adam, log, corpus))
    }

    fn assemble(model: CharLm, adam: AdamState, log: TrainingLog, corpus: &TextCorpus) -> Self {
        let sequences = corpus.entries().iter().map(|e| model.encode_sequence(e)).collect();
        CharLmTrainer {
            model,
            adam,
            log,
            sequences,
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
                &self.sequences,
                settings,
                epoch,
                use_dropout,
            )?;
            self.log.epochs.push(crate::nn::EpochRecord { epoch, loss });
        }
        Ok(())
    }

    pub fn model(&self) -> &CharLm {
        &self.model
    }

    pub fn log(&self) -> &TrainingLog {
        &self.log
    }

    pub fn checkpoint(&self, source: Option<&str>) -> Checkpoint {
        self.model.to_checkpoint(&self.log, Some(&self.adam), source)
    }

    pub fn finish(self) -> (CharLm, TrainingLog) {
        (self.model, self.log)
    }
}

/// Builds the vocabulary from `corpus` and trains for `config.epochs`.
pub fn train_char_nlm(corpus: &TextCorpus, config: CharLmConfig) -> Result<(CharLm, TrainingLog)> {
    let epochs = config.epochs;
    let mut trainer = CharLmTrainer::new(corpus, config)?;
    trainer.run_epochs(epochs)?;
    Ok(trainer.finish())
}
