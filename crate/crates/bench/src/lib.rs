//! Synthetic inputs shared by the benchmarks.

use rand::seq::SliceRandom;
use rand::Rng;
use tasksuggest::char_nlm::{CharLm, CharLmConfig, CharVocab};
use tasksuggest::nn::rng;
use tasksuggest::seq2seq::{Seq2SeqConfig, Seq2SeqModel, WordVocab};
use tasksuggest::{PairCorpus, TextCorpus};

const WORDS: [&str; 24] = [
    "make", "a", "pancake", "buy", "cheap", "flights", "how", "to", "bake", "bread", "plan", "wedding", "paint",
    "room", "grow", "tomatoes", "fix", "leaky", "faucet", "learn", "swim", "write", "resume", "online",
];

/// `n` queries of one to six words drawn from a small vocabulary.
pub fn queries(n: usize, seed: u64) -> TextCorpus {
    let mut r = rng::seeded(seed, 900);
    (0..n)
        .map(|_| {
            let len = r.gen_range(1..=6);
            (0..len)
                .map(|_| *WORDS.choose(&mut r).unwrap())
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect()
}

/// Prefix/query pairs taken from `queries`.
pub fn pairs(n: usize, seed: u64) -> PairCorpus {
    let corpus = queries(n, seed);
    corpus
        .entries()
        .iter()
        .filter_map(|q| {
            let words: Vec<&str> = q.split(' ').collect();
            (words.len() > 1).then(|| (words[..words.len() / 2].join(" "), q.clone()))
        })
        .collect()
}

/// Randomly initialised character LM over the query alphabet.
pub fn char_lm(hidden_dim: usize, embed_dim: usize) -> CharLm {
    let vocab = CharVocab::from_corpus(&queries(200, 1));
    let config = CharLmConfig {
        hidden_dim,
        embed_dim,
        ..Default::default()
    };
    CharLm::new(vocab, config).expect("valid char LM config")
}

/// Randomly initialised seq2seq model over the query words.
pub fn seq2seq(embed_dim: usize, encoder_dim: usize, decoder_dim: usize) -> Seq2SeqModel {
    let vocab = WordVocab::from_pairs(&pairs(500, 2), 1);
    let config = Seq2SeqConfig {
        embed_dim,
        encoder_dim,
        decoder_dim,
        ..Default::default()
    };
    Seq2SeqModel::new(vocab, config).expect("valid seq2seq config")
}
