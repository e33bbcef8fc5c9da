//! Every emitted candidate's log-score equals a step-by-step recomputation.

#[macro_use]
mod common;

use tasksuggest::char_nlm::{CharLm, CharLmConfig, CharVocab, NlmDecodeOptions, EOS as CHAR_EOS};
use tasksuggest::seq2seq::{Seq2SeqConfig, Seq2SeqDecodeOptions, Seq2SeqModel, WordVocab, EOS as WORD_EOS};
use tasksuggest::{PairCorpus, TextCorpus};

const QUERIES: [&str; 5] = ["make a", "buy", "how to bake", "plan", "cook rice"];

pub fn char_nlm_scores_recompute() {
    let corpus: TextCorpus = [
        "make a pancake",
        "buy flour",
        "how to bake bread",
        "plan a trip",
        "cook rice",
    ]
    .into_iter()
    .collect();
    let vocab = CharVocab::from_corpus(&corpus);
    let model = CharLm::new(
        vocab.clone(),
        CharLmConfig {
            hidden_dim: 16,
            embed_dim: 8,
            seed: 3,
            ..Default::default()
        },
    )
    .unwrap();
    let reference = common::RefCharLm::new(model.params());
    let options = NlmDecodeOptions {
        beam_width: 20,
        k: 20,
        max_chars: 12,
        ..Default::default()
    };
    let mut checked = 0;
    for q0 in QUERIES {
        for s in model.suggest(q0, &options).unwrap() {
            let context: Vec<usize> = q0.chars().map(|c| vocab.encode(c)).collect();
            let mut continuation: Vec<usize> = s.text[q0.len()..].chars().map(|c| vocab.encode(c)).collect();
            if !s.truncated {
                continuation.push(CHAR_EOS);
            }
            let want = reference.log_prob(&context, &continuation);
            assert!(
                (s.log_score - want).abs() < 1e-9,
                "{}: {} vs {want}",
                s.text,
                s.log_score
            );
            let lib = model.continuation_log_prob(q0, &s.text[q0.len()..], !s.truncated);
            assert!((s.log_score - lib).abs() < 1e-9);
            assert!((s.score - s.log_score.exp()).abs() <= 1e-12 * s.score.max(1e-300));
            checked += 1;
        }
    }
    assert_eq!(checked, 100);
}

pub fn seq2seq_scores_recompute() {
    let pairs: PairCorpus = [
        ("make a", "make a pancake"),
        ("buy", "buy flour"),
        ("how to bake", "bake bread"),
        ("plan", "plan a trip"),
        ("cook rice", "rice cooker"),
    ]
    .into_iter()
    .collect();
    let vocab = WordVocab::from_pairs(&pairs, 1);
    let model = Seq2SeqModel::new(
        vocab.clone(),
        Seq2SeqConfig {
            embed_dim: 8,
            encoder_dim: 6,
            decoder_dim: 10,
            seed: 4,
            ..Default::default()
        },
    )
    .unwrap();
    let reference = common::RefSeq2Seq::new(model.params());
    let options = Seq2SeqDecodeOptions {
        beam_width: 20,
        k: 20,
        max_words: 5,
        ..Default::default()
    };
    let mut checked = 0;
    for q0 in QUERIES {
        let source = vocab.encode_text(q0);
        for s in model.suggest(q0, &options).unwrap().suggestions {
            let mut target = vocab.encode_text(&s.text);
            if !s.truncated {
                target.push(WORD_EOS);
            }
            let want = reference.log_prob(&source, &target);
            assert!(
                (s.log_score - want).abs() < 1e-9,
                "{}: {} vs {want}",
                s.text,
                s.log_score
            );
            let lib = model.target_log_prob(q0, &s.text, !s.truncated).unwrap();
            assert!((s.log_score - lib).abs() < 1e-9);
            checked += 1;
        }
    }
    assert_eq!(checked, 100);
}

register_tests!(char_nlm_scores_recompute, seq2seq_scores_recompute,);
