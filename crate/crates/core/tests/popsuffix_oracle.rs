#[macro_use]
mod common;

use std::collections::HashMap;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use tasksuggest::nn::rng;
use tasksuggest::popsuffix::{SuffixTable, SuggestOptions};
use tasksuggest::{Flavor, TextCorpus};

/// Counts end n-grams by walking each entry's characters backwards.
fn brute_force(entries: &[String], max_len: usize) -> HashMap<String, u64> {
    let mut counts = HashMap::new();
    for e in entries {
        let mut words = 0;
        for (i, ch) in e.char_indices().rev() {
            if ch == ' ' {
                words += 1;
                if words <= max_len {
                    *counts.entry(e[i + 1..].to_string()).or_default() += 1;
                }
            }
        }
        if words < max_len {
            *counts.entry(e.clone()).or_default() += 1;
        }
    }
    counts
}

fn random_corpus(seed: u64, n: usize, max_words: usize) -> Vec<String> {
    const WORDS: [&str; 12] = [
        "buy", "cheap", "flights", "make", "a", "pancake", "how", "to", "bake", "bread", "online", "deals",
    ];
    let mut r = rng::seeded(seed, 77);
    (0..n)
        .map(|_| {
            let k = r.gen_range(1..=max_words);
            (0..k)
                .map(|_| *WORDS.choose(&mut r).unwrap())
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect()
}

pub fn matches_brute_force_on_random_strings() {
    for (seed, max_len) in [(1, 1), (2, 2), (3, 3), (4, 5)] {
        let entries = random_corpus(seed, 1000, 6);
        let corpus: TextCorpus = entries.iter().collect();
        let table = SuffixTable::build(&corpus, max_len).unwrap();
        let want = brute_force(&entries, max_len);
        assert_eq!(table.len(), want.len());
        for (s, c) in &want {
            assert_eq!(table.count(s), *c, "{s}");
        }
        assert_eq!(table.total(), want.values().sum::<u64>());
        let mass: f64 = table.counts().keys().map(|s| table.pop(s)).sum();
        assert!((mass - 1.0).abs() < 1e-12);
    }
}

pub fn four_word_strings_with_cap_two_total_two_thousand() {
    let mut r = rng::seeded(9, 78);
    let entries: Vec<String> = (0..1000)
        .map(|_| {
            (0..4)
                .map(|_| format!("w{}", r.gen_range(0..20)))
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect();
    let table = SuffixTable::build(&entries.iter().collect(), 2).unwrap();
    assert_eq!(table.total(), 2000);
}

pub fn shuffled_corpus_builds_identical_table() {
    let mut entries = random_corpus(5, 300, 5);
    let a = SuffixTable::build(&entries.iter().collect(), 3).unwrap();
    entries.shuffle(&mut rng::seeded(5, 79));
    let b = SuffixTable::build(&entries.iter().collect(), 3).unwrap();
    assert_eq!(a, b);
}

proptest! {
    #[test]
    fn suggestions_are_ranked_completions(seed in 0u64..500, k in 1usize..30, q_words in 1usize..3) {
        let entries = random_corpus(seed, 60, 4);
        let table = SuffixTable::build(&entries.iter().collect(), 3).unwrap();
        let q0 = entries[0].split(' ').take(q_words).collect::<Vec<_>>().join(" ");
        let last = q0.rsplit(' ').next().unwrap().to_string();
        let out = table.suggest(&q0, k, &SuggestOptions::default()).unwrap();
        let admissible = table.counts().keys().filter(|s| s.split(' ').next() != Some(last.as_str())).count();
        prop_assert_eq!(out.len(), k.min(admissible));
        for w in out.windows(2) {
            prop_assert!(w[0].score > w[1].score || (w[0].score == w[1].score && w[0].text < w[1].text));
        }
        for s in &out {
            let suffix = s.text.strip_prefix(&format!("{q0} ")).unwrap();
            prop_assert_eq!(s.score, table.count(suffix) as f64 / table.total() as f64);
            prop_assert_eq!(s.flavor, Flavor::QC);
            prop_assert_eq!(tasksuggest::classify(&q0, &s.text), Flavor::QC);
        }
    }
}

register_tests!(
    matches_brute_force_on_random_strings,
    four_word_strings_with_cap_two_total_two_thousand,
    shuffled_corpus_builds_identical_table,
);
