//! Acceptance suite: one PASS/FAIL line per criterion with its wall time
//! and budget. The checks themselves live in the core integration tests and
//! are included here by path, so both targets run the same code.

#![allow(dead_code, unused_imports, clippy::duplicate_mod)]

mod support;

#[path = "../../core/tests/beam_oracle.rs"]
mod beam_oracle;
#[path = "../../core/tests/eval_oracle.rs"]
mod eval_oracle;
#[path = "../../core/tests/flavor.rs"]
mod flavor;
#[path = "../../core/tests/gradients.rs"]
mod gradients;
#[path = "../../core/tests/ingestion.rs"]
mod ingestion;
#[path = "../../core/tests/memorization.rs"]
mod memorization;
#[path = "../../core/tests/popsuffix_oracle.rs"]
mod popsuffix_oracle;
#[path = "../../core/tests/self_consistency.rs"]
mod self_consistency;
#[path = "../../core/tests/sessions.rs"]
mod sessions;

use std::fs;
use std::panic;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

struct Criterion {
    name: &'static str,
    budget: Duration,
    checks: &'static [fn()],
}

const fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

const CRITERIA: &[Criterion] = &[
    Criterion {
        name: "ingestion_fidelity",
        budget: secs(1),
        checks: &[
            ingestion::prefix_pairs_of_a_three_word_query,
            ingestion::wikianswers_strips_the_question_construction,
        ],
    },
    Criterion {
        name: "sessionization_partition",
        budget: secs(5),
        checks: &[sessions::sessions_partition_records_and_respect_the_gap],
    },
    Criterion {
        name: "suffix_table",
        budget: secs(5),
        checks: &[
            popsuffix_oracle::matches_brute_force_on_random_strings,
            popsuffix_oracle::four_word_strings_with_cap_two_total_two_thousand,
        ],
    },
    Criterion {
        name: "gradient_correctness",
        budget: secs(120),
        checks: &[
            gradients::lstm_cell_unrolled,
            gradients::gru_cell_unrolled,
            gradients::char_nlm_five_steps,
            gradients::seq2seq_three_word_pair,
        ],
    },
    Criterion {
        name: "beam_search_optimality",
        budget: secs(30),
        checks: &[
            beam_oracle::char_nlm_beam_equals_enumeration,
            beam_oracle::seq2seq_beam_equals_enumeration,
        ],
    },
    Criterion {
        name: "memorization",
        budget: secs(600),
        checks: &[
            memorization::char_nlm_memorizes_ten_strings,
            memorization::seq2seq_memorizes_prefix_phrase_pairs,
        ],
    },
    Criterion {
        name: "likelihood_self_consistency",
        budget: secs(30),
        checks: &[
            self_consistency::char_nlm_scores_recompute,
            self_consistency::seq2seq_scores_recompute,
        ],
    },
    Criterion {
        name: "metrics_oracle",
        budget: secs(1),
        checks: &[
            eval_oracle::table_matches_hand_computation,
            eval_oracle::brute_force_macro_average,
            eval_oracle::config_order_drives_cumulative_recall,
        ],
    },
    Criterion {
        name: "flavor_classification",
        budget: secs(1),
        checks: &[flavor::fifty_constructed_pairs],
    },
    Criterion {
        name: "end_to_end_determinism",
        budget: secs(900),
        checks: &[end_to_end_determinism],
    },
];

const TOY_CONFIGS: [&str; 6] = [
    "AOL-PopSuffix",
    "AOL-NLM",
    "AOL-Seq2Seq",
    "KnowHow-NLM",
    "KnowHow-Seq2Seq",
    "WikiAnswers-NLM",
];

/// The toy pipeline at 50 epochs, twice with the same seed in separate
/// output directories: run files, pool and report must match byte for byte.
fn end_to_end_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let outputs: Vec<Vec<(String, Vec<u8>)>> = ["first", "second"]
        .iter()
        .map(|name| {
            let root = dir.path().join(name);
            fs::create_dir_all(&root).unwrap();
            let config = support::toy_config(&root, &TOY_CONFIGS, 50);
            support::pipeline(&config);
            collect(&root.join("out"))
        })
        .collect();
    let runs = outputs[0].iter().filter(|(p, _)| p.starts_with("runs/")).count();
    assert_eq!(runs, TOY_CONFIGS.len());
    assert!(outputs[0].iter().any(|(p, _)| p == "report.tsv"));
    assert_eq!(outputs[0].len(), outputs[1].len());
    for ((pa, a), (pb, b)) in outputs[0].iter().zip(&outputs[1]) {
        assert_eq!(pa, pb);
        assert!(a == b, "{pa} differs between runs");
    }
}

/// Run files, pool and report under `out`, keyed by relative path.
fn collect(out: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(out.join("runs"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| {
            (
                format!("runs/{}", p.file_name().unwrap().to_string_lossy()),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    for f in ["pool.tsv", "report.tsv"] {
        files.push((f.to_string(), fs::read(out.join(f)).unwrap()));
    }
    files.sort();
    files
}

fn main() -> ExitCode {
    // list mode used by `cargo test -- --list`
    if std::env::args().any(|a| a == "--list") {
        for c in CRITERIA {
            println!("{}: test", c.name);
        }
        return ExitCode::SUCCESS;
    }
    let mut failed = 0;
    for c in CRITERIA {
        let start = Instant::now();
        let ok = c.checks.iter().all(|check| panic::catch_unwind(check).is_ok());
        let elapsed = start.elapsed();
        let within = elapsed <= c.budget;
        let status = if ok && within { "PASS" } else { "FAIL" };
        let note = if ok && !within { " over budget" } else { "" };
        println!(
            "{status}\t{}\t{:.2}s\tbudget {}s{note}",
            c.name,
            elapsed.as_secs_f64(),
            c.budget.as_secs()
        );
        failed += usize::from(status == "FAIL");
    }
    println!("acceptance: {} passed, {failed} failed", CRITERIA.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
