//! Source parsing: query logs, task triples and question dumps become a
//! [`TextCorpus`] of short texts and a [`PairCorpus`] of source/target pairs.

mod corpus;
mod knowhow;
mod query_log;
mod wikianswers;

pub use corpus::{prefix_pairs, PairCorpus, TextCorpus};
pub use knowhow::{load_knowhow, KnowHowCorpora};
pub use query_log::{
    build_query_log_corpora, parse_query_log, segment_sessions, session_pairs, FieldSpec, LogRecord, PairingMode,
    ParsedLog, QueryLogCorpora, QueryLogStats, Session, DEFAULT_SESSION_GAP,
};
pub use wikianswers::{load_wikianswers, strip_question_construction, WikiAnswersCorpus};

/// Lowercases, turns whitespace into single spaces, drops other control
/// characters and trims.
pub fn normalize_text(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut pending_space = false;
    for ch in raw.chars() {
        if ch.is_whitespace() {
            pending_space = !out.is_empty();
            continue;
        }
        if ch.is_control() {
            continue;
        }
        if pending_space {
            out.push(' ');
            pending_space = false;
        }
        out.extend(ch.to_lowercase());
    }
    out
}
