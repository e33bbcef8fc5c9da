//! Candidate generation for task-based query suggestions.
//!
//! Three generators share one candidate type:
//!
//! * [`popsuffix`] appends frequent query suffixes to the initial query,
//! * [`char_nlm`] extends the query character by character with an LSTM
//!   language model,
//! * [`seq2seq`] translates the query into suggestions with a bidirectional
//!   GRU encoder and a GRU decoder.
//!
//! [`ingest`] turns raw query logs, task triples and question dumps into the
//! text and pair corpora these generators train on, and [`eval`] pools the
//! generated candidates and scores them against assessor labels.

pub mod char_nlm;
pub mod decoding;
mod error;
pub mod eval;
pub mod ingest;
pub mod nn;
pub mod popsuffix;
pub mod seq2seq;
pub mod suggestion;

pub use error::{Error, Result};
pub use ingest::{normalize_text, PairCorpus, TextCorpus};
pub use suggestion::{classify, Flavor, Suggestion, SuggestionCandidate};
