use std::io::BufRead;

use super::{normalize_text, TextCorpus};
use crate::Result;

const CONSTRUCTIONS: [&str; 2] = ["how do you ", "how to "];

#[derive(Debug, Clone, PartialEq)]
pub struct WikiAnswersCorpus {
    pub corpus: TextCorpus,
    /// Questions that were not task-like.
    pub dropped: usize,
}

/// Strips a leading "how do you"/"how to" construction (repeatedly) and any
/// trailing question marks from a normalized question. `None` if the
/// question does not start with a construction or nothing remains.
pub fn strip_question_construction(question: &str) -> Option<String> {
    let mut rest = question;
    let mut matched = false;
    while let Some(stripped) = CONSTRUCTIONS.iter().find_map(|c| rest.strip_prefix(c)) {
        rest = stripped;
        matched = true;
    }
    if !matched {
        return None;
    }
    let text = normalize_text(rest.trim_end_matches(|c: char| c == '?' || c.is_whitespace()));
    // "?" stripping can expose a construction again ("how to how to?")
    if text.is_empty() || CONSTRUCTIONS.iter().any(|c| text.starts_with(c)) {
        return strip_question_construction(&text).filter(|t| !t.is_empty());
    }
    Some(text)
}

/// Keeps task-like questions, one per line, with the construction removed.
pub fn load_wikianswers<R: BufRead>(reader: R) -> Result<WikiAnswersCorpus> {
    let mut out = WikiAnswersCorpus {
        corpus: TextCorpus::new(),
        dropped: 0,
    };
    for line in reader.lines() {
        let line = line?;
        let q = normalize_text(&line);
        if q.is_empty() {
            continue;
        }
        match strip_question_construction(&q) {
            Some(task) => {
                out.corpus.push(&task);
            }
            None => out.dropped += 1,
        }
    }
    Ok(out)
}
