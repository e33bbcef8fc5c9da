use std::io::{BufRead, Write};

use super::normalize_text;
use crate::{Error, Result};

/// Collection of normalized short texts. Duplicates are kept because
/// suffix popularity is a frequency.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TextCorpus {
    entries: Vec<String>,
}

impl TextCorpus {
    pub fn new() -> Self {
        Self::default()
    }

    /// Normalizes `raw` and keeps it if anything is left.
    pub fn push(&mut self, raw: &str) -> bool {
        let text = normalize_text(raw);
        if text.is_empty() {
            return false;
        }
        self.entries.push(text);
        true
    }

    pub fn entries(&self) -> &[String] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn extend(&mut self, other: TextCorpus) {
        self.entries.extend(other.entries);
    }

    /// One entry per line.
    pub fn read_from<R: BufRead>(reader: R) -> Result<Self> {
        let mut corpus = TextCorpus::new();
        for line in reader.lines() {
            corpus.push(&line?);
        }
        Ok(corpus)
    }

    pub fn write_to<W: Write>(&self, mut writer: W) -> Result<()> {
        for e in &self.entries {
            writeln!(writer, "{e}")?;
        }
        Ok(())
    }
}

impl<S: AsRef<str>> FromIterator<S> for TextCorpus {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        let mut corpus = TextCorpus::new();
        for s in iter {
            corpus.push(s.as_ref());
        }
        corpus
    }
}

/// Source/target training pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PairCorpus {
    pairs: Vec<(String, String)>,
}

impl PairCorpus {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, source: &str, target: &str) -> bool {
        let (s, t) = (normalize_text(source), normalize_text(target));
        if s.is_empty() || t.is_empty() {
            return false;
        }
        self.pairs.push((s, t));
        true
    }

    pub fn pairs(&self) -> &[(String, String)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn extend(&mut self, other: PairCorpus) {
        self.pairs.extend(other.pairs);
    }

    /// `source<TAB>target` lines; blank lines are ignored.
    pub fn read_from<R: BufRead>(reader: R) -> Result<Self> {
        let mut corpus = PairCorpus::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (s, t) = line.split_once('\t').ok_or_else(|| Error::Malformed {
                line: i + 1,
                reason: "expected source<TAB>target".into(),
            })?;
            if !corpus.push(s, t) {
                return Err(Error::Malformed {
                    line: i + 1,
                    reason: "empty source or target".into(),
                });
            }
        }
        Ok(corpus)
    }

    pub fn write_to<W: Write>(&self, mut writer: W) -> Result<()> {
        for (s, t) in &self.pairs {
            writeln!(writer, "{s}\t{t}")?;
        }
        Ok(())
    }
}

impl<S: AsRef<str>, T: AsRef<str>> FromIterator<(S, T)> for PairCorpus {
    fn from_iter<I: IntoIterator<Item = (S, T)>>(iter: I) -> Self {
        let mut corpus = PairCorpus::new();
        for (s, t) in iter {
            corpus.push(s.as_ref(), t.as_ref());
        }
        corpus
    }
}

/// Pairs every proper word-boundary prefix of `query` with `query`:
/// `"make a pancake"` gives `("make", …)` and `("make a", …)`.
pub fn prefix_pairs(query: &str) -> Vec<(String, String)> {
    let words: Vec<&str> = query.split(' ').filter(|w| !w.is_empty()).collect();
    let full = words.join(" ");
    (1..words.len()).map(|i| (words[..i].join(" "), full.clone())).collect()
}
