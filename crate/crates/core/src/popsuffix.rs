//! Popular-suffix completion: `q = q0 ⊕ s`, scored by the relative
//! frequency of the word suffix `s` among all mined suffixes.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use crate::suggestion::{Flavor, Suggestion};
use crate::{Error, Result, TextCorpus};

pub const DEFAULT_MAX_LEN: usize = 3;
pub const DEFAULT_MIN_COUNT: u64 = 2;

/// End n-gram counts of a text corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuffixTable {
    counts: BTreeMap<String, u64>,
    total: u64,
    max_len: usize,
    /// Suffixes by count descending, then text ascending.
    ranked: Vec<(String, u64)>,
}

impl SuffixTable {
    /// Counts, for every entry `w1 … wk`, each end n-gram `w(k-j+1) … wk`
    /// with `j = 1..=min(max_len, k)`.
    pub fn build(corpus: &TextCorpus, max_len: usize) -> Result<Self> {
        if max_len == 0 {
            return Err(Error::Parameter("suffix length cap must be at least 1".into()));
        }
        if corpus.is_empty() {
            return Err(Error::EmptyInput("no texts to mine suffixes from".into()));
        }
        let mut counts: BTreeMap<String, u64> = BTreeMap::new();
        for entry in corpus.entries() {
            let words: Vec<&str> = entry.split(' ').collect();
            let k = words.len();
            for j in 1..=max_len.min(k) {
                *counts.entry(words[k - j..].join(" ")).or_default() += 1;
            }
        }
        Self::from_counts(counts, max_len)
    }

    fn from_counts(counts: BTreeMap<String, u64>, max_len: usize) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::EmptyInput("suffix table has no entries".into()));
        }
        let total = counts.values().sum();
        let mut ranked: Vec<(String, u64)> = counts.iter().map(|(s, &c)| (s.clone(), c)).collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        Ok(SuffixTable {
            counts,
            total,
            max_len,
            ranked,
        })
    }

    /// Drops suffixes seen fewer than `min_count` times; `pop` is
    /// renormalized over what remains.
    pub fn pruned(&self, min_count: u64) -> Result<Self> {
        let kept = self
            .counts
            .iter()
            .filter(|(_, &c)| c >= min_count)
            .map(|(s, &c)| (s.clone(), c))
            .collect();
        Self::from_counts(kept, self.max_len)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn count(&self, suffix: &str) -> u64 {
        self.counts.get(suffix).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &BTreeMap<String, u64> {
        &self.counts
    }

    /// Relative frequency of `suffix` among all counted suffixes.
    pub fn pop(&self, suffix: &str) -> f64 {
        self.count(suffix) as f64 / self.total as f64
    }

    /// Header `total<TAB>max_len`, then `suffix<TAB>count` lines in rank
    /// order.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}\t{}", self.total, self.max_len)?;
        for (s, c) in &self.ranked {
            writeln!(w, "{s}\t{c}")?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::EmptyInput("suffix table file is empty".into()))??;
        let bad = |line: usize, reason: &str| Error::Malformed {
            line,
            reason: reason.to_string(),
        };
        let (total, max_len) = header
            .split_once('\t')
            .and_then(|(t, m)| Some((t.parse::<u64>().ok()?, m.parse::<usize>().ok()?)))
            .ok_or_else(|| bad(1, "expected total<TAB>max_len header"))?;
        let mut counts = BTreeMap::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let (s, c) = line
                .rsplit_once('\t')
                .and_then(|(s, c)| Some((s, c.parse::<u64>().ok()?)))
                .ok_or_else(|| bad(i + 2, "expected suffix<TAB>count"))?;
            let words = s.split(' ').count();
            if s.is_empty() || words > max_len || c == 0 {
                return Err(bad(i + 2, "suffix empty, too long, or zero count"));
            }
            counts.insert(s.to_string(), c);
        }
        let table = Self::from_counts(counts, max_len)?;
        if table.total != total {
            return Err(Error::Validation(format!(
                "suffix table header total {total} != sum of counts {}",
                table.total
            )));
        }
        Ok(table)
    }

    /// Top-`k` completions `q0 ⊕ " " ⊕ s`, by `pop(s)` descending with ties
    /// broken by suggestion text.
    pub fn suggest(&self, q0: &str, k: usize, options: &SuggestOptions) -> Result<Vec<Suggestion>> {
        let q0 = q0.trim();
        if q0.is_empty() {
            return Err(Error::EmptyInput("initial query is empty".into()));
        }
        if k == 0 {
            return Err(Error::Parameter("k must be at least 1".into()));
        }
        let last_word = q0.rsplit(' ').next().unwrap_or(q0);
        let total = self.total as f64;
        Ok(self
            .ranked
            .iter()
            .filter(|(s, _)| !options.skip_repeated_word || s.split(' ').next() != Some(last_word))
            .take(k)
            .map(|(s, c)| {
                let score = *c as f64 / total;
                Suggestion {
                    text: format!("{q0} {s}"),
                    score,
                    log_score: score.ln(),
                    flavor: Flavor::QC,
                    truncated: false,
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuggestOptions {
    /// Skip suffixes whose first word equals the last word of `q0`.
    pub skip_repeated_word: bool,
}

impl Default for SuggestOptions {
    fn default() -> Self {
        SuggestOptions {
            skip_repeated_word: true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus(entries: &[&str]) -> TextCorpus {
        entries.iter().collect()
    }

    #[test]
    fn end_ngram_counts() {
        let t = SuffixTable::build(&corpus(&["a b c", "x b c"]), 2).unwrap();
        let expect: BTreeMap<String, u64> = [("c".to_string(), 2), ("b c".to_string(), 2)].into();
        assert_eq!(t.counts(), &expect);
        assert_eq!(t.total(), 4);
        assert_eq!(t.pop("c"), 0.5);

        let t = SuffixTable::build(&corpus(&["a"]), 3).unwrap();
        assert_eq!(t.total(), 1);
        assert_eq!(t.pop("a"), 1.0);
    }

    #[test]
    fn build_errors() {
        assert!(SuffixTable::build(&TextCorpus::new(), 2).is_err());
        assert!(SuffixTable::build(&corpus(&["a"]), 0).is_err());
    }

    fn deals_online() -> SuffixTable {
        SuffixTable::build(&corpus(&["deals", "deals", "online"]), 1).unwrap()
    }

    #[test]
    fn suggests_by_popularity() {
        let t = deals_online();
        let s = t.suggest("book", 2, &SuggestOptions::default()).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].text, "book deals");
        assert_eq!(s[0].score, 2.0 / 3.0);
        assert_eq!(s[1].text, "book online");
        assert_eq!(s[1].score, 1.0 / 3.0);
        assert!(s.iter().all(|c| c.flavor == Flavor::QC));

        let t = SuffixTable::build(&corpus(&["now"]), 1).unwrap();
        let s = t.suggest("buy", 5, &SuggestOptions::default()).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!((s[0].text.as_str(), s[0].score), ("buy now", 1.0));
    }

    #[test]
    fn repeated_word_guard() {
        let t = SuffixTable::build(&corpus(&["now", "now", "online"]), 1).unwrap();
        let s = t.suggest("buy now", 1, &SuggestOptions::default()).unwrap();
        assert_eq!(s[0].text, "buy now online");
        let off = SuggestOptions {
            skip_repeated_word: false,
        };
        assert_eq!(t.suggest("buy now", 1, &off).unwrap()[0].text, "buy now now");
    }

    #[test]
    fn ties_break_lexicographically() {
        let t = SuffixTable::build(&corpus(&["zeta", "alpha", "mid"]), 1).unwrap();
        let s = t.suggest("q", 3, &SuggestOptions::default()).unwrap();
        let texts: Vec<&str> = s.iter().map(|c| c.text.as_str()).collect();
        assert_eq!(texts, vec!["q alpha", "q mid", "q zeta"]);
    }

    #[test]
    fn suggest_errors() {
        let t = deals_online();
        assert!(t.suggest("", 2, &SuggestOptions::default()).is_err());
        assert!(t.suggest("book", 0, &SuggestOptions::default()).is_err());
    }

    #[test]
    fn pruning_renormalizes() {
        let t = deals_online().pruned(2).unwrap();
        assert_eq!(t.total(), 2);
        assert_eq!(t.pop("deals"), 1.0);
        assert!(deals_online().pruned(5).is_err());
    }

    #[test]
    fn file_format() {
        let t = SuffixTable::build(&corpus(&["a b c", "x b c", "y"]), 2).unwrap();
        let mut buf = Vec::new();
        t.write_to(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "5\t2\nb c\t2\nc\t2\ny\t1\n");
        assert_eq!(SuffixTable::read_from(&buf[..]).unwrap(), t);
        assert!(SuffixTable::read_from(&b"9\t2\nc\t2\n"[..]).is_err());
    }
}
