use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::{BufRead, Write};

use crate::ingest::normalize_text;
use crate::suggestion::rank_order;
use crate::{Error, Flavor, Result, SuggestionCandidate};

const QUERY_DECLARATION: &str = "#query\t";

/// One line of a run file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunEntry {
    pub query_id: String,
    pub flavor: Flavor,
    pub rank: usize,
    pub score: f64,
    pub config_id: String,
    pub text: String,
}

/// Ranked candidates, one ranking per (query, config, flavor).
///
/// Besides candidate lines, a run file may declare the queries it was
/// produced for with `#query<TAB>id` lines, so that a query with no
/// candidates still counts as run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunFile {
    declared: Vec<String>,
    entries: Vec<RunEntry>,
}

impl RunFile {
    pub fn new() -> Self {
        Self::default()
    }

    /// Ranks candidates by score (ties by text) within each
    /// (query, config, flavor), keeping queries in order of first appearance.
    pub fn from_candidates<I>(candidates: I) -> Result<Self>
    where
        I: IntoIterator<Item = SuggestionCandidate>,
    {
        let mut order: Vec<(String, String, Flavor)> = Vec::new();
        let mut groups: BTreeMap<(String, String, Flavor), Vec<SuggestionCandidate>> = BTreeMap::new();
        for c in candidates {
            let key = (c.query_id.clone(), c.config_id.clone(), c.flavor);
            let group = groups.entry(key.clone()).or_default();
            if group.is_empty() {
                order.push(key);
            }
            group.push(c);
        }
        let mut run = RunFile::new();
        for key in order {
            let mut group = groups.remove(&key).unwrap_or_default();
            group.sort_by(|a, b| rank_order((a.score, &a.text), (b.score, &b.text)));
            for (i, c) in group.into_iter().enumerate() {
                run.entries.push(RunEntry {
                    query_id: c.query_id,
                    flavor: c.flavor,
                    rank: i + 1,
                    score: c.score,
                    config_id: c.config_id,
                    text: c.text,
                });
            }
        }
        run.validate()?;
        Ok(run)
    }

    pub fn declare_query(&mut self, query_id: &str) {
        if !self.declared.iter().any(|q| q == query_id) {
            self.declared.push(query_id.to_string());
        }
    }

    pub fn entries(&self) -> &[RunEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Declared queries plus every query with a candidate.
    pub fn query_ids(&self) -> BTreeSet<String> {
        self.declared
            .iter()
            .cloned()
            .chain(self.entries.iter().map(|e| e.query_id.clone()))
            .collect()
    }

    /// Configurations in order of first appearance.
    pub fn config_ids(&self) -> Vec<String> {
        let mut seen = HashSet::new();
        self.entries
            .iter()
            .filter(|e| seen.insert(e.config_id.as_str()))
            .map(|e| e.config_id.clone())
            .collect()
    }

    /// Candidate texts of one ranking, best first.
    pub fn ranking(&self, query_id: &str, config_id: &str, flavor: Flavor) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|e| e.query_id == query_id && e.config_id == config_id && e.flavor == flavor)
            .map(|e| e.text.as_str())
            .collect()
    }

    /// Ranks run 1..n in file order within each ranking, scores are finite
    /// and non-increasing, texts are normalized and unique.
    pub fn validate(&self) -> Result<()> {
        let mut last: BTreeMap<(&str, &str, Flavor), (usize, f64)> = BTreeMap::new();
        let mut texts: HashSet<(&str, &str, Flavor, &str)> = HashSet::new();
        for e in &self.entries {
            let where_ = format!("query {} config {} {}", e.query_id, e.config_id, e.flavor);
            if e.query_id.is_empty() || e.config_id.is_empty() {
                return Err(Error::Validation("empty query or config id".into()));
            }
            if !e.score.is_finite() {
                return Err(Error::Validation(format!("{where_}: non-finite score")));
            }
            if e.text.is_empty() || normalize_text(&e.text) != e.text {
                return Err(Error::Validation(format!(
                    "{where_}: text {:?} is not normalized",
                    e.text
                )));
            }
            let key = (e.query_id.as_str(), e.config_id.as_str(), e.flavor);
            let (prev_rank, prev_score) = last.get(&key).copied().unwrap_or((0, f64::INFINITY));
            if e.rank != prev_rank + 1 {
                return Err(Error::Validation(format!(
                    "{where_}: rank {} follows rank {prev_rank}",
                    e.rank
                )));
            }
            if e.score > prev_score {
                return Err(Error::Validation(format!(
                    "{where_}: score rises at rank {} ({} > {prev_score})",
                    e.rank, e.score
                )));
            }
            if !texts.insert((key.0, key.1, key.2, e.text.as_str())) {
                return Err(Error::Validation(format!("{where_}: duplicate text {:?}", e.text)));
            }
            last.insert(key, (e.rank, e.score));
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(reader: R) -> Result<Self> {
        let mut run = RunFile::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            if let Some(q) = line.strip_prefix(QUERY_DECLARATION) {
                run.declare_query(q.trim());
                continue;
            }
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 6 {
                return Err(Error::Malformed {
                    line: lineno,
                    reason: format!("expected 6 tab-separated fields, found {}", fields.len()),
                });
            }
            let malformed = |reason: String| Error::Malformed { line: lineno, reason };
            run.entries.push(RunEntry {
                query_id: fields[0].to_string(),
                flavor: fields[1].parse().map_err(|e: Error| malformed(e.to_string()))?,
                rank: fields[2]
                    .parse()
                    .map_err(|_| malformed(format!("bad rank {:?}", fields[2])))?,
                score: fields[3]
                    .parse()
                    .map_err(|_| malformed(format!("bad score {:?}", fields[3])))?,
                config_id: fields[4].to_string(),
                text: fields[5].to_string(),
            });
        }
        run.validate()?;
        Ok(run)
    }

    pub fn write_to<W: Write>(&self, mut writer: W) -> Result<()> {
        for q in &self.declared {
            writeln!(writer, "{QUERY_DECLARATION}{q}")?;
        }
        for e in &self.entries {
            writeln!(
                writer,
                "{}\t{}\t{}\t{}\t{}\t{}",
                e.query_id, e.flavor, e.rank, e.score, e.config_id, e.text
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cand(q: &str, text: &str, score: f64, flavor: Flavor) -> SuggestionCandidate {
        SuggestionCandidate {
            query_id: q.into(),
            text: text.into(),
            score,
            flavor,
            config_id: "AOL-PopSuffix".into(),
        }
    }

    #[test]
    fn ranks_per_flavor_with_text_ties() {
        let run = RunFile::from_candidates(vec![
            cand("1", "a b", -1.0, Flavor::QC),
            cand("1", "x", -0.5, Flavor::QR),
            cand("1", "a a", -1.0, Flavor::QC),
            cand("1", "a c", -0.1, Flavor::QC),
        ])
        .unwrap();
        assert_eq!(run.ranking("1", "AOL-PopSuffix", Flavor::QC), ["a c", "a a", "a b"]);
        assert_eq!(run.ranking("1", "AOL-PopSuffix", Flavor::QR), ["x"]);
        assert_eq!(run.entries()[2].rank, 3);
    }

    #[test]
    fn round_trips_through_text() {
        let mut run = RunFile::from_candidates(vec![
            cand("7", "make a pancake", -0.123456789012345, Flavor::QC),
            cand("7", "buy flour", -2.5, Flavor::QR),
        ])
        .unwrap();
        run.declare_query("8");
        let mut buf = Vec::new();
        run.write_to(&mut buf).unwrap();
        let back = RunFile::read_from(buf.as_slice()).unwrap();
        assert_eq!(back, run);
        assert_eq!(back.query_ids().into_iter().collect::<Vec<_>>(), ["7", "8"]);
    }

    #[test]
    fn rejects_rising_scores_and_bad_ranks() {
        let rising = "1\tQC\t1\t-2\tc\ta\n1\tQC\t2\t-1\tc\tb\n";
        assert!(matches!(
            RunFile::read_from(rising.as_bytes()),
            Err(Error::Validation(_))
        ));
        let gap = "1\tQC\t1\t-1\tc\ta\n1\tQC\t3\t-2\tc\tb\n";
        assert!(matches!(RunFile::read_from(gap.as_bytes()), Err(Error::Validation(_))));
        let dup = "1\tQC\t1\t-1\tc\ta\n1\tQC\t2\t-2\tc\ta\n";
        assert!(RunFile::read_from(dup.as_bytes()).is_err());
        let short = "1\tQC\t1\t-1\tc\n";
        assert!(matches!(
            RunFile::read_from(short.as_bytes()),
            Err(Error::Malformed { line: 1, .. })
        ));
        let ok = "1\tQC\t1\t-1\tc\ta\n1\tQR\t1\t-0.5\tc\tb\n1\tQC\t2\t-1\tc\tb\n";
        assert_eq!(RunFile::read_from(ok.as_bytes()).unwrap().len(), 3);
    }
}
