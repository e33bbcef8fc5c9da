use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::ingest::normalize_text;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Relevant,
    NonRelevant,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Relevant => "1",
            Label::NonRelevant => "0",
        })
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1" | "rel" | "relevant" | "true" => Ok(Label::Relevant),
            "0" | "nonrel" | "non-relevant" | "nonrelevant" | "false" => Ok(Label::NonRelevant),
            other => Err(Error::Validation(format!("unknown relevance label {other:?}"))),
        }
    }
}

/// Strict majority is relevant; ties are non-relevant.
pub fn majority_vote(votes: &[Label]) -> Result<Label> {
    if votes.is_empty() {
        return Err(Error::EmptyInput("no votes to aggregate".into()));
    }
    let relevant = votes.iter().filter(|v| **v == Label::Relevant).count();
    Ok(if 2 * relevant > votes.len() {
        Label::Relevant
    } else {
        Label::NonRelevant
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Judgment {
    pub label: Label,
    pub votes: Vec<Label>,
}

/// Relevance judgments keyed by (query id, normalized suggestion text).
/// Unjudged pairs are non-relevant.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QrelSet {
    judgments: BTreeMap<(String, String), Judgment>,
}

impl QrelSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records raw votes, replacing any earlier judgment of the pair.
    pub fn insert_votes(&mut self, query_id: &str, text: &str, votes: Vec<Label>) -> Result<Label> {
        let label = majority_vote(&votes)?;
        self.judgments
            .insert((query_id.to_string(), normalize_text(text)), Judgment { label, votes });
        Ok(label)
    }

    pub fn insert_label(&mut self, query_id: &str, text: &str, label: Label) {
        self.judgments.insert(
            (query_id.to_string(), normalize_text(text)),
            Judgment {
                label,
                votes: vec![label],
            },
        );
    }

    pub fn get(&self, query_id: &str, text: &str) -> Option<&Judgment> {
        self.judgments.get(&(query_id.to_string(), text.to_string()))
    }

    pub fn is_relevant(&self, query_id: &str, text: &str) -> bool {
        self.get(query_id, text).is_some_and(|j| j.label == Label::Relevant)
    }

    /// Relevant texts of one query.
    pub fn relevant_for(&self, query_id: &str) -> BTreeSet<&str> {
        self.judgments
            .range((query_id.to_string(), String::new())..)
            .take_while(|((q, _), _)| q == query_id)
            .filter(|(_, j)| j.label == Label::Relevant)
            .map(|((_, t), _)| t.as_str())
            .collect()
    }

    pub fn len(&self) -> usize {
        self.judgments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.judgments.is_empty()
    }

    /// Reads `query_id<TAB>text<TAB>votes`, where votes is a comma-separated
    /// list of labels or a single pre-aggregated label.
    pub fn read_from<R: BufRead>(reader: R) -> Result<Self> {
        let mut set = QrelSet::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let malformed = |reason: String| Error::Malformed { line: i + 1, reason };
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(malformed(format!(
                    "expected 3 tab-separated fields, found {}",
                    fields.len()
                )));
            }
            let votes = fields[2]
                .split(',')
                .map(str::parse)
                .collect::<Result<Vec<Label>>>()
                .map_err(|e| malformed(e.to_string()))?;
            if normalize_text(fields[1]).is_empty() {
                return Err(malformed("empty suggestion text".into()));
            }
            set.insert_votes(fields[0], fields[1], votes)
                .map_err(|e| malformed(e.to_string()))?;
        }
        Ok(set)
    }

    pub fn write_to<W: Write>(&self, mut writer: W) -> Result<()> {
        for ((q, t), j) in &self.judgments {
            let votes: Vec<String> = j.votes.iter().map(Label::to_string).collect();
            writeln!(writer, "{q}\t{t}\t{}", votes.join(","))?;
        }
        Ok(())
    }
}
