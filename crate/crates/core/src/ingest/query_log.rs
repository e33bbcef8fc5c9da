use std::collections::HashMap;
use std::io::BufRead;
use std::time::Duration;

use chrono::{NaiveDateTime, TimeDelta};
use serde::Serialize;

use super::{normalize_text, prefix_pairs, PairCorpus, TextCorpus};
use crate::{Error, Result};

pub const TIMESTAMP_FORMAT: &str = "%Y-%m-%d %H:%M:%S";

/// Thirty minutes of inactivity closes a session.
pub const DEFAULT_SESSION_GAP: Duration = Duration::from_secs(30 * 60);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogRecord {
    pub user_id: String,
    /// Normalized query text, never empty.
    pub query: String,
    pub timestamp: NaiveDateTime,
}

/// Zero-based column indices of a tab-separated log. The default matches
/// the five-column AOL layout (user, query, time, rank, click URL); extra
/// columns are ignored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FieldSpec {
    pub user: usize,
    pub query: usize,
    pub timestamp: usize,
}

impl Default for FieldSpec {
    fn default() -> Self {
        FieldSpec {
            user: 0,
            query: 1,
            timestamp: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedLog {
    pub records: Vec<LogRecord>,
    /// Non-blank lines that did not yield a record.
    pub skipped: usize,
    pub lines: usize,
}

/// Parses one record per well-formed line. More than half the lines being
/// malformed is taken as a wrong field layout.
pub fn parse_query_log<R: BufRead>(reader: R, spec: FieldSpec) -> Result<ParsedLog> {
    let needed = spec.user.max(spec.query).max(spec.timestamp) + 1;
    let mut records = Vec::new();
    let mut skipped = 0;
    let mut lines = 0;
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        lines += 1;
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < needed {
            skipped += 1;
            continue;
        }
        let user_id = fields[spec.user].trim();
        let query = normalize_text(fields[spec.query]);
        let timestamp = NaiveDateTime::parse_from_str(fields[spec.timestamp].trim(), TIMESTAMP_FORMAT);
        match timestamp {
            Ok(timestamp) if !user_id.is_empty() && !query.is_empty() => records.push(LogRecord {
                user_id: user_id.to_string(),
                query,
                timestamp,
            }),
            _ => skipped += 1,
        }
    }
    if skipped * 2 > lines {
        return Err(Error::FormatMismatch {
            malformed: skipped,
            total: lines,
        });
    }
    Ok(ParsedLog {
        records,
        skipped,
        lines,
    })
}

/// One user's queries with no inter-query gap above the session gap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Session {
    pub user_id: String,
    pub queries: Vec<LogRecord>,
}

/// Splits each user's time-sorted records wherever the time since the
/// previous query exceeds `gap`. Users appear in order of first occurrence;
/// records with equal timestamps keep their file order.
pub fn segment_sessions(records: &[LogRecord], gap: Duration) -> Vec<Session> {
    let gap = TimeDelta::from_std(gap).unwrap_or(TimeDelta::MAX);
    let mut order: Vec<&str> = Vec::new();
    let mut by_user: HashMap<&str, Vec<&LogRecord>> = HashMap::new();
    for r in records {
        by_user
            .entry(r.user_id.as_str())
            .or_insert_with(|| {
                order.push(r.user_id.as_str());
                Vec::new()
            })
            .push(r);
    }

    let mut sessions = Vec::new();
    for user in order {
        let mut recs = by_user.remove(user).unwrap_or_default();
        recs.sort_by_key(|r| r.timestamp);
        let mut current: Vec<LogRecord> = Vec::new();
        for r in recs {
            if let Some(last) = current.last() {
                if r.timestamp - last.timestamp > gap {
                    sessions.push(Session {
                        user_id: user.to_string(),
                        queries: std::mem::take(&mut current),
                    });
                }
            }
            current.push(r.clone());
        }
        if !current.is_empty() {
            sessions.push(Session {
                user_id: user.to_string(),
                queries: current,
            });
        }
    }
    sessions
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairingMode {
    /// Every `(q_i, q_j)` with `i < j`.
    #[default]
    AllOrdered,
    /// Only `(q_i, q_{i+1})`.
    Consecutive,
}

/// Pairs queries within each session, skipping identical texts.
pub fn session_pairs(sessions: &[Session], mode: PairingMode) -> PairCorpus {
    let mut pairs = PairCorpus::new();
    for s in sessions {
        let q = &s.queries;
        for i in 0..q.len() {
            let targets = match mode {
                PairingMode::AllOrdered => i + 1..q.len(),
                PairingMode::Consecutive => i + 1..(i + 2).min(q.len()),
            };
            for j in targets {
                if q[i].query != q[j].query {
                    pairs.push(&q[i].query, &q[j].query);
                }
            }
        }
    }
    pairs
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct QueryLogStats {
    pub records: usize,
    pub skipped_lines: usize,
    pub sessions: usize,
    pub singleton_sessions: usize,
    pub session_pairs: usize,
    pub prefix_pairs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryLogCorpora {
    pub corpus: TextCorpus,
    pub pairs: PairCorpus,
    pub stats: QueryLogStats,
}

/// All queries form the text corpus; session pairs plus the proper-prefix
/// pairs of every query form the pair corpus.
pub fn build_query_log_corpora(log: &ParsedLog, gap: Duration, mode: PairingMode) -> QueryLogCorpora {
    let corpus: TextCorpus = log.records.iter().map(|r| r.query.as_str()).collect();
    let sessions = segment_sessions(&log.records, gap);
    let mut pairs = session_pairs(&sessions, mode);
    let session_pair_count = pairs.len();
    for r in &log.records {
        for (p, q) in prefix_pairs(&r.query) {
            pairs.push(&p, &q);
        }
    }
    let stats = QueryLogStats {
        records: log.records.len(),
        skipped_lines: log.skipped,
        sessions: sessions.len(),
        singleton_sessions: sessions.iter().filter(|s| s.queries.len() == 1).count(),
        session_pairs: session_pair_count,
        prefix_pairs: pairs.len() - session_pair_count,
    };
    QueryLogCorpora { corpus, pairs, stats }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn at(user: &str, q: &str, h: u32, m: u32) -> LogRecord {
        LogRecord {
            user_id: user.into(),
            query: q.into(),
            timestamp: NaiveDate::from_ymd_opt(2006, 3, 1)
                .unwrap()
                .and_hms_opt(h, m, 0)
                .unwrap(),
        }
    }

    #[test]
    fn parses_aol_lines() {
        let log = "1234\tmake a pancake\t2006-03-01 10:15:00\t1\thttp://x.com\n";
        let parsed = parse_query_log(log.as_bytes(), FieldSpec::default()).unwrap();
        assert_eq!(parsed.records, vec![at("1234", "make a pancake", 10, 15)]);
    }

    #[test]
    fn empty_query_is_skipped() {
        let log = "1\ta\t2006-03-01 10:00:00\n1\tb\t2006-03-01 10:01:00\n1234\t\t2006-03-01 10:15:00\n";
        let parsed = parse_query_log(log.as_bytes(), FieldSpec::default()).unwrap();
        assert_eq!(parsed.records.len(), 2);
        assert_eq!(parsed.skipped, 1);
    }

    #[test]
    fn counts_malformed_lines() {
        let log = "1\ta\t2006-03-01 10:00:00\n\
                   1\tb\t2006-03-01 10:01:00\n\
                   2\tc\t2006-03-01 10:02:00\n\
                   2\td\t2006-03-01 10:03:00\n\
                   garbage line\n";
        let parsed = parse_query_log(log.as_bytes(), FieldSpec::default()).unwrap();
        assert_eq!(parsed.records.len(), 4);
        assert_eq!(parsed.skipped, 1);
    }

    #[test]
    fn mostly_malformed_is_a_format_mismatch() {
        let log = "1\ta\t2006-03-01 10:00:00\nx\ny\nz\n";
        assert!(matches!(
            parse_query_log(log.as_bytes(), FieldSpec::default()),
            Err(Error::FormatMismatch { malformed: 3, total: 4 })
        ));
        // query and time columns swapped
        let swapped = FieldSpec {
            user: 0,
            query: 2,
            timestamp: 1,
        };
        let good = "1\ta\t2006-03-01 10:00:00\n";
        assert!(parse_query_log(good.as_bytes(), swapped).is_err());
    }

    #[test]
    fn gap_rule_splits_sessions() {
        let recs = vec![at("A", "x", 10, 0), at("A", "y", 10, 20), at("A", "z", 11, 5)];
        let s = segment_sessions(&recs, DEFAULT_SESSION_GAP);
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].queries.len(), 2);
        assert_eq!(s[1].queries[0].query, "z");
    }

    #[test]
    fn exactly_the_gap_stays_in_session() {
        let recs = vec![at("A", "x", 10, 0), at("A", "y", 10, 30)];
        assert_eq!(segment_sessions(&recs, DEFAULT_SESSION_GAP).len(), 1);
    }

    #[test]
    fn single_record_and_interleaved_users() {
        assert_eq!(segment_sessions(&[at("A", "x", 9, 0)], DEFAULT_SESSION_GAP).len(), 1);
        let recs = vec![
            at("A", "a1", 10, 0),
            at("B", "b1", 10, 1),
            at("A", "a2", 10, 2),
            at("B", "b2", 10, 3),
        ];
        let s = segment_sessions(&recs, DEFAULT_SESSION_GAP);
        assert_eq!(s.len(), 2);
        assert!(s[0].queries.iter().all(|r| r.user_id == "A"));
        assert!(s[1].queries.iter().all(|r| r.user_id == "B"));
    }

    #[test]
    fn unsorted_input_is_sorted_per_user() {
        let recs = vec![at("A", "late", 12, 0), at("A", "early", 10, 0)];
        let s = segment_sessions(&recs, DEFAULT_SESSION_GAP);
        assert_eq!(s[0].queries[0].query, "early");
    }

    #[test]
    fn session_pairing_modes() {
        let sess = |qs: &[&str]| Session {
            user_id: "u".into(),
            queries: qs.iter().enumerate().map(|(i, q)| at("u", q, 10, i as u32)).collect(),
        };
        let all = session_pairs(&[sess(&["a", "b", "c"])], PairingMode::AllOrdered);
        assert_eq!(
            all.pairs(),
            &[
                ("a".into(), "b".into()),
                ("a".into(), "c".into()),
                ("b".into(), "c".into())
            ]
        );
        let consec = session_pairs(&[sess(&["a", "b", "c"])], PairingMode::Consecutive);
        assert_eq!(consec.len(), 2);
        assert!(session_pairs(&[sess(&["a"])], PairingMode::AllOrdered).is_empty());
        assert!(session_pairs(&[sess(&["a", "a"])], PairingMode::AllOrdered).is_empty());
    }

    #[test]
    fn log_corpora_combine_session_and_prefix_pairs() {
        let log = ParsedLog {
            records: vec![at("A", "make a pancake", 10, 0), at("A", "buy flour", 10, 5)],
            skipped: 0,
            lines: 2,
        };
        let out = build_query_log_corpora(&log, DEFAULT_SESSION_GAP, PairingMode::AllOrdered);
        assert_eq!(out.corpus.len(), 2);
        assert_eq!(out.stats.session_pairs, 1);
        assert_eq!(out.stats.prefix_pairs, 3);
        assert_eq!(out.pairs.len(), 4);
    }
}
