use std::collections::BTreeSet;

use crate::{Error, Result};

/// Fraction of the first `k` positions holding a relevant text; positions
/// past the end of the ranking count as non-relevant.
pub fn precision_at_k<S: AsRef<str>>(ranking: &[S], relevant: &BTreeSet<&str>, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::Parameter("k must be at least 1".into()));
    }
    let hits = ranking.iter().take(k).filter(|t| relevant.contains(t.as_ref())).count();
    Ok(hits as f64 / k as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecallValue {
    pub value: f64,
    /// The recall base was empty and `value` is 0 by convention.
    pub empty_base: bool,
}

pub fn recall<S: AsRef<str>>(retrieved: &[S], base: &BTreeSet<&str>) -> RecallValue {
    cumulative_recall(std::slice::from_ref(&retrieved), base)[0]
}

/// Line `i` is the recall of everything retrieved by lines `0..=i`.
pub fn cumulative_recall<S: AsRef<str>, L: AsRef<[S]>>(lines: &[L], base: &BTreeSet<&str>) -> Vec<RecallValue> {
    let mut found: BTreeSet<&str> = BTreeSet::new();
    lines
        .iter()
        .map(|line| {
            for t in line.as_ref() {
                if let Some(hit) = base.get(t.as_ref()) {
                    found.insert(hit);
                }
            }
            if base.is_empty() {
                RecallValue {
                    value: 0.0,
                    empty_base: true,
                }
            } else {
                RecallValue {
                    value: found.len() as f64 / base.len() as f64,
                    empty_base: false,
                }
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set<'a>(items: &[&'a str]) -> BTreeSet<&'a str> {
        items.iter().copied().collect()
    }

    #[test]
    fn precision_examples() {
        let rel = set(&["r0", "r1", "r2", "r3", "r4", "r5", "r6"]);
        let ranking = ["r0", "x", "r1", "x2", "r2", "x3", "x4", "x5", "x6", "x7"];
        assert_eq!(precision_at_k(&ranking, &rel, 10).unwrap(), 0.3);
        assert_eq!(precision_at_k::<&str>(&[], &rel, 10).unwrap(), 0.0);
        let all = ["r0", "r1", "r2", "r3", "r4", "r5", "r6"];
        assert_eq!(precision_at_k(&all, &rel, 10).unwrap(), 0.7);
        assert!(precision_at_k(&all, &rel, 0).is_err());
    }

    #[test]
    fn recall_examples() {
        let base = set(&["a", "b", "c", "d"]);
        assert_eq!(recall(&["a", "b", "z"], &base).value, 0.5);
        assert_eq!(recall(&["a", "b", "c", "d", "e"], &base).value, 1.0);
        let empty = recall(&["a"], &BTreeSet::new());
        assert_eq!((empty.value, empty.empty_base), (0.0, true));
    }

    #[test]
    fn cumulative_examples() {
        let base = set(&["a", "b", "c", "d"]);
        let cr: Vec<f64> = cumulative_recall(&[vec!["a", "b"], vec!["b", "c"]], &base)
            .iter()
            .map(|r| r.value)
            .collect();
        assert_eq!(cr, [0.5, 0.75]);
        let same: Vec<f64> = cumulative_recall(&[vec!["a"], vec!["a"], vec!["a"]], &base)
            .iter()
            .map(|r| r.value)
            .collect();
        assert_eq!(same, [0.25; 3]);
    }
}
