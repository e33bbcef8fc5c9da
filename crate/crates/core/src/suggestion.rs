use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

/// Query completion (prefixed by the initial query) or query refinement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Flavor {
    QC,
    QR,
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Flavor::QC => "QC",
            Flavor::QR => "QR",
        })
    }
}

impl FromStr for Flavor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "QC" | "qc" => Ok(Flavor::QC),
            "QR" | "qr" => Ok(Flavor::QR),
            other => Err(Error::Validation(format!("unknown flavor {other:?}"))),
        }
    }
}

/// QC iff the words of `initial` are a (strict or equal) prefix of the words
/// of `suggestion`.
pub fn classify(initial: &str, suggestion: &str) -> Flavor {
    let mut s = suggestion.split_whitespace();
    let is_prefix = initial.split_whitespace().all(|w| s.next() == Some(w));
    if is_prefix {
        Flavor::QC
    } else {
        Flavor::QR
    }
}

/// One generated suggestion for an initial query.
#[derive(Debug, Clone, PartialEq)]
pub struct Suggestion {
    pub text: String,
    /// `P(q | q0)`.
    pub score: f64,
    /// `ln P(q | q0)`.
    pub log_score: f64,
    pub flavor: Flavor,
    /// Generation stopped at the length cap rather than at end-of-sequence;
    /// the score is then a partial product.
    pub truncated: bool,
}

impl Suggestion {
    pub fn from_log_score(text: String, log_score: f64, flavor: Flavor, truncated: bool) -> Self {
        Suggestion {
            text,
            score: log_score.exp(),
            log_score,
            flavor,
            truncated,
        }
    }
}

/// The unit pooled and evaluated: a suggestion attributed to a query and a
/// `<Source>-<Method>` configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SuggestionCandidate {
    pub query_id: String,
    pub text: String,
    /// Log-likelihood of the suggestion.
    pub score: f64,
    pub flavor: Flavor,
    pub config_id: String,
}

/// Orders by score descending, then text ascending.
pub(crate) fn rank_order(a: (f64, &str), b: (f64, &str)) -> std::cmp::Ordering {
    b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1))
}
