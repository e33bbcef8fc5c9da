//! Pooled evaluation of generated suggestions.
//!
//! Run files hold each configuration's ranked candidates; pools merge the
//! top of every ranking for assessment; qrels hold the assessors' votes;
//! the report computes precision, recall and cumulative recall per
//! configuration.

mod metrics;
mod pool;
mod qrels;
mod report;
mod run;

pub use metrics::{cumulative_recall, precision_at_k, recall, RecallValue};
pub use pool::{build_pool, Pool, PoolEntry, DEFAULT_POOL_DEPTH};
pub use qrels::{majority_vote, Judgment, Label, QrelSet};
pub use report::{report, ConfigRow, MetricsTable, ReportOptions};
pub use run::{RunEntry, RunFile};
