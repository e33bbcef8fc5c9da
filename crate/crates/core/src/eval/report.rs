use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::Write;

use super::metrics::{cumulative_recall, precision_at_k};
use super::{build_pool, QrelSet, RunFile, DEFAULT_POOL_DEPTH};
use crate::{Error, Flavor, Result};

const CUTOFFS: [usize; 2] = [10, 20];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportOptions {
    pub depth: usize,
    /// Compute recall over whole rankings instead of their top `depth`.
    pub full_ranking_recall: bool,
    /// Row order, which also fixes the cumulative-recall order. Defaults to
    /// the order in which configurations first appear in the runs.
    pub config_order: Option<Vec<String>>,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            depth: DEFAULT_POOL_DEPTH,
            full_ranking_recall: false,
            config_order: None,
        }
    }
}

/// One configuration's macro-averaged metrics. `None` marks a flavor the
/// configuration never produced.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigRow {
    pub config_id: String,
    pub qc_p10: Option<f64>,
    pub qc_p20: Option<f64>,
    pub qc_recall: Option<f64>,
    pub qc_cumulative_recall: f64,
    pub qr_p10: Option<f64>,
    pub qr_p20: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsTable {
    pub depth: usize,
    pub full_ranking_recall: bool,
    pub queries: Vec<String>,
    /// Queries whose QC pool holds no relevant suggestion; their recall
    /// counts as 0.
    pub empty_recall_base: Vec<String>,
    pub rows: Vec<ConfigRow>,
}

pub fn report(runs: &[RunFile], qrels: &QrelSet, options: &ReportOptions) -> Result<MetricsTable> {
    let pool = build_pool(runs, options.depth)?;

    let mut owner: BTreeMap<String, usize> = BTreeMap::new();
    let mut appearance = Vec::new();
    for (i, run) in runs.iter().enumerate() {
        for config in run.config_ids() {
            if let Some(j) = owner.insert(config.clone(), i) {
                return Err(Error::Validation(format!(
                    "configuration {config} appears in run files {} and {}",
                    j + 1,
                    i + 1
                )));
            }
            appearance.push(config);
        }
    }
    let order = match &options.config_order {
        Some(order) => {
            let given: BTreeSet<&String> = order.iter().collect();
            let present: BTreeSet<&String> = appearance.iter().collect();
            if given != present || given.len() != order.len() {
                return Err(Error::Validation(
                    "config order must list every configuration in the runs exactly once".into(),
                ));
            }
            order.clone()
        }
        None => appearance,
    };
    if order.is_empty() {
        return Err(Error::EmptyInput("runs contain no candidates".into()));
    }

    let query_sets: Vec<BTreeSet<String>> = order.iter().map(|c| runs[owner[c]].query_ids()).collect();
    let all: BTreeSet<String> = query_sets.iter().flatten().cloned().collect();
    let offending: Vec<&String> = all
        .iter()
        .filter(|q| query_sets.iter().any(|s| !s.contains(*q)))
        .collect();
    if !offending.is_empty() {
        let list: Vec<&str> = offending.iter().map(|s| s.as_str()).collect();
        return Err(Error::Validation(format!(
            "query sets differ across configurations; offending queries: {}",
            list.join(",")
        )));
    }
    let queries: Vec<String> = all.into_iter().collect();

    let has_flavor = |config: &str, flavor: Flavor| {
        runs[owner[config]]
            .entries()
            .iter()
            .any(|e| e.config_id == config && e.flavor == flavor)
    };

    let n = order.len();
    let mut sums = vec![[0.0f64; 6]; n];
    let mut empty_recall_base = Vec::new();
    for q in &queries {
        let relevant = qrels.relevant_for(q);
        let base: BTreeSet<&str> = pool
            .cell(q, Flavor::QC)
            .iter()
            .map(|e| e.text.as_str())
            .filter(|t| relevant.contains(t))
            .collect();
        if base.is_empty() {
            empty_recall_base.push(q.clone());
        }
        let mut retrieved = Vec::with_capacity(n);
        for (i, config) in order.iter().enumerate() {
            let run = &runs[owner[config]];
            let qc = run.ranking(q, config, Flavor::QC);
            let qr = run.ranking(q, config, Flavor::QR);
            sums[i][0] += precision_at_k(&qc, &relevant, CUTOFFS[0])?;
            sums[i][1] += precision_at_k(&qc, &relevant, CUTOFFS[1])?;
            sums[i][4] += precision_at_k(&qr, &relevant, CUTOFFS[0])?;
            sums[i][5] += precision_at_k(&qr, &relevant, CUTOFFS[1])?;
            let cut = if options.full_ranking_recall {
                qc.len()
            } else {
                qc.len().min(options.depth)
            };
            retrieved.push(qc[..cut].to_vec());
        }
        for (i, line) in retrieved.iter().enumerate() {
            sums[i][2] += super::recall(line, &base).value;
        }
        for (i, cr) in cumulative_recall(&retrieved, &base).into_iter().enumerate() {
            sums[i][3] += cr.value;
        }
    }

    let count = queries.len() as f64;
    let rows = order
        .iter()
        .zip(&sums)
        .map(|(config, s)| {
            let mean = |v: f64| v / count;
            let qc = has_flavor(config, Flavor::QC);
            let qr = has_flavor(config, Flavor::QR);
            ConfigRow {
                config_id: config.clone(),
                qc_p10: qc.then(|| mean(s[0])),
                qc_p20: qc.then(|| mean(s[1])),
                qc_recall: qc.then(|| mean(s[2])),
                qc_cumulative_recall: mean(s[3]),
                qr_p10: qr.then(|| mean(s[4])),
                qr_p20: qr.then(|| mean(s[5])),
            }
        })
        .collect();
    Ok(MetricsTable {
        depth: options.depth,
        full_ranking_recall: options.full_ranking_recall,
        queries,
        empty_recall_base,
        rows,
    })
}

impl MetricsTable {
    pub const COLUMNS: [&'static str; 7] = [
        "config",
        "qc_p10",
        "qc_p20",
        "qc_recall",
        "qc_cumulative_recall",
        "qr_p10",
        "qr_p20",
    ];

    pub fn row(&self, config_id: &str) -> Option<&ConfigRow> {
        self.rows.iter().find(|r| r.config_id == config_id)
    }

    /// Tab-separated table preceded by `#` metadata lines; absent flavors
    /// render as `-`.
    pub fn to_tsv(&self) -> String {
        let cell = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
        let mut out = String::new();
        let _ = writeln!(out, "# depth\t{}", self.depth);
        let _ = writeln!(
            out,
            "# recall\t{}",
            if self.full_ranking_recall {
                "full_ranking"
            } else {
                "pool_depth"
            }
        );
        let _ = writeln!(out, "# queries\t{}", self.queries.len());
        for q in &self.empty_recall_base {
            let _ = writeln!(out, "# empty_recall_base\t{q}");
        }
        let _ = writeln!(out, "{}", Self::COLUMNS.join("\t"));
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                r.config_id,
                cell(r.qc_p10),
                cell(r.qc_p20),
                cell(r.qc_recall),
                cell(Some(r.qc_cumulative_recall)),
                cell(r.qr_p10),
                cell(r.qr_p20)
            );
        }
        out
    }

    pub fn write_to<W: Write>(&self, mut writer: W) -> Result<()> {
        writer.write_all(self.to_tsv().as_bytes())?;
        Ok(())
    }
}
