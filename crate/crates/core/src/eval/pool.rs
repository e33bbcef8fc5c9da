use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use super::RunFile;
use crate::{Error, Flavor, Result};

pub const DEFAULT_POOL_DEPTH: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoolEntry {
    pub text: String,
    /// Configurations that ranked this text within the pool depth.
    pub contributors: BTreeSet<String>,
}

/// Per (query, flavor): the union of every configuration's top-`depth`
/// candidates, sorted by text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pool {
    depth: usize,
    cells: BTreeMap<(String, Flavor), Vec<PoolEntry>>,
}

pub fn build_pool(runs: &[RunFile], depth: usize) -> Result<Pool> {
    if depth == 0 {
        return Err(Error::Parameter("pool depth must be at least 1".into()));
    }
    let mut cells: BTreeMap<(String, Flavor), BTreeMap<String, BTreeSet<String>>> = BTreeMap::new();
    for run in runs {
        run.validate()?;
        for e in run.entries().iter().filter(|e| e.rank <= depth) {
            cells
                .entry((e.query_id.clone(), e.flavor))
                .or_default()
                .entry(e.text.clone())
                .or_default()
                .insert(e.config_id.clone());
        }
    }
    let cells = cells
        .into_iter()
        .map(|(key, texts)| {
            let entries = texts
                .into_iter()
                .map(|(text, contributors)| PoolEntry { text, contributors })
                .collect();
            (key, entries)
        })
        .collect();
    Ok(Pool { depth, cells })
}

impl Pool {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn cell(&self, query_id: &str, flavor: Flavor) -> &[PoolEntry] {
        self.cells
            .get(&(query_id.to_string(), flavor))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn cells(&self) -> impl Iterator<Item = (&str, Flavor, &[PoolEntry])> {
        self.cells.iter().map(|((q, f), v)| (q.as_str(), *f, v.as_slice()))
    }

    /// Total number of (query, flavor, text) entries.
    pub fn len(&self) -> usize {
        self.cells.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `query_id<TAB>flavor<TAB>text<TAB>config,config,...`, for assessment.
    pub fn write_to<W: Write>(&self, mut writer: W) -> Result<()> {
        for (q, flavor, entries) in self.cells() {
            for e in entries {
                let contributors: Vec<&str> = e.contributors.iter().map(String::as_str).collect();
                writeln!(writer, "{q}\t{flavor}\t{}\t{}", e.text, contributors.join(","))?;
            }
        }
        Ok(())
    }
}
