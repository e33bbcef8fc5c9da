use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use serde::Deserialize;
use tasksuggest::char_nlm::CharLmConfig;
use tasksuggest::eval::DEFAULT_POOL_DEPTH;
use tasksuggest::ingest::{FieldSpec, PairingMode};
use tasksuggest::popsuffix::{DEFAULT_MAX_LEN, DEFAULT_MIN_COUNT};
use tasksuggest::seq2seq::Seq2SeqConfig;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    QueryLog,
    Knowhow,
    Wikianswers,
}

impl SourceKind {
    /// Whether the source yields question-suggestion pairs.
    pub fn has_pairs(self) -> bool {
        !matches!(self, SourceKind::Wikianswers)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    /// Label used in configuration ids, e.g. `AOL`.
    pub name: String,
    pub kind: SourceKind,
    pub path: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Method {
    PopSuffix,
    Nlm,
    Seq2Seq,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::PopSuffix => "PopSuffix",
            Method::Nlm => "NLM",
            Method::Seq2Seq => "Seq2Seq",
        })
    }
}

impl FromStr for Method {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "popsuffix" => Ok(Method::PopSuffix),
            "nlm" | "charnlm" => Ok(Method::Nlm),
            "seq2seq" => Ok(Method::Seq2Seq),
            _ => Err(CliError::config(format!("unknown method {s:?}"))),
        }
    }
}

/// One `<Source>-<Method>` configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigId {
    pub source: String,
    pub method: Method,
}

impl fmt::Display for ConfigId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.source, self.method)
    }
}

impl FromStr for ConfigId {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        let (source, method) = s
            .rsplit_once('-')
            .ok_or_else(|| CliError::config(format!("configuration {s:?} is not <Source>-<Method>")))?;
        if source.is_empty() {
            return Err(CliError::config(format!("configuration {s:?} has no source")));
        }
        Ok(ConfigId {
            source: source.to_string(),
            method: method.parse()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pairing {
    AllOrdered,
    Consecutive,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SessionSettings {
    pub gap_minutes: u64,
    pub pairing: Pairing,
    pub user_column: usize,
    pub query_column: usize,
    pub time_column: usize,
}

impl Default for SessionSettings {
    fn default() -> Self {
        let f = FieldSpec::default();
        SessionSettings {
            gap_minutes: 30,
            pairing: Pairing::AllOrdered,
            user_column: f.user,
            query_column: f.query,
            time_column: f.timestamp,
        }
    }
}

impl SessionSettings {
    pub fn gap(&self) -> Duration {
        Duration::from_secs(self.gap_minutes * 60)
    }

    pub fn pairing_mode(&self) -> PairingMode {
        match self.pairing {
            Pairing::AllOrdered => PairingMode::AllOrdered,
            Pairing::Consecutive => PairingMode::Consecutive,
        }
    }

    pub fn field_spec(&self) -> FieldSpec {
        FieldSpec {
            user: self.user_column,
            query: self.query_column,
            timestamp: self.time_column,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PopSuffixSettings {
    pub max_len: usize,
    pub min_count: u64,
    pub skip_repeated_word: bool,
}

impl Default for PopSuffixSettings {
    fn default() -> Self {
        PopSuffixSettings {
            max_len: DEFAULT_MAX_LEN,
            min_count: DEFAULT_MIN_COUNT,
            skip_repeated_word: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecodeSettings {
    pub nlm_beam: usize,
    pub seq2seq_beam: usize,
    pub max_chars: usize,
    pub max_words: usize,
}

impl Default for DecodeSettings {
    fn default() -> Self {
        DecodeSettings {
            nlm_beam: 30,
            seq2seq_beam: 100,
            max_chars: 60,
            max_words: 12,
        }
    }
}

/// The declarative run configuration, after command-line overrides.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Overrides the per-model seeds when set.
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub depth: usize,
    /// Candidates kept per query, flavor and configuration.
    pub k: usize,
    pub queries: Option<PathBuf>,
    pub qrels: Option<PathBuf>,
    /// Configurations in report order.
    pub configs: Vec<String>,
    pub sources: Vec<SourceSpec>,
    pub session: SessionSettings,
    pub popsuffix: PopSuffixSettings,
    pub char_nlm: CharLmConfig,
    pub seq2seq: Seq2SeqConfig,
    pub decode: DecodeSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: None,
            out: PathBuf::from("out"),
            depth: DEFAULT_POOL_DEPTH,
            k: DEFAULT_POOL_DEPTH,
            queries: None,
            qrels: None,
            configs: Vec::new(),
            sources: Vec::new(),
            session: SessionSettings::default(),
            popsuffix: PopSuffixSettings::default(),
            char_nlm: CharLmConfig::default(),
            seq2seq: Seq2SeqConfig::default(),
            decode: DecodeSettings::default(),
        }
    }
}

/// Command-line values that win over the file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub depth: Option<usize>,
    pub beam: Option<usize>,
    pub k: Option<usize>,
}

impl RunConfig {
    /// Parses TOML; relative paths are taken relative to `base`.
    pub fn from_toml(text: &str, base: &Path) -> CliResult<Self> {
        let mut config: RunConfig =
            toml::from_str(text).map_err(|e| CliError::config(format!("config: {}", e.message())))?;
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut config.out);
        for s in &mut config.sources {
            resolve(&mut s.path);
        }
        if let Some(q) = &mut config.queries {
            resolve(q);
        }
        if let Some(q) = &mut config.qrels {
            resolve(q);
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.seed = Some(seed);
        }
        if let Some(seed) = self.seed {
            self.char_nlm.seed = seed;
            self.seq2seq.seed = seed;
        }
        if let Some(out) = &o.out {
            self.out = out.clone();
        }
        if let Some(depth) = o.depth {
            self.depth = depth;
        }
        if let Some(beam) = o.beam {
            self.decode.nlm_beam = beam;
            self.decode.seq2seq_beam = beam;
        }
        if let Some(k) = o.k {
            self.k = k;
        }
    }

    pub fn source(&self, name: &str) -> CliResult<&SourceSpec> {
        self.sources
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| CliError::config(format!("no source named {name:?}")))
    }

    /// Parsed configurations in report order.
    pub fn config_ids(&self) -> CliResult<Vec<ConfigId>> {
        let ids = self
            .configs
            .iter()
            .map(|c| c.parse())
            .collect::<CliResult<Vec<ConfigId>>>()?;
        for id in &ids {
            self.check_combination(&id.source, id.method)?;
        }
        Ok(ids)
    }

    pub fn check_combination(&self, source: &str, method: Method) -> CliResult<()> {
        let spec = self.source(source)?;
        if method == Method::Seq2Seq && !spec.kind.has_pairs() {
            return Err(CliError::config(format!(
                "{source}-{method}: source kind {:?} provides no pairs for Seq2Seq",
                spec.kind
            )));
        }
        Ok(())
    }

    pub fn validate(&self) -> CliResult<()> {
        let mut names = std::collections::HashSet::new();
        for s in &self.sources {
            if s.name.is_empty() || s.name.contains(['/', '\\', '\t']) {
                return Err(CliError::config(format!("bad source name {:?}", s.name)));
            }
            if !names.insert(&s.name) {
                return Err(CliError::config(format!("duplicate source {:?}", s.name)));
            }
        }
        let ids = self.config_ids()?;
        let mut seen = std::collections::HashSet::new();
        for id in &ids {
            if !seen.insert(id.to_string()) {
                return Err(CliError::config(format!("duplicate configuration {id}")));
            }
        }
        if self.depth == 0 || self.k == 0 {
            return Err(CliError::config("depth and k must be at least 1"));
        }
        if self.decode.nlm_beam == 0 || self.decode.seq2seq_beam == 0 {
            return Err(CliError::config("beam widths must be at least 1"));
        }
        if self.popsuffix.max_len == 0 {
            return Err(CliError::config("popsuffix.max_len must be at least 1"));
        }
        self.char_nlm
            .validate()
            .map_err(|e| CliError::config(format!("char_nlm: {e}")))?;
        self.seq2seq
            .validate()
            .map_err(|e| CliError::config(format!("seq2seq: {e}")))?;
        Ok(())
    }

    pub fn corpus_dir(&self, source: &str) -> PathBuf {
        self.out.join("corpora").join(source)
    }

    pub fn model_dir(&self, id: &ConfigId) -> PathBuf {
        self.out.join("models").join(id.to_string())
    }

    pub fn run_path(&self, id: &ConfigId) -> PathBuf {
        self.out.join("runs").join(format!("{id}.tsv"))
    }
}
