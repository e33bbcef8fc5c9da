use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use tasksuggest::char_nlm::{CharLm, CharLmTrainer, NlmDecodeOptions};
use tasksuggest::eval::{build_pool, report, QrelSet, ReportOptions, RunFile};
use tasksuggest::ingest::{build_query_log_corpora, load_knowhow, load_wikianswers, parse_query_log, QueryLogStats};
use tasksuggest::nn::Checkpoint;
use tasksuggest::popsuffix::{SuffixTable, SuggestOptions};
use tasksuggest::seq2seq::{Seq2SeqDecodeOptions, Seq2SeqModel, Seq2SeqTrainer};
use tasksuggest::{normalize_text, Flavor, PairCorpus, Suggestion, SuggestionCandidate, TextCorpus};

use crate::config::{ConfigId, Method, RunConfig, SourceKind, SourceSpec};
use crate::error::{CliError, CliResult};

pub const CORPUS_FILE: &str = "corpus.txt";
pub const PAIRS_FILE: &str = "pairs.tsv";
pub const STATS_FILE: &str = "stats.json";
pub const SUFFIX_TABLE_FILE: &str = "suffix_table.tsv";
pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const TRAINING_LOG_FILE: &str = "training_log.tsv";
pub const POOL_FILE: &str = "pool.tsv";
pub const REPORT_FILE: &str = "report.tsv";

pub(crate) fn warn(code: &str, message: impl std::fmt::Display) {
    eprintln!("warning\t{code}\t{message}");
}

fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

fn open_artifact(path: &Path, hint: &str) -> CliResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::data(format!("{}: {e} ({hint})", path.display())))
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

fn write_with<F>(path: &Path, f: F) -> CliResult<()>
where
    F: FnOnce(&mut BufWriter<File>) -> tasksuggest::Result<()>,
{
    let mut w = create(path)?;
    f(&mut w).map_err(|e| CliError::from(e).context(path.display()))?;
    w.flush().map_err(|e| CliError::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::data(e.to_string()))?;
    text.push('\n');
    write_with(path, |w| Ok(w.write_all(text.as_bytes())?))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IngestStats {
    pub source: String,
    pub kind: String,
    pub corpus_entries: usize,
    pub pairs: Option<usize>,
    pub skipped_lines: usize,
    pub query_log: Option<QueryLogStats>,
}

/// Parses each selected source into its corpus (and pairs), with a stats
/// sidecar. `method`, if given, is checked against every selected source.
pub fn ingest(config: &RunConfig, only: Option<&str>, method: Option<Method>) -> CliResult<Vec<IngestStats>> {
    let sources: Vec<&SourceSpec> = match only {
        Some(name) => vec![config.source(name)?],
        None => config.sources.iter().collect(),
    };
    if sources.is_empty() {
        return Err(CliError::config("no sources configured"));
    }
    if let Some(m) = method {
        for s in &sources {
            config.check_combination(&s.name, m)?;
        }
    }
    for s in &sources {
        if !s.path.is_file() {
            return Err(CliError::config(format!(
                "source {}: {} does not exist",
                s.name,
                s.path.display()
            )));
        }
    }
    let mut all = Vec::new();
    for s in sources {
        let reader = open(&s.path)?;
        let at_source = |e: tasksuggest::Error| CliError::from(e).context(format!("source {}", s.name));
        let (corpus, pairs, stats) = match s.kind {
            SourceKind::QueryLog => {
                let parsed = parse_query_log(reader, config.session.field_spec()).map_err(at_source)?;
                if parsed.records.is_empty() {
                    return Err(CliError::data(format!("source {}: no valid log records", s.name)));
                }
                let built = build_query_log_corpora(&parsed, config.session.gap(), config.session.pairing_mode());
                let stats = IngestStats {
                    source: s.name.clone(),
                    kind: "query_log".into(),
                    corpus_entries: built.corpus.len(),
                    pairs: Some(built.pairs.len()),
                    skipped_lines: parsed.skipped,
                    query_log: Some(built.stats),
                };
                (built.corpus, Some(built.pairs), stats)
            }
            SourceKind::Knowhow => {
                let k = load_knowhow(reader).map_err(at_source)?;
                let stats = IngestStats {
                    source: s.name.clone(),
                    kind: "knowhow".into(),
                    corpus_entries: k.corpus.len(),
                    pairs: Some(k.pairs.len()),
                    skipped_lines: k.skipped,
                    query_log: None,
                };
                (k.corpus, Some(k.pairs), stats)
            }
            SourceKind::Wikianswers => {
                let w = load_wikianswers(reader).map_err(at_source)?;
                let stats = IngestStats {
                    source: s.name.clone(),
                    kind: "wikianswers".into(),
                    corpus_entries: w.corpus.len(),
                    pairs: None,
                    skipped_lines: w.dropped,
                    query_log: None,
                };
                (w.corpus, None, stats)
            }
        };
        let dir = config.corpus_dir(&s.name);
        write_with(&dir.join(CORPUS_FILE), |w| corpus.write_to(w))?;
        if let Some(pairs) = &pairs {
            write_with(&dir.join(PAIRS_FILE), |w| pairs.write_to(w))?;
        }
        write_json(&dir.join(STATS_FILE), &stats)?;
        all.push(stats);
    }
    Ok(all)
}

fn selected(config: &RunConfig, only: &[String]) -> CliResult<Vec<ConfigId>> {
    let ids = config.config_ids()?;
    if ids.is_empty() {
        return Err(CliError::config("no configurations listed"));
    }
    for o in only {
        if !ids.iter().any(|id| id.to_string() == *o) {
            return Err(CliError::config(format!("unknown configuration {o}")));
        }
    }
    Ok(ids
        .into_iter()
        .filter(|id| only.is_empty() || only.contains(&id.to_string()))
        .collect())
}

fn load_corpus(config: &RunConfig, source: &str) -> CliResult<TextCorpus> {
    let path = config.corpus_dir(source).join(CORPUS_FILE);
    TextCorpus::read_from(open_artifact(&path, "run ingest first")?)
        .map_err(|e| CliError::from(e).context(path.display()))
}

fn load_pairs(config: &RunConfig, source: &str) -> CliResult<PairCorpus> {
    let path = config.corpus_dir(source).join(PAIRS_FILE);
    PairCorpus::read_from(open_artifact(&path, "run ingest first")?)
        .map_err(|e| CliError::from(e).context(path.display()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainSummary {
    pub config_id: String,
    pub epochs: usize,
    pub final_loss: Option<f64>,
}

/// Builds or trains the model of each selected configuration. With `resume`,
/// neural models continue from their checkpoint up to the configured epoch
/// count.
pub fn train(config: &RunConfig, only: &[String], resume: bool) -> CliResult<Vec<TrainSummary>> {
    let mut out = Vec::new();
    for id in selected(config, only)? {
        let dir = config.model_dir(&id);
        let ckpt_path = dir.join(CHECKPOINT_FILE);
        let previous = if resume && id.method != Method::PopSuffix {
            Some(Checkpoint::load(&ckpt_path).map_err(|e| CliError::from(e).context(ckpt_path.display()))?)
        } else {
            None
        };
        let at = |e: tasksuggest::Error| CliError::from(e).context(&id);
        let (ckpt, log) = match id.method {
            Method::PopSuffix => {
                let corpus = load_corpus(config, &id.source)?;
                let table = SuffixTable::build(&corpus, config.popsuffix.max_len)
                    .and_then(|t| t.pruned(config.popsuffix.min_count))
                    .map_err(at)?;
                write_with(&dir.join(SUFFIX_TABLE_FILE), |w| table.write_to(w))?;
                out.push(TrainSummary {
                    config_id: id.to_string(),
                    epochs: 0,
                    final_loss: None,
                });
                continue;
            }
            Method::Nlm => {
                let corpus = load_corpus(config, &id.source)?;
                let mut trainer = match &previous {
                    Some(ckpt) => CharLmTrainer::resume(ckpt, &corpus),
                    None => CharLmTrainer::new(&corpus, config.char_nlm.clone()),
                }
                .map_err(at)?;
                trainer.train_to(config.char_nlm.epochs).map_err(at)?;
                (trainer.checkpoint(Some(&id.source)), trainer.log().clone())
            }
            Method::Seq2Seq => {
                let pairs = load_pairs(config, &id.source)?;
                let mut trainer = match &previous {
                    Some(ckpt) => Seq2SeqTrainer::resume(ckpt, &pairs),
                    None => Seq2SeqTrainer::new(&pairs, config.seq2seq.clone()),
                }
                .map_err(at)?;
                trainer.train_to(config.seq2seq.epochs).map_err(at)?;
                (trainer.checkpoint(Some(&id.source)), trainer.log().clone())
            }
        };
        write_with(&ckpt_path, |w| ckpt.write_to(w))?;
        write_with(&dir.join(TRAINING_LOG_FILE), |w| {
            Ok(w.write_all(log.to_tsv().as_bytes())?)
        })?;
        out.push(TrainSummary {
            config_id: id.to_string(),
            epochs: log.epochs.len(),
            final_loss: log.final_loss(),
        });
    }
    Ok(out)
}

/// `(query_id, text)` per non-empty line: `id<TAB>text`, or a bare query
/// whose id is its line number. Empty queries are skipped with a warning.
pub fn read_queries(path: &Path) -> CliResult<Vec<(String, String)>> {
    let mut out = Vec::new();
    let mut ids = std::collections::HashSet::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| CliError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let (id, text) = match line.split_once('\t') {
            Some((id, text)) => (id.trim().to_string(), text),
            None => ((i + 1).to_string(), line.as_str()),
        };
        let text = normalize_text(text);
        if text.is_empty() {
            warn(
                "empty_query",
                format!("{}:{} query {id} skipped", path.display(), i + 1),
            );
            continue;
        }
        if id.is_empty() || !ids.insert(id.clone()) {
            return Err(CliError::data(format!(
                "{}:{}: missing or duplicate query id {id:?}",
                path.display(),
                i + 1
            )));
        }
        out.push((id, text));
    }
    if out.is_empty() {
        return Err(CliError::data(format!("{}: no queries", path.display())));
    }
    Ok(out)
}

enum Generator {
    PopSuffix(SuffixTable),
    Nlm(Box<CharLm>),
    Seq2Seq(Box<Seq2SeqModel>),
}

fn load_generator(config: &RunConfig, id: &ConfigId) -> CliResult<Generator> {
    let dir = config.model_dir(id);
    let hint = "run train first";
    Ok(match id.method {
        Method::PopSuffix => {
            let path = dir.join(SUFFIX_TABLE_FILE);
            Generator::PopSuffix(
                SuffixTable::read_from(open_artifact(&path, hint)?)
                    .map_err(|e| CliError::from(e).context(path.display()))?,
            )
        }
        Method::Nlm | Method::Seq2Seq => {
            let path = dir.join(CHECKPOINT_FILE);
            let ckpt = Checkpoint::read_from(open_artifact(&path, hint)?)
                .map_err(|e| CliError::from(e).context(path.display()))?;
            let at = |e: tasksuggest::Error| CliError::from(e).context(path.display());
            if id.method == Method::Nlm {
                Generator::Nlm(Box::new(CharLm::from_checkpoint(&ckpt).map_err(at)?))
            } else {
                Generator::Seq2Seq(Box::new(Seq2SeqModel::from_checkpoint(&ckpt).map_err(at)?))
            }
        }
    })
}

/// Up to `k` suggestions of each flavor, best first.
fn per_flavor(suggestions: Vec<Suggestion>, k: usize) -> Vec<Suggestion> {
    let (mut qc, mut qr) = (0, 0);
    suggestions
        .into_iter()
        .filter(|s| {
            let n = if s.flavor == Flavor::QC { &mut qc } else { &mut qr };
            *n += 1;
            *n <= k
        })
        .collect()
}

/// Writes one run file per selected configuration.
pub fn suggest(config: &RunConfig, only: &[String], queries: Option<&Path>) -> CliResult<Vec<PathBuf>> {
    let query_path = queries
        .map(Path::to_path_buf)
        .or_else(|| config.queries.clone())
        .ok_or_else(|| CliError::config("no queries file given"))?;
    if !query_path.is_file() {
        return Err(CliError::config(format!("{} does not exist", query_path.display())));
    }
    let queries = read_queries(&query_path)?;
    let ids = selected(config, only)?;
    let mut written = Vec::new();
    for id in ids {
        let generator = load_generator(config, &id)?;
        let mut candidates = Vec::new();
        for (qid, q0) in &queries {
            let at = |e: tasksuggest::Error| CliError::from(e).context(format!("{id} query {qid}"));
            let suggestions = match &generator {
                Generator::PopSuffix(table) => {
                    let options = SuggestOptions {
                        skip_repeated_word: config.popsuffix.skip_repeated_word,
                    };
                    table.suggest(q0, config.k, &options).map_err(at)?
                }
                Generator::Nlm(model) => {
                    let options = NlmDecodeOptions {
                        beam_width: config.decode.nlm_beam,
                        k: config.decode.nlm_beam.max(config.k),
                        max_chars: config.decode.max_chars,
                        ..Default::default()
                    };
                    model.suggest(q0, &options).map_err(at)?
                }
                Generator::Seq2Seq(model) => {
                    let options = Seq2SeqDecodeOptions {
                        beam_width: config.decode.seq2seq_beam,
                        k: config.decode.seq2seq_beam.max(config.k),
                        max_words: config.decode.max_words,
                        ..Default::default()
                    };
                    let out = model.suggest(q0, &options).map_err(at)?;
                    if out.source_all_unknown {
                        warn(
                            "unknown_words",
                            format!("{id} query {qid}: every word is out of vocabulary"),
                        );
                    }
                    out.suggestions
                }
            };
            candidates.extend(
                per_flavor(suggestions, config.k)
                    .into_iter()
                    .map(|s| SuggestionCandidate {
                        query_id: qid.clone(),
                        text: s.text,
                        score: s.log_score,
                        flavor: s.flavor,
                        config_id: id.to_string(),
                    }),
            );
        }
        let mut run = RunFile::from_candidates(candidates).map_err(|e| CliError::from(e).context(&id))?;
        for (qid, _) in &queries {
            run.declare_query(qid);
        }
        let path = config.run_path(&id);
        write_with(&path, |w| run.write_to(w))?;
        written.push(path);
    }
    Ok(written)
}

fn load_runs(config: &RunConfig, explicit: &[PathBuf]) -> CliResult<Vec<RunFile>> {
    let paths: Vec<PathBuf> = if explicit.is_empty() {
        selected(config, &[])?.iter().map(|id| config.run_path(id)).collect()
    } else {
        explicit.to_vec()
    };
    paths
        .iter()
        .map(|p| {
            RunFile::read_from(open_artifact(p, "run suggest first")?)
                .map_err(|e| CliError::from(e).context(p.display()))
        })
        .collect()
}

/// Writes the assessment pool of the runs.
pub fn pool(config: &RunConfig, runs: &[PathBuf]) -> CliResult<PathBuf> {
    let runs = load_runs(config, runs)?;
    let pool = build_pool(&runs, config.depth)?;
    let path = config.out.join(POOL_FILE);
    write_with(&path, |w| pool.write_to(w))?;
    Ok(path)
}

/// Writes the metrics report and returns its text.
pub fn eval(
    config: &RunConfig,
    runs: &[PathBuf],
    qrels: Option<&Path>,
    full_ranking_recall: bool,
) -> CliResult<String> {
    let qrels_path = qrels
        .map(Path::to_path_buf)
        .or_else(|| config.qrels.clone())
        .ok_or_else(|| CliError::config("no qrels file given"))?;
    if !qrels_path.is_file() {
        return Err(CliError::config(format!("{} does not exist", qrels_path.display())));
    }
    let qrels = QrelSet::read_from(open(&qrels_path)?).map_err(|e| CliError::from(e).context(qrels_path.display()))?;
    let runs = load_runs(config, runs)?;
    let present: std::collections::HashSet<String> = runs.iter().flat_map(|r| r.config_ids()).collect();
    let order: Vec<String> = config
        .configs
        .iter()
        .filter_map(|c| c.parse::<ConfigId>().ok().map(|id| id.to_string()))
        .filter(|c| present.contains(c))
        .collect();
    let options = ReportOptions {
        depth: config.depth,
        full_ranking_recall,
        config_order: (order.len() == present.len()).then_some(order),
    };
    let table = report(&runs, &qrels, &options)?;
    let text = table.to_tsv();
    let path = config.out.join(REPORT_FILE);
    write_with(&path, |w| Ok(w.write_all(text.as_bytes())?))?;
    Ok(text)
}
