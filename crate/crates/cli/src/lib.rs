//! The `tasksuggest` pipeline: ingest sources, train models, generate
//! suggestions for a query file, pool the candidates and evaluate them.
//!
//! Every command reads one declarative TOML file; `--seed`, `--out`,
//! `--depth`, `--beam` and `--k` override it.

pub mod commands;
pub mod config;
pub mod error;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{ConfigId, Method, Overrides, RunConfig};
pub use error::{CliError, CliResult, ErrorKind};

#[derive(Debug, Parser)]
#[command(name = "tasksuggest", version, about = "Task-based query suggestion pipeline")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Pool depth.
    #[arg(long, global = true)]
    pub depth: Option<usize>,
    /// Beam width for both neural decoders.
    #[arg(long, global = true)]
    pub beam: Option<usize>,
    /// Suggestions kept per query and flavor.
    #[arg(long, global = true)]
    pub k: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse sources into text and pair corpora.
    Ingest {
        /// Only this source.
        #[arg(long)]
        source: Option<String>,
        /// Check that the sources can feed this method.
        #[arg(long)]
        method: Option<String>,
    },
    /// Build suffix tables and train neural models.
    Train {
        /// Only these configurations, e.g. AOL-Seq2Seq.
        #[arg(long = "only")]
        only: Vec<String>,
        /// Continue from existing checkpoints up to the configured epochs.
        #[arg(long)]
        resume: bool,
        /// Override the epoch count of both neural models.
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Generate run files for a query file.
    Suggest {
        #[arg(long)]
        queries: Option<PathBuf>,
        #[arg(long = "only")]
        only: Vec<String>,
    },
    /// Merge the top of every run into an assessment pool.
    Pool {
        /// Run files; defaults to those of the configured configurations.
        runs: Vec<PathBuf>,
    },
    /// Compute the metrics table.
    Eval {
        #[arg(long)]
        qrels: Option<PathBuf>,
        /// Recall over whole rankings instead of the pool depth.
        #[arg(long)]
        full_ranking_recall: bool,
        runs: Vec<PathBuf>,
    },
}

pub fn load_config(common: &Common) -> CliResult<RunConfig> {
    let mut config = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    config.apply(&Overrides {
        seed: common.seed,
        out: common.out.clone(),
        depth: common.depth,
        beam: common.beam,
        k: common.k,
    });
    Ok(config)
}

pub fn run(cli: Cli) -> CliResult<()> {
    let mut config = load_config(&cli.common)?;
    if let Command::Train { epochs: Some(n), .. } = &cli.command {
        config.char_nlm.epochs = *n;
        config.seq2seq.epochs = *n;
    }
    config.validate()?;
    match &cli.command {
        Command::Ingest { source, method } => {
            let method = method.as_deref().map(str::parse).transpose()?;
            for s in commands::ingest(&config, source.as_deref(), method)? {
                eprintln!(
                    "ingested\t{}\tentries={}\tpairs={}\tskipped={}",
                    s.source,
                    s.corpus_entries,
                    s.pairs.map_or_else(|| "-".into(), |p| p.to_string()),
                    s.skipped_lines
                );
            }
        }
        Command::Train { only, resume, .. } => {
            for s in commands::train(&config, only, *resume)? {
                eprintln!(
                    "trained\t{}\tepochs={}\tloss={}",
                    s.config_id,
                    s.epochs,
                    s.final_loss.map_or_else(|| "-".into(), |l| format!("{l:.6}"))
                );
            }
        }
        Command::Suggest { queries, only } => {
            for p in commands::suggest(&config, only, queries.as_deref())? {
                eprintln!("wrote\t{}", p.display());
            }
        }
        Command::Pool { runs } => {
            let p = commands::pool(&config, runs)?;
            eprintln!("wrote\t{}", p.display());
        }
        Command::Eval {
            qrels,
            full_ranking_recall,
            runs,
        } => {
            print!(
                "{}",
                commands::eval(&config, runs, qrels.as_deref(), *full_ranking_recall)?
            );
        }
    }
    Ok(())
}
