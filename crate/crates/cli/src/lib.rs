//! The `relmine` command line.
//!
//! Each subcommand reads files, writes files and prints a one-line summary
//! to standard error. Machine-readable results (reports, tables) go to
//! standard output. Exit codes: 0 success, 1 invalid invocation or
//! configuration, 2 failure while running.

mod commands;
pub mod config;

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::PipelineConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug)]
pub enum Failure {
    /// Bad flags, config values or missing inputs.
    Invalid(String),
    /// Anything that went wrong after validation.
    Runtime(String),
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Invalid(_) => EXIT_INVALID,
            Failure::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Invalid(m) => write!(f, "invalid invocation: {m}"),
            Failure::Runtime(m) => write!(f, "{m}"),
        }
    }
}

pub(crate) fn invalid(msg: impl fmt::Display) -> Failure {
    Failure::Invalid(msg.to_string())
}

pub(crate) fn runtime(msg: impl fmt::Display) -> Failure {
    Failure::Runtime(msg.to_string())
}

#[derive(Debug, Parser)]
#[command(
    name = "relmine",
    version,
    about = "Curate multilingual query-category and query-item relevance data"
)]
pub struct Cli {
    /// JSON pipeline configuration; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Worker threads for mining and generation (falls back to RELMINE_THREADS).
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Default)]
pub struct Common {
    /// qc or qi.
    #[arg(long)]
    pub task: Option<String>,
    /// Input corpus.
    #[arg(long = "in", value_name = "FILE")]
    pub input: Option<PathBuf>,
    /// Path separator in input files: angle (" > ") or comma (", ").
    #[arg(long, value_name = "SEP")]
    pub path_separator: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a corpus and rewrite it in canonical TSV.
    Ingest {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        /// Write rejected lines as JSON.
        #[arg(long, value_name = "FILE")]
        diagnostics: Option<PathBuf>,
    },
    /// Remove conflicting labels, duplicates and numeric queries.
    Clean {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        /// Numeric queries to keep, one per line.
        #[arg(long, value_name = "FILE")]
        allowlist: Option<PathBuf>,
        /// Also write the report JSON here.
        #[arg(long, value_name = "FILE")]
        report: Option<PathBuf>,
        #[arg(long)]
        no_conflicts: bool,
        #[arg(long)]
        no_dedup: bool,
        #[arg(long)]
        no_numeric: bool,
        /// ignore-punctuation or digits-only.
        #[arg(long, value_name = "MODE")]
        numeric_mode: Option<String>,
    },
    /// Per-language label counts.
    Stats {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        csv: Option<PathBuf>,
    },
    /// Build the category tree of a QC corpus.
    Taxonomy {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Generate QC negatives from the category tree.
    GenNegatives {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        /// same-l1, sibling-leaf, cross-root or synthetic-query.
        #[arg(long)]
        strategy: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_name = "N")]
        max_resamples: Option<u32>,
        /// Query generator program for synthetic-query.
        #[arg(long, value_name = "PROGRAM")]
        generator: Option<String>,
        /// Argument passed to the generator (repeatable).
        #[arg(long = "generator-arg", value_name = "ARG", allow_hyphen_values = true)]
        generator_args: Vec<String>,
        #[arg(long, value_name = "FILE")]
        diagnostics: Option<PathBuf>,
    },
    /// Mine QI negatives by embedding similarity.
    Mine {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        /// EMBV1 item embeddings.
        #[arg(long, value_name = "FILE")]
        embeddings: Option<PathBuf>,
        /// easy or hard.
        #[arg(long)]
        mode: Option<String>,
        /// Hard-negative similarity threshold (exclusive).
        #[arg(long)]
        tau: Option<f64>,
        /// closest or uniform-below.
        #[arg(long)]
        hard_pick: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_name = "FILE")]
        diagnostics: Option<PathBuf>,
    },
    /// Plan translation augmentation.
    AugmentPlan {
        #[command(flatten)]
        common: Common,
        /// Dev corpus whose category paths select QC sources.
        #[arg(long, value_name = "FILE")]
        dev: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        /// Comma-separated target language codes.
        #[arg(long, value_name = "CODES")]
        targets: Option<String>,
        #[arg(long)]
        quota: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Execute a translation plan.
    AugmentRun {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "FILE")]
        plan: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        /// `stub` or the base URL of a /translate service.
        #[arg(long)]
        translator: Option<String>,
        #[arg(long)]
        batch_size: Option<usize>,
        #[arg(long)]
        retries: Option<u32>,
        #[arg(long)]
        concurrency: Option<usize>,
        #[arg(long, value_name = "SECONDS")]
        timeout: Option<u64>,
        #[arg(long, value_name = "FILE")]
        diagnostics: Option<PathBuf>,
    },
    /// Split a corpus into train, validation and test.
    Split {
        #[command(flatten)]
        common: Common,
        /// Directory for train.tsv, validation.tsv, test.tsv and manifest.json.
        #[arg(long, value_name = "DIR")]
        out_dir: Option<PathBuf>,
        /// stratified or query-disjoint.
        #[arg(long)]
        mode: Option<String>,
        /// Three comma-separated ratios.
        #[arg(long, value_name = "R,R,R")]
        ratios: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Score predictions against a gold corpus.
    Evaluate {
        #[arg(long)]
        task: Option<String>,
        #[arg(long, value_name = "FILE")]
        gold: Option<PathBuf>,
        /// `index\tlabel` TSV with header.
        #[arg(long = "pred", value_name = "FILE")]
        predictions: Option<PathBuf>,
        #[arg(long, value_name = "SEP")]
        path_separator: Option<String>,
        /// Metrics report JSON.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        svg: Option<PathBuf>,
        /// Metrics report of another task to average with (repeatable).
        #[arg(long, value_name = "FILE")]
        with: Vec<PathBuf>,
        /// Cross-task summary JSON.
        #[arg(long, value_name = "FILE")]
        average_out: Option<PathBuf>,
    },
    /// Label distribution per language as JSON, CSV and SVG.
    Report {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        svg: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        csv: Option<PathBuf>,
        #[arg(long)]
        title: Option<String>,
    },
}

fn thread_count(cli: Option<usize>, config: &PipelineConfig) -> Result<Option<usize>, Failure> {
    let n = match cli.or(config.threads) {
        Some(n) => Some(n),
        None => match std::env::var("RELMINE_THREADS") {
            Ok(v) => Some(
                v.trim()
                    .parse()
                    .map_err(|_| invalid(format!("RELMINE_THREADS={v:?} is not a count")))?,
            ),
            Err(_) => None,
        },
    };
    if n == Some(0) {
        return Err(invalid("thread count must be positive"));
    }
    Ok(n)
}

fn execute(cli: Cli) -> Result<(), Failure> {
    let config = match &cli.config {
        Some(path) => PipelineConfig::load(path).map_err(invalid)?,
        None => PipelineConfig::default(),
    };
    match thread_count(cli.threads, &config)? {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(runtime)?;
            pool.install(|| commands::dispatch(cli.command, &config))
        }
        None => commands::dispatch(cli.command, &config),
    }
}

/// Runs the CLI on `argv` (including the program name) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("relmine: {f}");
            f.exit_code()
        }
    }
}
