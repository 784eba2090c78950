//! `rnng`: preprocessing, oracles, training, parsing, sampling,
//! language-model evaluation and scoring.

mod data;
mod infer;
mod train;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rnng::neural::{Composition, Precision};
use rnng::treebank::{parse_bracketed, SingletonPolicy, Tree};

#[derive(Parser, Debug)]
#[command(name = "rnng", version, about = "Recurrent neural network grammars")]
struct Cli {
    /// Root seed; every stochastic step derives its own seed from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for per-sentence parallelism.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Only log warnings and errors.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Strip preterminals and write one tree per line.
    Preprocess(data::PreprocessArgs),
    /// Extract transition sequences from trees, or replay them.
    Oracle(data::OracleArgs),
    /// Train the generative model.
    TrainGen(train::TrainArgs),
    /// Train the discriminative parser.
    TrainDisc(train::TrainArgs),
    /// Train the sequential LSTM language model.
    TrainLm(train::TrainArgs),
    /// Parse sentences greedily, or by sampling and reranking.
    Parse(infer::ParseArgs),
    /// Draw samples from a generative model or parses from a parser.
    Sample(infer::SampleArgs),
    /// Per-sentence log-likelihoods and corpus perplexity.
    LmEval(infer::LmEvalArgs),
    /// Labeled-bracket precision, recall and F1.
    Score(data::ScoreArgs),
    /// Corpus size statistics.
    Stats(data::StatsArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Policy {
    Berkeley,
    Single,
}

impl From<Policy> for SingletonPolicy {
    fn from(p: Policy) -> Self {
        match p {
            Policy::Berkeley => SingletonPolicy::BerkeleyRules,
            Policy::Single => SingletonPolicy::SingleUnk,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Prec {
    F32,
    F64,
}

impl From<Prec> for Precision {
    fn from(p: Prec) -> Self {
        match p {
            Prec::F32 => Precision::F32,
            Prec::F64 => Precision::F64,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Compose {
    Correct,
    Buggy,
}

impl From<Compose> for Composition {
    fn from(c: Compose) -> Self {
        match c {
            Compose::Correct => Composition::Correct,
            Compose::Buggy => Composition::Buggy,
        }
    }
}

/// Output destination shared by most subcommands.
#[derive(Args, Debug, Clone)]
pub struct Output {
    /// Output file (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Output {
    fn write(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(p) => write_file(p, text.as_bytes()),
            None => {
                use std::io::Write;
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(text.as_bytes()).context("writing to stdout")?;
                stdout.flush().context("writing to stdout")
            }
        }
    }
}

pub struct Globals {
    pub seed: Option<u64>,
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).with_context(|| format!("reading {}", path.display()))
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

pub fn read_trees(path: &Path) -> Result<Vec<Tree>> {
    let text = read_text(path)?;
    parse_bracketed(&text).with_context(|| format!("parsing {}", path.display()))
}

/// One sentence per line. Lines holding a bracketed tree contribute its
/// yield; other lines are whitespace-separated tokens. Blank lines are
/// skipped.
pub fn read_sentences(path: &Path) -> Result<Vec<Vec<String>>> {
    let text = read_text(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('(') {
            let t = rnng::treebank::parse_tree(line)
                .with_context(|| format!("{}:{}: bad tree", path.display(), i + 1))?;
            out.push(t.leaves().into_iter().map(String::from).collect());
        } else {
            out.push(line.split_whitespace().map(String::from).collect());
        }
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.max(1))
        .build_global()
        .context("starting the thread pool")?;
    let globals = Globals { seed: cli.seed };
    log::info!("threads = {}", cli.threads);
    match cli.command {
        Command::Preprocess(a) => data::preprocess(a),
        Command::Oracle(a) => data::oracle(a),
        Command::TrainGen(a) => train::run(train::Kind::Generative, a, &globals),
        Command::TrainDisc(a) => train::run(train::Kind::Discriminative, a, &globals),
        Command::TrainLm(a) => train::run(train::Kind::LstmLm, a, &globals),
        Command::Parse(a) => infer::parse(a, &globals),
        Command::Sample(a) => infer::sample(a, &globals),
        Command::LmEval(a) => infer::lm_eval(a, &globals),
        Command::Score(a) => data::score(a),
        Command::Stats(a) => data::stats(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .filter_level(if cli.quiet {
            log::LevelFilter::Warn
        } else {
            log::LevelFilter::Info
        })
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .init();
    log::info!("{:?}", cli.command);
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
