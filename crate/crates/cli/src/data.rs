use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use rnng::evaluation::{f1, format_report, format_sentence_tsv};
use rnng::transition::{oracle as extract, read_oracle, write_oracle, Mode, OracleEntry};
use rnng::treebank::{build_vocab, corpus_stats, format_stats_table, strip_preterminals, write_bracketed, Tree};

use crate::{read_text, read_trees, write_file, Output, Policy};

#[derive(Args, Debug)]
pub struct PreprocessArgs {
    /// Bracketed treebank with preterminals.
    #[arg(long = "in")]
    input: PathBuf,
    #[command(flatten)]
    out: Output,
}

pub fn preprocess(a: PreprocessArgs) -> Result<()> {
    let trees = read_trees(&a.input)?;
    let stripped: Vec<Tree> = trees.iter().map(strip_preterminals).collect();
    log::info!("{} trees", stripped.len());
    a.out.write(&write_bracketed(&stripped))
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OracleMode {
    Parse,
    Generate,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    /// Transition system for extraction.
    #[arg(long, value_enum, required_unless_present = "replay")]
    mode: Option<OracleMode>,
    /// Trees to extract from.
    #[arg(long = "in", required_unless_present = "replay", conflicts_with = "replay")]
    input: Option<PathBuf>,
    /// Replay an oracle file and print the trees it builds.
    #[arg(long)]
    replay: Option<PathBuf>,
    /// Training trees defining the vocabulary for the unkified line
    /// (defaults to the input).
    #[arg(long)]
    vocab_from: Option<PathBuf>,
    /// Singleton handling for the vocabulary.
    #[arg(long, value_enum, default_value_t = Policy::Berkeley)]
    policy: Policy,
    #[command(flatten)]
    out: Output,
}

pub fn oracle(a: OracleArgs) -> Result<()> {
    if let Some(path) = &a.replay {
        let entries = read_oracle(&read_text(path)?).with_context(|| format!("reading {}", path.display()))?;
        let trees = entries
            .iter()
            .enumerate()
            .map(|(i, e)| e.replay().with_context(|| format!("replaying derivation {}", i + 1)))
            .collect::<Result<Vec<_>>>()?;
        return a.out.write(&write_bracketed(&trees));
    }
    let (Some(mode), Some(input)) = (a.mode, &a.input) else {
        bail!("--mode and --in are required unless --replay is given");
    };
    let trees = read_trees(input)?;
    let vocab_trees = match &a.vocab_from {
        Some(p) => read_trees(p)?,
        None => trees.clone(),
    };
    let vocab = build_vocab(&vocab_trees, a.policy.into()).context("building the vocabulary")?;
    let mode = match mode {
        OracleMode::Parse => Mode::Parse,
        OracleMode::Generate => Mode::Generate,
    };
    let entries = trees
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let raw: Vec<String> = t.leaves().into_iter().map(String::from).collect();
            let unkified = vocab.unkify_sentence(&raw);
            let actions = extract(t, mode).with_context(|| format!("tree {}", i + 1))?;
            Ok(OracleEntry { raw, unkified, actions })
        })
        .collect::<Result<Vec<_>>>()?;
    log::info!("{} derivations", entries.len());
    a.out.write(&write_oracle(&entries))
}

#[derive(Args, Debug)]
pub struct ScoreArgs {
    /// Gold trees.
    #[arg(long)]
    gold: PathBuf,
    /// Predicted trees, aligned with the gold file.
    #[arg(long)]
    pred: PathBuf,
    /// Also write per-sentence counts as TSV.
    #[arg(long)]
    tsv: Option<PathBuf>,
    /// Row label in the report.
    #[arg(long, default_value = "test")]
    name: String,
    #[command(flatten)]
    out: Output,
}

pub fn score(a: ScoreArgs) -> Result<()> {
    let gold = read_trees(&a.gold)?;
    let pred = read_trees(&a.pred)?;
    let scores = f1(&gold, &pred)?;
    if let Some(p) = &a.tsv {
        write_file(p, format_sentence_tsv(&scores).as_bytes())?;
    }
    a.out.write(&format_report(&[(a.name, scores)]))
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    /// Training trees; also defines the vocabulary.
    #[arg(long)]
    train: PathBuf,
    /// Development trees, counted against the training vocabulary.
    #[arg(long)]
    dev: Option<PathBuf>,
    /// Test trees, counted against the training vocabulary.
    #[arg(long)]
    test: Option<PathBuf>,
    /// Singleton handling for the vocabulary.
    #[arg(long, value_enum, default_value_t = Policy::Berkeley)]
    policy: Policy,
    #[command(flatten)]
    out: Output,
}

pub fn stats(a: StatsArgs) -> Result<()> {
    let train = read_trees(&a.train)?;
    let vocab = build_vocab(&train, a.policy.into())?;
    let mut columns = Vec::new();
    for (name, path) in [("Train", Some(&a.train)), ("Dev", a.dev.as_ref()), ("Test", a.test.as_ref())] {
        let Some(path) = path else { continue };
        let trees = if name == "Train" { train.clone() } else { read_trees(path)? };
        let unk: Vec<Tree> = trees.iter().map(|t| vocab.unkify_tree(t)).collect();
        columns.push((name.to_string(), corpus_stats(&unk)));
    }
    a.out.write(&format_stats_table(&columns))
}
