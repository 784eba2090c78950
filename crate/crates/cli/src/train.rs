use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use rnng::inference::sentence_seed;
use rnng::models::{DiscriminativeModel, GenerativeModel, LstmLm, ModelConfig};
use rnng::neural::Real;
use rnng::training::{train_discriminative, train_generative, train_lstm_lm, TrainConfig, TrainReport};
use rnng::treebank::{assign_word_classes, build_vocab, frequency_binned, Tree, Vocab, WordClasses};

use crate::{read_sentences, read_text, read_trees, write_file, Compose, Globals, Policy, Prec};

#[derive(Debug, Clone, Copy)]
pub enum Kind {
    Generative,
    Discriminative,
    LstmLm,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Training trees (sentences or trees for train-lm).
    #[arg(long)]
    train: PathBuf,
    /// Development set used for model selection.
    #[arg(long)]
    dev: PathBuf,
    /// Where the best-dev checkpoint is written.
    #[arg(long)]
    out: PathBuf,
    /// Model configuration file (`key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Word clusters (`word<TAB>class` lines); frequency binning otherwise.
    #[arg(long)]
    clusters: Option<PathBuf>,
    /// Singleton handling for the vocabulary.
    #[arg(long, value_enum, default_value_t = Policy::Berkeley)]
    policy: Policy,
    /// Overrides the configuration's composition variant.
    #[arg(long, value_enum)]
    composition: Option<Compose>,
    /// Passes over the training data.
    #[arg(long, default_value_t = 10)]
    epochs: usize,
    /// SGD learning rate.
    #[arg(long, default_value_t = 0.1)]
    lr: f64,
    /// Overrides the configuration's dropout rate.
    #[arg(long)]
    dropout: Option<f64>,
    /// Evaluate on dev every this many sentences (default: once per epoch).
    #[arg(long)]
    eval_every: Option<usize>,
    /// Stop after this many evaluations without improvement.
    #[arg(long)]
    patience: Option<usize>,
    /// Gradient-norm clipping threshold.
    #[arg(long)]
    clip: Option<f64>,
    /// Inverse-epoch learning-rate decay.
    #[arg(long, default_value_t = 0.0)]
    decay: f64,
    /// Training log (`epoch sentence loss dev_loss` lines).
    #[arg(long)]
    log: Option<PathBuf>,
    /// Floating-point precision for model arithmetic.
    #[arg(long, value_enum, default_value_t = Prec::F32)]
    precision: Prec,
}

fn model_config(kind: Kind, a: &TrainArgs, globals: &Globals) -> Result<ModelConfig> {
    let base = match kind {
        Kind::Generative => ModelConfig::generative(),
        Kind::Discriminative => ModelConfig::discriminative(),
        Kind::LstmLm => ModelConfig::lstm_lm(),
    };
    let mut config = match &a.config {
        Some(p) => base
            .parse_overrides(&read_text(p)?)
            .with_context(|| format!("in {}", p.display()))?,
        None => base,
    };
    if let Some(c) = a.composition {
        config.composition = c.into();
    }
    if let Some(d) = a.dropout {
        config.dropout = d;
    }
    if let Some(s) = globals.seed {
        config.seed = s;
    }
    config.validate()?;
    Ok(config)
}

fn word_classes(vocab: &Vocab, config: &ModelConfig, clusters: Option<&PathBuf>) -> Result<WordClasses> {
    Ok(match (clusters, config.classes) {
        (Some(p), _) => assign_word_classes(vocab, Some(&read_text(p)?)).with_context(|| format!("in {}", p.display()))?,
        (None, Some(k)) => frequency_binned(vocab, k),
        (None, None) => assign_word_classes(vocab, None)?,
    })
}

fn as_trees(sentences: &[Vec<String>]) -> Vec<Tree> {
    sentences
        .iter()
        .map(|s| Tree::node("S", s.iter().map(Tree::leaf).collect()))
        .collect()
}

pub fn run(kind: Kind, a: TrainArgs, globals: &Globals) -> Result<()> {
    let config = model_config(kind, &a, globals)?;
    let train = TrainConfig {
        learning_rate: a.lr,
        epochs: a.epochs,
        dropout: config.dropout,
        eval_every: a.eval_every,
        seed: sentence_seed(config.seed, 1),
        patience: a.patience,
        clip: a.clip,
        decay: a.decay,
        checkpoint: Some(a.out.clone()),
    };
    log::info!("model config:\n{config}");
    log::info!("{train:?}, precision {:?}", a.precision);
    let report = match a.precision {
        Prec::F32 => fit::<f32>(kind, &a, config, &train)?,
        Prec::F64 => fit::<f64>(kind, &a, config, &train)?,
    };
    if report.skipped_train + report.skipped_dev > 0 {
        log::warn!(
            "skipped {} training and {} dev trees over the open-nonterminal cap",
            report.skipped_train,
            report.skipped_dev
        );
    }
    log::info!(
        "dev loss per event: {:.6} initially, best {:.6} after {} epochs",
        report.initial_dev,
        report.best_dev,
        report.epochs_run
    );
    if let Some(p) = &a.log {
        write_file(p, report.format_log().as_bytes())?;
    }
    write_file(&a.out, &report.checkpoint)
}

fn fit<T: Real>(kind: Kind, a: &TrainArgs, config: ModelConfig, train: &TrainConfig) -> Result<TrainReport> {
    let policy = a.policy.into();
    Ok(match kind {
        Kind::Generative | Kind::Discriminative => {
            let corpus = read_trees(&a.train)?;
            let dev = read_trees(&a.dev)?;
            if corpus.is_empty() {
                bail!("{} holds no trees", a.train.display());
            }
            let vocab = build_vocab(&corpus, policy)?;
            log::info!(
                "{} terminals ({} UNK types), {} nonterminals",
                vocab.terminals.len(),
                vocab.unk_types(),
                vocab.nonterminals.len()
            );
            if let Kind::Generative = kind {
                let classes = word_classes(&vocab, &config, a.clusters.as_ref())?;
                log::info!("{} word classes", classes.num_classes());
                let mut model = GenerativeModel::<T>::new(config, vocab, classes)?;
                train_generative(&mut model, &corpus, &dev, train)?
            } else {
                let mut model = DiscriminativeModel::<T>::new(config, vocab)?;
                train_discriminative(&mut model, &corpus, &dev, train)?
            }
        }
        Kind::LstmLm => {
            let corpus = read_sentences(&a.train)?;
            let dev = read_sentences(&a.dev)?;
            if corpus.is_empty() {
                bail!("{} holds no sentences", a.train.display());
            }
            let vocab = build_vocab(&as_trees(&corpus), policy)?;
            let classes = word_classes(&vocab, &config, a.clusters.as_ref())?;
            let mut model = LstmLm::<T>::new(config, vocab, classes)?;
            train_lstm_lm(&mut model, &corpus, &dev, train)?
        }
    })
}
