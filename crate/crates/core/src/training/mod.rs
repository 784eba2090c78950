//! Per-sentence SGD training with dev-set model selection.

use std::fmt;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::inference::sentence_seed;
use crate::models::{DiscriminativeModel, GenerativeModel, LstmLm, ModelError, Trainable};
use crate::neural::{Dropout, NeuralError, ParamStore, Real};
use crate::transition::TransitionError;
use crate::treebank::Tree;

#[derive(Debug, thiserror::Error)]
pub enum TrainError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error("dev set is empty")]
    EmptyDev,
    #[error("no trainable examples (all {0} exceed the open-nonterminal cap)")]
    NothingToTrain(usize),
    #[error("invalid training config: {0}")]
    Config(String),
    #[error("loss became non-finite at epoch {epoch}, sentence {sentence}")]
    Diverged { epoch: usize, sentence: usize },
    #[error("writing checkpoint {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub dropout: f64,
    /// Evaluate on dev every this many sentences; `None` means once per epoch.
    pub eval_every: Option<usize>,
    pub seed: u64,
    /// Stop after this many evaluations without dev improvement.
    pub patience: Option<usize>,
    /// Global gradient-norm clipping threshold.
    pub clip: Option<f64>,
    /// Learning rate at epoch e is lr / (1 + decay * e).
    pub decay: f64,
    /// Written every time the dev loss improves.
    pub checkpoint: Option<PathBuf>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            epochs: 10,
            dropout: 0.0,
            eval_every: None,
            seed: 1,
            patience: None,
            clip: None,
            decay: 0.0,
            checkpoint: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(TrainError::Config(format!("learning rate {} must be >= 0", self.learning_rate)));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(TrainError::Config(format!("dropout {} must be in [0, 1)", self.dropout)));
        }
        if self.eval_every == Some(0) {
            return Err(TrainError::Config("eval_every must be positive".into()));
        }
        if self.decay < 0.0 {
            return Err(TrainError::Config("decay must be >= 0".into()));
        }
        Ok(())
    }

    fn rate(&self, epoch: usize) -> f64 {
        self.learning_rate / (1.0 + self.decay * epoch as f64)
    }
}

/// One line of the training log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRecord {
    /// 1-based epoch.
    pub epoch: usize,
    /// Sentences processed so far, over all epochs.
    pub sentence: usize,
    /// Mean training loss per sentence since the previous record.
    pub loss: f64,
    /// Dev loss per event (action or word); absent on records without an
    /// evaluation.
    pub dev_loss: Option<f64>,
}

impl fmt::Display for LogRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {:.6}", self.epoch, self.sentence, self.loss)?;
        if let Some(d) = self.dev_loss {
            write!(f, " {d:.6}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub log: Vec<LogRecord>,
    /// Dev loss per event of the retained parameters.
    pub best_dev: f64,
    /// Dev loss per event before any update.
    pub initial_dev: f64,
    /// Serialized best-dev model.
    pub checkpoint: Vec<u8>,
    pub skipped_train: usize,
    pub skipped_dev: usize,
    pub epochs_run: usize,
}

impl TrainReport {
    pub fn format_log(&self) -> String {
        self.log.iter().map(|r| format!("{r}\n")).collect()
    }
}

fn over_cap(e: &ModelError) -> bool {
    matches!(e, ModelError::Transition(TransitionError::CapExceeded { .. }))
}

/// Total dev loss divided by the total event count, with dropout off.
/// Examples are scored in parallel; the sum is taken in input order.
pub fn dev_loss<T: Real, M>(model: &M, dev: &[M::Example]) -> Result<f64, ModelError>
where
    M: Trainable<T> + Sync,
{
    let parts: Vec<Option<(f64, usize)>> = dev
        .par_iter()
        .map(|ex| {
            let mut g = crate::neural::Graph::new(model.store());
            match model.loss(&mut g, ex, &mut Dropout::Off) {
                Ok(l) => Ok(Some((g.scalar(l.node).as_f64(), l.events))),
                Err(e) if over_cap(&e) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_, _>>()?;
    let (mut total, mut events) = (0.0, 0usize);
    for (l, n) in parts.into_iter().flatten() {
        total += l;
        events += n;
    }
    Ok(if events == 0 { f64::NAN } else { total / events as f64 })
}

/// Trains `model` in place and leaves it holding the best-dev parameters.
pub fn train<T: Real, M>(
    model: &mut M,
    train_set: &[M::Example],
    dev: &[M::Example],
    config: &TrainConfig,
) -> Result<TrainReport, TrainError>
where
    M: Trainable<T> + Sync,
{
    config.validate()?;
    if dev.is_empty() {
        return Err(TrainError::EmptyDev);
    }
    let mut usable = Vec::with_capacity(train_set.len());
    {
        let mut g = crate::neural::Graph::new(model.store());
        for (i, ex) in train_set.iter().enumerate() {
            let mark = g.len();
            match model.loss(&mut g, ex, &mut Dropout::Off) {
                Ok(_) => usable.push(i),
                Err(e) if over_cap(&e) => {}
                Err(e) => return Err(e.into()),
            }
            g.truncate(mark);
        }
    }
    let skipped_train = train_set.len() - usable.len();
    if usable.is_empty() {
        return Err(TrainError::NothingToTrain(skipped_train));
    }
    if skipped_train > 0 {
        log::warn!("skipped {skipped_train} training examples over the open-nonterminal cap");
    }
    let skipped_dev = {
        let g = &mut crate::neural::Graph::new(model.store());
        let mut n = 0;
        for ex in dev {
            let mark = g.len();
            if let Err(e) = model.loss(g, ex, &mut Dropout::Off) {
                if over_cap(&e) {
                    n += 1;
                } else {
                    return Err(e.into());
                }
            }
            g.truncate(mark);
        }
        n
    };
    if skipped_dev == dev.len() {
        return Err(TrainError::EmptyDev);
    }

    let initial_dev = dev_loss(model, dev)?;
    let mut best_dev = initial_dev;
    let mut best: ParamStore<T> = model.store().clone();
    let mut checkpoint = model.save();
    write_checkpoint(config, &checkpoint)?;

    let mut order_rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut drop_rng = ChaCha8Rng::seed_from_u64(sentence_seed(config.seed, u64::MAX));
    let mut log = Vec::new();
    let mut seen = 0usize;
    let (mut window_loss, mut window_n) = (0.0, 0usize);
    let mut stale = 0usize;
    let mut epochs_run = 0;

    'epochs: for epoch in 1..=config.epochs {
        epochs_run = epoch;
        let lr = config.rate(epoch - 1);
        let mut order = usable.clone();
        order.shuffle(&mut order_rng);
        for (k, &i) in order.iter().enumerate() {
            let loss = {
                let mut g = crate::neural::Graph::new(model.store());
                let mut drop = if config.dropout > 0.0 {
                    Dropout::On {
                        rate: config.dropout,
                        rng: &mut drop_rng,
                    }
                } else {
                    Dropout::Off
                };
                let l = model.loss(&mut g, &train_set[i], &mut drop)?;
                let value = g.scalar(l.node).as_f64();
                if !value.is_finite() {
                    return Err(TrainError::Diverged { epoch, sentence: seen });
                }
                let grads = g.backward(l.node)?;
                model.store_mut().accumulate(&grads);
                value
            };
            if let Some(c) = config.clip {
                model.store_mut().clip_grads(c);
            }
            model.store_mut().sgd_step(lr);
            seen += 1;
            window_loss += loss;
            window_n += 1;

            let end_of_epoch = k + 1 == order.len();
            let evaluate = match config.eval_every {
                Some(n) => seen.is_multiple_of(n) || end_of_epoch,
                None => end_of_epoch,
            };
            if evaluate {
                let d = dev_loss(model, dev)?;
                let rec = LogRecord {
                    epoch,
                    sentence: seen,
                    loss: window_loss / window_n as f64,
                    dev_loss: Some(d),
                };
                log::info!("{rec}");
                log.push(rec);
                window_loss = 0.0;
                window_n = 0;
                if d < best_dev {
                    best_dev = d;
                    best = model.store().clone();
                    checkpoint = model.save();
                    write_checkpoint(config, &checkpoint)?;
                    stale = 0;
                } else {
                    stale += 1;
                    if config.patience.is_some_and(|p| stale >= p) {
                        log::info!("stopping early after {stale} evaluations without improvement");
                        break 'epochs;
                    }
                }
            }
        }
    }
    model.store_mut().copy_values_from(&best)?;
    Ok(TrainReport {
        log,
        best_dev,
        initial_dev,
        checkpoint,
        skipped_train,
        skipped_dev,
        epochs_run,
    })
}

fn write_checkpoint(config: &TrainConfig, bytes: &[u8]) -> Result<(), TrainError> {
    if let Some(path) = &config.checkpoint {
        std::fs::write(path, bytes).map_err(|source| TrainError::Io {
            path: path.clone(),
            source,
        })?;
    }
    Ok(())
}

/// Maximizes log p(x, y) over a treebank.
pub fn train_generative<T: Real>(
    model: &mut GenerativeModel<T>,
    corpus: &[Tree],
    dev: &[Tree],
    config: &TrainConfig,
) -> Result<TrainReport, TrainError> {
    train(model, corpus, dev, config)
}

/// Maximizes log q(y | x) over a treebank.
pub fn train_discriminative<T: Real>(
    model: &mut DiscriminativeModel<T>,
    corpus: &[Tree],
    dev: &[Tree],
    config: &TrainConfig,
) -> Result<TrainReport, TrainError> {
    train(model, corpus, dev, config)
}

/// Maximizes log p(x) under the sequential baseline.
pub fn train_lstm_lm<T: Real>(
    model: &mut LstmLm<T>,
    sentences: &[Vec<String>],
    dev: &[Vec<String>],
    config: &TrainConfig,
) -> Result<TrainReport, TrainError> {
    train(model, sentences, dev, config)
}
