//! Inference: ancestral and flattened sampling, importance-sampled
//! marginal likelihood, sample-and-rerank parsing, greedy parsing,
//! perplexity, and exact enumeration for toy-scale checks.

pub mod exact;
mod marginal;
mod sample;

use thiserror::Error;

use crate::models::ModelError;
use crate::transition::Action;
use crate::treebank::Tree;

pub use marginal::{estimate_marginal, jackknife, log_sum_exp, map_parse, Estimate};
pub use sample::{generate, greedy_parse, sample_index, sample_parse};

#[derive(Debug, Error)]
pub enum InferenceError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("alpha must be in (0, 1], got {0}")]
    Alpha(f64),
    #[error("at least one sample is required")]
    NoSamples,
    #[error("perplexity of zero words")]
    NoWords,
    #[error("generation did not finish within {max_steps} steps")]
    StepBudget { max_steps: usize, partial: Vec<Action> },
    #[error("step budget must be at least 3, got {0}")]
    TinyBudget(usize),
}

impl From<crate::transition::TransitionError> for InferenceError {
    fn from(e: crate::transition::TransitionError) -> Self {
        InferenceError::Model(e.into())
    }
}

impl From<crate::neural::NeuralError> for InferenceError {
    fn from(e: crate::neural::NeuralError) -> Self {
        InferenceError::Model(e.into())
    }
}

/// A proposal sample with its importance weight components.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSample {
    pub tree: Tree,
    /// log q of the sample under the (possibly flattened) proposal.
    pub log_q: f64,
    /// log p(x, y) under the generative model, once scored.
    pub log_p: Option<f64>,
}

impl WeightedSample {
    pub fn log_w(&self) -> Option<f64> {
        self.log_p.map(|p| p - self.log_q)
    }
}

/// exp(-(sum of log p) / (number of words)).
pub fn perplexity(log_probs: &[f64], word_counts: &[usize]) -> Result<f64, InferenceError> {
    let words: usize = word_counts.iter().sum();
    if words == 0 {
        return Err(InferenceError::NoWords);
    }
    Ok((-log_probs.iter().sum::<f64>() / words as f64).exp())
}

/// Seed for sentence `index` of a run with seed `root` (splitmix64), so
/// results do not depend on scheduling.
pub fn sentence_seed(root: u64, index: u64) -> u64 {
    let mut z = root ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
