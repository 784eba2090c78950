//! Neural parameterizations of transition sequences: the generative joint
//! model p(x, y), the discriminative parser q(y | x), and a sequential LSTM
//! language model baseline.

mod checkpoint;
mod config;
mod discriminative;
mod generative;
mod lm;
mod shared;
mod softmax;
mod space;

use thiserror::Error;

use crate::neural::{Dropout, Graph, NeuralError, NodeId, ParamStore, Real};
use crate::transition::TransitionError;
use crate::treebank::TreebankError;

pub use checkpoint::{peek_kind, ModelKind};
pub use config::ModelConfig;
pub use discriminative::{DiscState, DiscriminativeModel};
pub use generative::{GenState, GenerativeModel};
pub use lm::LstmLm;
pub use softmax::ClassSoftmax;
pub use space::{action_index, legal_mask, StepScores, MOVE, NT_OFFSET, REDUCE};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error(transparent)]
    Transition(#[from] TransitionError),
    #[error(transparent)]
    Treebank(#[from] TreebankError),
    #[error("word '{0}' is not in the model vocabulary")]
    UnknownWord(String),
    #[error("nonterminal '{0}' is not in the model vocabulary")]
    UnknownLabel(String),
    #[error("tree yield does not match the sentence: {0}")]
    YieldMismatch(String),
    #[error("history covers {history} actions but the state has taken {steps}")]
    History { steps: usize, history: usize },
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

/// A scalar loss node and the number of prediction events it covers
/// (actions for the transition models, words plus stop for the LM).
#[derive(Debug, Clone, Copy)]
pub struct Loss {
    pub node: NodeId,
    pub events: usize,
}

/// What the training loop needs from a model.
pub trait Trainable<T: Real> {
    type Example: Sync;

    fn store(&self) -> &ParamStore<T>;
    fn store_mut(&mut self) -> &mut ParamStore<T>;
    fn config(&self) -> &ModelConfig;
    /// Negative log-likelihood of one example.
    fn loss(&self, g: &mut Graph<'_, T>, example: &Self::Example, drop: &mut Dropout<'_>) -> Result<Loss, ModelError>;
    fn save(&self) -> Vec<u8>;
}
