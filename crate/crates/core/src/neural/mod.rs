//! A small reverse-mode autodiff engine and the recurrent building blocks
//! used by the models: multi-layer LSTMs, stack LSTMs, and the
//! bidirectional composition function.

mod compose;
mod graph;
mod gradcheck;
mod lstm;
mod params;
mod real;
mod stack;

use thiserror::Error;

pub use compose::{composition_sequences, Composer, Composition};
pub use graph::{dropout, Graph, NodeId};
pub use gradcheck::{grad_check, relative_error, REL_ERROR_FLOOR};
pub use lstm::{Dropout, Lstm, LstmState};
pub use params::{glorot_init, Gradients, Init, Param, ParamId, ParamStore};
pub use real::{Precision, Real};
pub use stack::StackRnn;

#[derive(Debug, Error)]
pub enum NeuralError {
    #[error("shape mismatch in {op}: {detail}")]
    Shape { op: &'static str, detail: String },
    #[error("softmax over an empty support (every entry masked)")]
    EmptySupport,
    #[error("dropout rate must be in [0, 1), got {0}")]
    DropoutRate(f64),
    #[error("duplicate parameter name '{0}'")]
    DuplicateParam(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("pop from an empty stack")]
    PopEmpty,
    #[error("composition needs at least one child")]
    NoChildren,
}
