//! Top-down transition system for parsing (NT, SHIFT, REDUCE) and
//! generation (NT, GEN, REDUCE), the tree-to-derivation oracle and replay.

mod action;
mod enumerate;
mod format;
mod oracle;
mod state;

pub use action::{Action, Mode};
pub use enumerate::all_parses;
pub use format::{read_oracle, write_oracle, OracleEntry};
pub use oracle::{execute, execute_with_cap, oracle, oracle_with_cap};
pub use state::{AlgoState, Legal, StackItem, WorkCounter, DEFAULT_MAX_OPEN_NTS};

#[derive(Debug, thiserror::Error)]
pub enum TransitionError {
    #[error("no actions are available in a terminal state")]
    TerminalState,
    #[error("illegal action {action}: {reason}")]
    Illegal { action: String, reason: &'static str },
    #[error("empty sentence: no derivation exists")]
    EmptySentence,
    #[error("parse-mode replay needs the input sentence")]
    MissingSentence,
    #[error("tree root must be a nonterminal")]
    LeafRoot,
    #[error("tree needs {depth} open nonterminals but the cap is {cap}")]
    CapExceeded { depth: usize, cap: usize },
    #[error("replay failed at step {index}: {source}")]
    Replay {
        index: usize,
        #[source]
        source: Box<TransitionError>,
    },
    #[error("derivation ended before reaching a terminal state")]
    NotTerminal,
    #[error("malformed action '{0}'")]
    BadAction(String),
    #[error("oracle file line {line}: {message}")]
    Format { line: usize, message: String },
}
