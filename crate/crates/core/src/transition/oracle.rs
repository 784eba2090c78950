use crate::treebank::Tree;

use super::{Action, AlgoState, Mode, TransitionError, DEFAULT_MAX_OPEN_NTS};

/// The unique transition sequence of `tree`: NT on entering each internal
/// node, SHIFT or GEN per leaf, REDUCE on leaving.
pub fn oracle(tree: &Tree, mode: Mode) -> Result<Vec<Action>, TransitionError> {
    oracle_with_cap(tree, mode, DEFAULT_MAX_OPEN_NTS)
}

pub fn oracle_with_cap(tree: &Tree, mode: Mode, max_open_nts: usize) -> Result<Vec<Action>, TransitionError> {
    if tree.is_leaf() {
        return Err(TransitionError::LeafRoot);
    }
    let depth = tree.open_depth();
    if depth > max_open_nts {
        return Err(TransitionError::CapExceeded {
            depth,
            cap: max_open_nts,
        });
    }
    let mut out = Vec::with_capacity(2 * tree.internal_count() + tree.leaf_count());
    emit(tree, mode, &mut out);
    Ok(out)
}

fn emit(tree: &Tree, mode: Mode, out: &mut Vec<Action>) {
    match tree {
        Tree::Leaf(w) => out.push(match mode {
            Mode::Parse => Action::Shift,
            Mode::Generate => Action::Gen(w.clone()),
        }),
        Tree::Internal { label, children } => {
            out.push(Action::Nt(label.clone()));
            for c in children {
                emit(c, mode, out);
            }
            out.push(Action::Reduce);
        }
    }
}

/// Replays `actions` from the initial state and returns the completed tree.
/// Parse mode needs the input `sentence`.
pub fn execute<S: AsRef<str>>(
    actions: &[Action],
    mode: Mode,
    sentence: Option<&[S]>,
) -> Result<Tree, TransitionError> {
    execute_with_cap(actions, mode, sentence, DEFAULT_MAX_OPEN_NTS)
}

pub fn execute_with_cap<S: AsRef<str>>(
    actions: &[Action],
    mode: Mode,
    sentence: Option<&[S]>,
    max_open_nts: usize,
) -> Result<Tree, TransitionError> {
    let mut state = match mode {
        Mode::Parse => {
            let s = sentence.ok_or(TransitionError::MissingSentence)?;
            AlgoState::parser(s, max_open_nts)?
        }
        Mode::Generate => AlgoState::generator(max_open_nts),
    };
    for (index, a) in actions.iter().enumerate() {
        state.apply(a).map_err(|e| TransitionError::Replay {
            index,
            source: Box::new(e),
        })?;
    }
    state.into_tree()
}
