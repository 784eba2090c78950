use crate::treebank::Tree;

use super::{AlgoState, TransitionError};

/// Every tree over `sentence` reachable in parse mode with the given
/// nonterminal inventory and cap, in depth-first action order
/// (REDUCE, SHIFT, then NT in inventory order).
pub fn all_parses<S: AsRef<str>, N: AsRef<str>>(
    sentence: &[S],
    nonterminals: &[N],
    max_open_nts: usize,
) -> Result<Vec<Tree>, TransitionError> {
    let start = AlgoState::parser(sentence, max_open_nts)?;
    let mut out = Vec::new();
    let mut todo = vec![start];
    while let Some(st) = todo.pop() {
        if st.is_terminal() {
            out.push(st.into_tree()?);
            continue;
        }
        let actions = st.valid_actions(nonterminals, &[] as &[&str])?;
        for a in actions.iter().rev() {
            todo.push(st.applied(a)?);
        }
    }
    Ok(out)
}
