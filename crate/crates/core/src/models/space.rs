use crate::neural::{Graph, NodeId, Real};
use crate::transition::{Action, Legal};
use crate::treebank::Vocab;

use super::ModelError;

/// Index of REDUCE in the action inventory.
pub const REDUCE: usize = 0;
/// Index of SHIFT (parser) or GEN (generator).
pub const MOVE: usize = 1;
/// `NT(X)` has index `NT_OFFSET + nonterminal_index(X)`.
pub const NT_OFFSET: usize = 2;

pub fn action_index(action: &Action, vocab: &Vocab) -> Result<usize, ModelError> {
    Ok(match action {
        Action::Reduce => REDUCE,
        Action::Shift | Action::Gen(_) => MOVE,
        Action::Nt(x) => NT_OFFSET + vocab.nonterminal_index(x).ok_or_else(|| ModelError::UnknownLabel(x.clone()))?,
    })
}

/// Validity mask over the inventory `[REDUCE, SHIFT/GEN, NT(0), ...]`.
pub fn legal_mask(legal: Legal, num_nts: usize) -> Vec<bool> {
    let mut m = vec![false; NT_OFFSET + num_nts];
    m[REDUCE] = legal.reduce;
    m[MOVE] = legal.shift || legal.gen;
    for v in &mut m[NT_OFFSET..] {
        *v = legal.nt;
    }
    m
}

/// Scores for the next action: the state embedding `u` and masked
/// log-probabilities over the inventory.
#[derive(Debug, Clone, Copy)]
pub struct StepScores {
    pub u: NodeId,
    pub log_probs: NodeId,
    pub legal: Legal,
}

impl StepScores {
    pub fn log_prob<T: Real>(&self, g: &Graph<'_, T>, index: usize) -> f64 {
        g.value(self.log_probs)[index].as_f64()
    }

    /// Highest-scoring valid index; ties go to the lowest index.
    pub fn argmax<T: Real>(&self, g: &Graph<'_, T>) -> usize {
        let v = g.value(self.log_probs);
        let mut best = 0;
        for i in 1..v.len() {
            if v[i] > v[best] {
                best = i;
            }
        }
        best
    }
}
