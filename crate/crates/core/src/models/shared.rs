use crate::neural::{Composer, Dropout, Graph, Init, Lstm, LstmState, NeuralError, NodeId, ParamId, ParamStore, Real, StackRnn};
use crate::transition::{Action, AlgoState};
use crate::treebank::Vocab;

use super::space::{action_index, legal_mask, StepScores, NT_OFFSET};
use super::{ModelConfig, ModelError};

/// Parameters common to both RNNG variants: embeddings, the stack LSTM,
/// the action-history LSTM, composition, the state combiner and the
/// action scores.
#[derive(Debug, Clone)]
pub(crate) struct Core {
    pub term_emb: ParamId,
    pub nt_emb: ParamId,
    pub act_emb: ParamId,
    pub stack_lstm: Lstm,
    pub action_lstm: Lstm,
    pub composer: Composer,
    pub w: ParamId,
    pub c: ParamId,
    pub r: ParamId,
    pub rb: ParamId,
    pub num_nts: usize,
}

/// The parts of a derivation state shared by both variants. `items` holds
/// the embedding of every algorithm stack entry.
#[derive(Debug, Clone)]
pub(crate) struct Shared {
    pub algo: AlgoState,
    pub stack: StackRnn,
    pub items: Vec<NodeId>,
    pub history: LstmState,
    pub history_len: usize,
}

impl Core {
    pub fn new<T: Real>(store: &mut ParamStore<T>, cfg: &ModelConfig, vocab: &Vocab) -> Result<Self, NeuralError> {
        let (e, h, l) = (cfg.embed_dim, cfg.hidden_dim, cfg.layers);
        let num_nts = vocab.nonterminals.len();
        let actions = NT_OFFSET + num_nts;
        Ok(Self {
            term_emb: store.add("emb.terminal", vocab.terminals.len(), e, Init::Glorot)?,
            nt_emb: store.add("emb.nonterminal", num_nts, e, Init::Glorot)?,
            act_emb: store.add("emb.action", actions, e, Init::Glorot)?,
            stack_lstm: Lstm::new(store, "stack", e, h, l)?,
            action_lstm: Lstm::new(store, "history", e, h, l)?,
            composer: Composer::new(store, "compose", e, h, l, cfg.composition)?,
            w: store.add("state.w", h, 3 * h, Init::Glorot)?,
            c: store.add("state.c", h, 1, Init::Zeros)?,
            r: store.add("action.r", actions, h, Init::Glorot)?,
            rb: store.add("action.b", actions, 1, Init::Zeros)?,
            num_nts,
        })
    }

    pub fn start<T: Real>(&self, g: &mut Graph<'_, T>, algo: AlgoState) -> Shared {
        Shared {
            algo,
            stack: StackRnn::new(g, &self.stack_lstm),
            items: Vec::new(),
            history: self.action_lstm.initial_state(g),
            history_len: 0,
        }
    }

    /// u = tanh(W [o; s; h] + c), followed by dropout, and the masked action
    /// distribution.
    pub fn scores<T: Real>(
        &self,
        g: &mut Graph<'_, T>,
        o: NodeId,
        st: &Shared,
        drop: &mut Dropout<'_>,
    ) -> Result<StepScores, ModelError> {
        if st.history_len != st.algo.steps() {
            return Err(ModelError::History {
                steps: st.algo.steps(),
                history: st.history_len,
            });
        }
        let legal = st.algo.legal()?;
        let x = g.concat(&[o, st.stack.embedding(), st.history.output()]);
        let a = g.affine(self.w, x, Some(self.c))?;
        let u = g.tanh(a);
        let u = drop.apply(g, u)?;
        let s = g.affine(self.r, u, Some(self.rb))?;
        let log_probs = g.log_softmax(s, Some(&legal_mask(legal, self.num_nts)))?;
        Ok(StepScores { u, log_probs, legal })
    }

    /// Applies `action`, pushing `terminal` (an embedding row of the
    /// terminal table) for SHIFT/GEN.
    pub fn advance<T: Real>(
        &self,
        g: &mut Graph<'_, T>,
        st: &Shared,
        action: &Action,
        vocab: &Vocab,
        terminal: Option<usize>,
        drop: &mut Dropout<'_>,
    ) -> Result<Shared, ModelError> {
        let mut algo = st.algo.clone();
        let width = algo.reduce_width();
        algo.apply(action)?;
        let idx = action_index(action, vocab)?;
        let a = g.lookup(self.act_emb, idx)?;
        let history = self.action_lstm.step(g, &st.history, a, drop)?;
        let mut items = st.items.clone();
        let stack = match action {
            Action::Nt(_) => {
                let x = g.lookup(self.nt_emb, idx - NT_OFFSET)?;
                items.push(x);
                st.stack.push(g, &self.stack_lstm, x, drop)?
            }
            Action::Shift | Action::Gen(_) => {
                let t = terminal.expect("terminal index for SHIFT/GEN");
                let x = g.lookup(self.term_emb, t)?;
                items.push(x);
                st.stack.push(g, &self.stack_lstm, x, drop)?
            }
            Action::Reduce => {
                let width = width.expect("legal REDUCE has an open NT");
                let base = items.len() - width;
                let mut stack = st.stack.clone();
                for _ in 0..width {
                    stack = stack.pop()?;
                }
                let composed = self.composer.compose(g, items[base], &items[base + 1..])?;
                items.truncate(base);
                items.push(composed);
                stack.push(g, &self.stack_lstm, composed, drop)?
            }
        };
        debug_assert_eq!(items.len(), algo.stack().len());
        Ok(Shared {
            algo,
            stack,
            items,
            history,
            history_len: st.history_len + 1,
        })
    }
}
