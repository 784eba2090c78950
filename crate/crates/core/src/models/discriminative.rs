use std::rc::Rc;

use crate::neural::{Dropout, Graph, Lstm, NodeId, ParamStore, Real};
use crate::transition::{oracle_with_cap, Action, AlgoState, Mode, TransitionError};
use crate::treebank::{Tree, Vocab, WordClasses};

use super::checkpoint::{self, ModelKind};
use super::shared::{Core, Shared};
use super::space::StepScores;
use super::{action_index, Loss, ModelConfig, ModelError, Trainable};

/// The discriminative parser q(y | x). The terminal history of the
/// generator is replaced by an encoding of the remaining input buffer.
#[derive(Debug, Clone)]
pub struct DiscriminativeModel<T: Real> {
    config: ModelConfig,
    vocab: Vocab,
    store: ParamStore<T>,
    core: Core,
    buffer_lstm: Lstm,
}

/// A partial parse with its neural encodings. `buffer[i]` encodes the
/// buffer starting at word `i` (so `buffer[n]` is the empty buffer).
#[derive(Debug, Clone)]
pub struct DiscState {
    shared: Shared,
    ids: Rc<Vec<usize>>,
    buffer: Rc<Vec<NodeId>>,
}

impl DiscState {
    pub fn algo(&self) -> &AlgoState {
        &self.shared.algo
    }

    pub fn is_terminal(&self) -> bool {
        self.shared.algo.is_terminal()
    }
}

impl<T: Real> DiscriminativeModel<T> {
    pub fn new(config: ModelConfig, vocab: Vocab) -> Result<Self, ModelError> {
        config.validate()?;
        let mut store = ParamStore::new(config.seed);
        let core = Core::new(&mut store, &config, &vocab)?;
        let buffer_lstm = Lstm::new(&mut store, "buffer", config.embed_dim, config.hidden_dim, config.layers)?;
        Ok(Self {
            config,
            vocab,
            store,
            core,
            buffer_lstm,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn store(&self) -> &ParamStore<T> {
        &self.store
    }

    pub fn store_mut(&mut self) -> &mut ParamStore<T> {
        &mut self.store
    }

    pub fn graph(&self) -> Graph<'_, T> {
        Graph::new(&self.store)
    }

    /// Initial parser state for a raw sentence. The buffer is encoded once,
    /// right to left.
    pub fn start<S: AsRef<str>>(
        &self,
        g: &mut Graph<'_, T>,
        sentence: &[S],
        drop: &mut Dropout<'_>,
    ) -> Result<DiscState, ModelError> {
        let algo = AlgoState::parser(sentence, self.config.max_open_nts)?;
        let ids = self
            .vocab
            .unkify_sentence(sentence)
            .into_iter()
            .map(|w| self.vocab.terminal_index(&w).ok_or(ModelError::UnknownWord(w)))
            .collect::<Result<Vec<_>, _>>()?;
        let mut buffer = vec![NodeId::default(); ids.len() + 1];
        let mut s = self.buffer_lstm.initial_state(g);
        buffer[ids.len()] = s.output();
        for i in (0..ids.len()).rev() {
            let x = g.lookup(self.core.term_emb, ids[i])?;
            s = self.buffer_lstm.step(g, &s, x, drop)?;
            buffer[i] = s.output();
        }
        Ok(DiscState {
            shared: self.core.start(g, algo),
            ids: Rc::new(ids),
            buffer: Rc::new(buffer),
        })
    }

    pub fn scores(&self, g: &mut Graph<'_, T>, st: &DiscState, drop: &mut Dropout<'_>) -> Result<StepScores, ModelError> {
        let o = st.buffer[st.shared.algo.position()];
        self.core.scores(g, o, &st.shared, drop)
    }

    pub fn advance(
        &self,
        g: &mut Graph<'_, T>,
        st: &DiscState,
        action: &Action,
        drop: &mut Dropout<'_>,
    ) -> Result<DiscState, ModelError> {
        let term = match action {
            Action::Shift => st.ids.get(st.shared.algo.position()).copied(),
            _ => None,
        };
        let shared = self.core.advance(g, &st.shared, action, &self.vocab, term, drop)?;
        Ok(DiscState {
            shared,
            ids: st.ids.clone(),
            buffer: st.buffer.clone(),
        })
    }

    /// Node holding log q(y | x) for a raw tree and its action count.
    pub fn log_prob_node(
        &self,
        g: &mut Graph<'_, T>,
        tree: &Tree,
        drop: &mut Dropout<'_>,
    ) -> Result<(NodeId, usize), ModelError> {
        let actions = oracle_with_cap(tree, Mode::Parse, self.config.max_open_nts)?;
        let mut st = self.start(g, &tree.leaves(), drop)?;
        let mut lps = Vec::with_capacity(actions.len());
        for a in &actions {
            let sc = self.scores(g, &st, drop)?;
            lps.push(g.pick(sc.log_probs, action_index(a, &self.vocab)?)?);
            st = self.advance(g, &st, a, drop)?;
        }
        if !st.is_terminal() {
            return Err(TransitionError::NotTerminal.into());
        }
        Ok((g.sum(&lps)?, actions.len()))
    }

    /// log q(y | x); `x` must be the yield of `y`.
    pub fn sequence_log_prob<S: AsRef<str>>(&self, x: &[S], y: &Tree) -> Result<f64, ModelError> {
        let leaves = y.leaves();
        if leaves.len() != x.len() || leaves.iter().zip(x).any(|(a, b)| *a != b.as_ref()) {
            return Err(ModelError::YieldMismatch(format!(
                "tree yields '{}', sentence is '{}'",
                leaves.join(" "),
                x.iter().map(|s| s.as_ref()).collect::<Vec<_>>().join(" ")
            )));
        }
        let mut g = self.graph();
        let (n, _) = self.log_prob_node(&mut g, y, &mut Dropout::Off)?;
        Ok(g.scalar(n).as_f64())
    }

    pub fn save(&self) -> Vec<u8> {
        let classes = WordClasses::single(self.vocab.terminals.len());
        checkpoint::save(&self.store, ModelKind::Discriminative, &self.config, &self.vocab, &classes)
    }

    pub fn load(bytes: &[u8]) -> Result<Self, ModelError> {
        let (store, meta) = checkpoint::load::<T>(bytes, ModelKind::Discriminative)?;
        let mut m = Self::new(meta.config, meta.vocab)?;
        m.store.copy_values_from(&store)?;
        Ok(m)
    }
}

impl<T: Real> Trainable<T> for DiscriminativeModel<T> {
    type Example = Tree;

    fn store(&self) -> &ParamStore<T> {
        &self.store
    }

    fn store_mut(&mut self) -> &mut ParamStore<T> {
        &mut self.store
    }

    fn config(&self) -> &ModelConfig {
        &self.config
    }

    fn loss(&self, g: &mut Graph<'_, T>, tree: &Tree, drop: &mut Dropout<'_>) -> Result<Loss, ModelError> {
        let (lp, events) = self.log_prob_node(g, tree, drop)?;
        Ok(Loss { node: g.neg(lp), events })
    }

    fn save(&self) -> Vec<u8> {
        DiscriminativeModel::save(self)
    }
}
