use crate::neural::{Dropout, Graph, Lstm, LstmState, NodeId, ParamStore, Real};
use crate::transition::{oracle_with_cap, Action, AlgoState, Mode};
use crate::treebank::{Tree, Vocab, WordClasses};

use super::checkpoint::{self, ModelKind};
use super::shared::{Core, Shared};
use super::space::StepScores;
use super::{ClassSoftmax, Loss, ModelConfig, ModelError, Trainable};

/// The generative model of sentences and trees, p(x, y).
#[derive(Debug, Clone)]
pub struct GenerativeModel<T: Real> {
    config: ModelConfig,
    vocab: Vocab,
    store: ParamStore<T>,
    core: Core,
    term_lstm: Lstm,
    words: ClassSoftmax,
}

/// A partial generator derivation together with its neural encodings.
#[derive(Debug, Clone)]
pub struct GenState {
    shared: Shared,
    terms: LstmState,
}

impl GenState {
    pub fn algo(&self) -> &AlgoState {
        &self.shared.algo
    }

    pub fn is_terminal(&self) -> bool {
        self.shared.algo.is_terminal()
    }

    /// Embedding of the stack (s_t).
    pub fn stack_embedding(&self) -> NodeId {
        self.shared.stack.embedding()
    }

    /// Embeddings of the algorithm stack entries, bottom first.
    pub fn item_embeddings(&self) -> &[NodeId] {
        &self.shared.items
    }
}

impl<T: Real> GenerativeModel<T> {
    pub fn new(config: ModelConfig, vocab: Vocab, classes: WordClasses) -> Result<Self, ModelError> {
        config.validate()?;
        if classes.num_terminals() != vocab.terminals.len() {
            return Err(ModelError::Checkpoint(format!(
                "{} word classes entries for {} terminals",
                classes.num_terminals(),
                vocab.terminals.len()
            )));
        }
        let mut store = ParamStore::new(config.seed);
        let core = Core::new(&mut store, &config, &vocab)?;
        let term_lstm = Lstm::new(&mut store, "terminals", config.embed_dim, config.hidden_dim, config.layers)?;
        let words = ClassSoftmax::new(&mut store, "words", config.hidden_dim, classes)?;
        Ok(Self {
            config,
            vocab,
            store,
            core,
            term_lstm,
            words,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn classes(&self) -> &WordClasses {
        self.words.classes()
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

    pub fn word_softmax(&self) -> &ClassSoftmax {
        &self.words
    }

    pub fn start(&self, g: &mut Graph<'_, T>) -> GenState {
        GenState {
            shared: self.core.start(g, AlgoState::generator(self.config.max_open_nts)),
            terms: self.term_lstm.initial_state(g),
        }
    }

    /// Action distribution at `st` (GEN is one entry; see
    /// [`GenerativeModel::word_log_prob`] for the word).
    pub fn scores(&self, g: &mut Graph<'_, T>, st: &GenState, drop: &mut Dropout<'_>) -> Result<StepScores, ModelError> {
        self.core.scores(g, st.terms.output(), &st.shared, drop)
    }

    /// log p(word | u) for a vocabulary token.
    pub fn word_log_prob(&self, g: &mut Graph<'_, T>, u: NodeId, word: &str) -> Result<NodeId, ModelError> {
        let w = self.terminal(word)?;
        Ok(self.words.log_prob(g, u, w)?)
    }

    fn terminal(&self, word: &str) -> Result<usize, ModelError> {
        self.vocab
            .terminal_index(word)
            .ok_or_else(|| ModelError::UnknownWord(word.to_string()))
    }

    pub fn advance(
        &self,
        g: &mut Graph<'_, T>,
        st: &GenState,
        action: &Action,
        drop: &mut Dropout<'_>,
    ) -> Result<GenState, ModelError> {
        let (term, terms) = match action {
            Action::Gen(w) => {
                let t = self.terminal(w)?;
                let x = g.lookup(self.core.term_emb, t)?;
                (Some(t), self.term_lstm.step(g, &st.terms, x, drop)?)
            }
            _ => (None, st.terms.clone()),
        };
        let shared = self.core.advance(g, &st.shared, action, &self.vocab, term, drop)?;
        Ok(GenState { shared, terms })
    }

    /// Per-action log-probabilities of a vocabulary-level action sequence.
    /// GEN entries include the word probability.
    pub fn action_log_probs(
        &self,
        g: &mut Graph<'_, T>,
        actions: &[Action],
        drop: &mut Dropout<'_>,
    ) -> Result<Vec<NodeId>, ModelError> {
        let mut st = self.start(g);
        let mut out = Vec::with_capacity(actions.len());
        for a in actions {
            let sc = self.scores(g, &st, drop)?;
            let idx = super::action_index(a, &self.vocab)?;
            let mut lp = g.pick(sc.log_probs, idx)?;
            if let Action::Gen(w) = a {
                let lw = self.word_log_prob(g, sc.u, w)?;
                lp = g.add(lp, lw)?;
            }
            out.push(lp);
            st = self.advance(g, &st, a, drop)?;
        }
        if !st.is_terminal() {
            return Err(crate::transition::TransitionError::NotTerminal.into());
        }
        Ok(out)
    }

    /// Generator actions for a raw tree, with leaves mapped into the
    /// vocabulary.
    pub fn oracle(&self, tree: &Tree) -> Result<Vec<Action>, ModelError> {
        Ok(oracle_with_cap(&self.vocab.unkify_tree(tree), Mode::Generate, self.config.max_open_nts)?)
    }

    /// Node holding log p(x, y) for a raw tree.
    pub fn log_prob_node(
        &self,
        g: &mut Graph<'_, T>,
        tree: &Tree,
        drop: &mut Dropout<'_>,
    ) -> Result<(NodeId, usize), ModelError> {
        let actions = self.oracle(tree)?;
        let lps = self.action_log_probs(g, &actions, drop)?;
        Ok((g.sum(&lps)?, actions.len()))
    }

    /// log p(x, y); `x` must be the yield of `y`.
    pub fn sequence_log_prob<S: AsRef<str>>(&self, x: &[S], y: &Tree) -> Result<f64, ModelError> {
        let leaves = y.leaves();
        if leaves.len() != x.len() || leaves.iter().zip(x).any(|(a, b)| *a != b.as_ref()) {
            return Err(ModelError::YieldMismatch(format!(
                "tree yields '{}', sentence is '{}'",
                leaves.join(" "),
                x.iter().map(|s| s.as_ref()).collect::<Vec<_>>().join(" ")
            )));
        }
        self.tree_log_prob(y)
    }

    /// log p(yield(y), y).
    pub fn tree_log_prob(&self, y: &Tree) -> Result<f64, ModelError> {
        let mut g = self.graph();
        let (n, _) = self.log_prob_node(&mut g, y, &mut Dropout::Off)?;
        Ok(g.scalar(n).as_f64())
    }

    pub fn save(&self) -> Vec<u8> {
        checkpoint::save(
            &self.store,
            ModelKind::Generative,
            &self.config,
            &self.vocab,
            self.words.classes(),
        )
    }

    pub fn load(bytes: &[u8]) -> Result<Self, ModelError> {
        let (store, meta) = checkpoint::load::<T>(bytes, ModelKind::Generative)?;
        let mut m = Self::new(meta.config, meta.vocab, meta.classes)?;
        m.store.copy_values_from(&store)?;
        Ok(m)
    }
}

impl<T: Real> Trainable<T> for GenerativeModel<T> {
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
        GenerativeModel::save(self)
    }
}
