use crate::neural::{Dropout, Graph, Init, Lstm, LstmState, NodeId, ParamId, ParamStore, Real};
use crate::treebank::{Vocab, WordClasses};

use super::checkpoint::{self, ModelKind};
use super::{ClassSoftmax, Loss, ModelConfig, ModelError, Trainable};

/// Sequential LSTM language model over terminals plus a stop symbol. The
/// stop symbol gets its own singleton class in the output softmax.
#[derive(Debug, Clone)]
pub struct LstmLm<T: Real> {
    config: ModelConfig,
    vocab: Vocab,
    store: ParamStore<T>,
    emb: ParamId,
    lstm: Lstm,
    out: ClassSoftmax,
}

impl<T: Real> LstmLm<T> {
    /// `classes` partitions the terminals; the stop symbol is added here.
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
        let emb = store.add("emb.terminal", vocab.terminals.len(), config.embed_dim, Init::Glorot)?;
        let lstm = Lstm::new(&mut store, "lm", config.embed_dim, config.hidden_dim, config.layers)?;
        let out = ClassSoftmax::new(&mut store, "words", config.hidden_dim, classes.with_extra_singleton())?;
        Ok(Self {
            config,
            vocab,
            store,
            emb,
            lstm,
            out,
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

    /// Output index of the stop symbol.
    pub fn stop(&self) -> usize {
        self.vocab.terminals.len()
    }

    pub fn start(&self, g: &mut Graph<'_, T>) -> LstmState {
        self.lstm.initial_state(g)
    }

    /// log p(next = `index` | state); `index` may be [`LstmLm::stop`].
    pub fn next_log_prob(
        &self,
        g: &mut Graph<'_, T>,
        st: &LstmState,
        index: usize,
        drop: &mut Dropout<'_>,
    ) -> Result<NodeId, ModelError> {
        let h = drop.apply(g, st.output())?;
        Ok(self.out.log_prob(g, h, index)?)
    }

    /// log p over every terminal and then the stop symbol.
    pub fn next_distribution(&self, g: &mut Graph<'_, T>, st: &LstmState) -> Result<Vec<f64>, ModelError> {
        Ok(self.out.all_log_probs(g, st.output())?)
    }

    pub fn advance(
        &self,
        g: &mut Graph<'_, T>,
        st: &LstmState,
        index: usize,
        drop: &mut Dropout<'_>,
    ) -> Result<LstmState, ModelError> {
        let x = g.lookup(self.emb, index)?;
        Ok(self.lstm.step(g, st, x, drop)?)
    }

    fn indices<S: AsRef<str>>(&self, sentence: &[S]) -> Result<Vec<usize>, ModelError> {
        self.vocab
            .unkify_sentence(sentence)
            .into_iter()
            .map(|w| self.vocab.terminal_index(&w).ok_or(ModelError::UnknownWord(w)))
            .collect()
    }

    /// Per-event log-probabilities: one per word, then the stop symbol.
    pub fn event_log_probs<S: AsRef<str>>(
        &self,
        g: &mut Graph<'_, T>,
        sentence: &[S],
        drop: &mut Dropout<'_>,
    ) -> Result<Vec<NodeId>, ModelError> {
        let ids = self.indices(sentence)?;
        let mut st = self.start(g);
        let mut out = Vec::with_capacity(ids.len() + 1);
        for &w in &ids {
            out.push(self.next_log_prob(g, &st, w, drop)?);
            st = self.advance(g, &st, w, drop)?;
        }
        out.push(self.next_log_prob(g, &st, self.stop(), drop)?);
        Ok(out)
    }

    /// log p(x STOP) for a raw sentence.
    pub fn log_prob<S: AsRef<str>>(&self, sentence: &[S]) -> Result<f64, ModelError> {
        let mut g = self.graph();
        let lps = self.event_log_probs(&mut g, sentence, &mut Dropout::Off)?;
        Ok(lps.iter().map(|&n| g.scalar(n).as_f64()).sum())
    }

    pub fn save(&self) -> Vec<u8> {
        let classes = WordClasses::from_assignment(
            (0..self.vocab.terminals.len())
                .map(|w| self.out.classes().class_of(w))
                .collect(),
        );
        checkpoint::save(&self.store, ModelKind::LstmLm, &self.config, &self.vocab, &classes)
    }

    pub fn load(bytes: &[u8]) -> Result<Self, ModelError> {
        let (store, meta) = checkpoint::load::<T>(bytes, ModelKind::LstmLm)?;
        let mut m = Self::new(meta.config, meta.vocab, meta.classes)?;
        m.store.copy_values_from(&store)?;
        Ok(m)
    }
}

impl<T: Real> Trainable<T> for LstmLm<T> {
    type Example = Vec<String>;

    fn store(&self) -> &ParamStore<T> {
        &self.store
    }

    fn store_mut(&mut self) -> &mut ParamStore<T> {
        &mut self.store
    }

    fn config(&self) -> &ModelConfig {
        &self.config
    }

    fn loss(&self, g: &mut Graph<'_, T>, sentence: &Vec<String>, drop: &mut Dropout<'_>) -> Result<Loss, ModelError> {
        let lps = self.event_log_probs(g, sentence, drop)?;
        let total = g.sum(&lps)?;
        Ok(Loss {
            node: g.neg(total),
            events: lps.len(),
        })
    }

    fn save(&self) -> Vec<u8> {
        LstmLm::save(self)
    }
}
