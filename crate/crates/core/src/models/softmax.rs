use crate::neural::{Graph, Init, NeuralError, NodeId, ParamId, ParamStore, Real};
use crate::treebank::WordClasses;

/// Class-factored softmax: p(w | u) = p(class(w) | u) p(w | class(w), u).
/// Scoring one word touches one row per class plus one row per member of
/// its class.
#[derive(Debug, Clone)]
pub struct ClassSoftmax {
    class_w: ParamId,
    class_b: ParamId,
    word_w: ParamId,
    word_b: ParamId,
    classes: WordClasses,
}

impl ClassSoftmax {
    pub fn new<T: Real>(
        store: &mut ParamStore<T>,
        name: &str,
        input: usize,
        classes: WordClasses,
    ) -> Result<Self, NeuralError> {
        let k = classes.num_classes();
        let v = classes.num_terminals();
        Ok(Self {
            class_w: store.add(&format!("{name}.class_w"), k, input, Init::Glorot)?,
            class_b: store.add(&format!("{name}.class_b"), k, 1, Init::Zeros)?,
            word_w: store.add(&format!("{name}.word_w"), v, input, Init::Glorot)?,
            word_b: store.add(&format!("{name}.word_b"), v, 1, Init::Zeros)?,
            classes,
        })
    }

    pub fn classes(&self) -> &WordClasses {
        &self.classes
    }

    /// Log-probabilities of each class.
    pub fn class_log_probs<T: Real>(&self, g: &mut Graph<'_, T>, u: NodeId) -> Result<NodeId, NeuralError> {
        let s = g.affine(self.class_w, u, Some(self.class_b))?;
        g.log_softmax(s, None)
    }

    /// Log-probabilities of the members of `class`, in member order.
    pub fn member_log_probs<T: Real>(
        &self,
        g: &mut Graph<'_, T>,
        u: NodeId,
        class: usize,
    ) -> Result<NodeId, NeuralError> {
        let s = g.affine_rows(self.word_w, self.classes.members(class), u, Some(self.word_b))?;
        g.log_softmax(s, None)
    }

    /// Scalar node holding log p(word | u).
    pub fn log_prob<T: Real>(&self, g: &mut Graph<'_, T>, u: NodeId, word: usize) -> Result<NodeId, NeuralError> {
        let c = self.classes.class_of(word);
        let cl = self.class_log_probs(g, u)?;
        let ml = self.member_log_probs(g, u, c)?;
        let a = g.pick(cl, c)?;
        let b = g.pick(ml, self.classes.offset_in_class(word))?;
        g.add(a, b)
    }

    /// log p(w | u) for every word, indexed by terminal.
    pub fn all_log_probs<T: Real>(&self, g: &mut Graph<'_, T>, u: NodeId) -> Result<Vec<f64>, NeuralError> {
        let cl = self.class_log_probs(g, u)?;
        let mut out = vec![0.0; self.classes.num_terminals()];
        for c in 0..self.classes.num_classes() {
            let lc = g.value(cl)[c].as_f64();
            let ml = self.member_log_probs(g, u, c)?;
            for (i, &w) in self.classes.members(c).iter().enumerate() {
                out[w] = lc + g.value(ml)[i].as_f64();
            }
        }
        Ok(out)
    }
}
