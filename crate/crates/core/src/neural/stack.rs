use std::rc::Rc;

use super::{Dropout, Graph, Lstm, LstmState, NeuralError, NodeId, Real};

#[derive(Debug)]
struct Cell {
    state: LstmState,
    below: Option<Rc<Cell>>,
}

/// A stack LSTM: a persistent linked list of LSTM states. Pushing runs one
/// LSTM step from the top state; popping just drops the top cell, so older
/// versions stay valid and cost nothing to restore.
#[derive(Debug, Clone)]
pub struct StackRnn {
    top: Rc<Cell>,
    depth: usize,
}

impl StackRnn {
    /// The empty stack, whose embedding is the LSTM's learned initial state.
    pub fn new<T: Real>(g: &mut Graph<'_, T>, lstm: &Lstm) -> Self {
        Self {
            top: Rc::new(Cell {
                state: lstm.initial_state(g),
                below: None,
            }),
            depth: 0,
        }
    }

    pub fn push<T: Real>(
        &self,
        g: &mut Graph<'_, T>,
        lstm: &Lstm,
        x: NodeId,
        drop: &mut Dropout<'_>,
    ) -> Result<Self, NeuralError> {
        let state = lstm.step(g, &self.top.state, x, drop)?;
        Ok(Self {
            top: Rc::new(Cell {
                state,
                below: Some(self.top.clone()),
            }),
            depth: self.depth + 1,
        })
    }

    pub fn pop(&self) -> Result<Self, NeuralError> {
        let below = self.top.below.clone().ok_or(NeuralError::PopEmpty)?;
        Ok(Self {
            top: below,
            depth: self.depth - 1,
        })
    }

    pub fn embedding(&self) -> NodeId {
        self.top.state.output()
    }

    pub fn state(&self) -> &LstmState {
        &self.top.state
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn is_empty(&self) -> bool {
        self.depth == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::ParamStore;
    use proptest::prelude::*;

    fn setup() -> (ParamStore<f64>, Lstm) {
        let mut s = ParamStore::new(11);
        let lstm = Lstm::new(&mut s, "stack", 2, 3, 2).unwrap();
        for id in s.ids().collect::<Vec<_>>() {
            // nonzero initial vectors so the empty embedding is distinctive
            let p = s.param_mut(id);
            if p.name.ends_with("h0") {
                p.data.iter_mut().enumerate().for_each(|(i, v)| *v = 0.1 * (i as f64 + 1.0));
            }
        }
        (s, lstm)
    }

    #[test]
    fn empty_embedding_is_learned_initial_vector() {
        let (s, lstm) = setup();
        let mut g = Graph::new(&s);
        let st = StackRnn::new(&mut g, &lstm);
        let h0 = lstm.layer_params(1).2;
        assert_eq!(g.value(st.embedding()), &s.param(h0).data[..]);
        assert!(st.is_empty());
    }

    #[test]
    fn pop_empty_is_error() {
        let (s, lstm) = setup();
        let mut g = Graph::new(&s);
        let st = StackRnn::new(&mut g, &lstm);
        assert!(matches!(st.pop(), Err(NeuralError::PopEmpty)));
    }

    #[test]
    fn persistence_law() {
        let (s, lstm) = setup();
        let mut g = Graph::new(&s);
        let st = StackRnn::new(&mut g, &lstm);
        let x = g.input(vec![0.4, -0.9]);
        let a = st.push(&mut g, &lstm, x, &mut Dropout::Off).unwrap();
        let b = a.pop().unwrap().push(&mut g, &lstm, x, &mut Dropout::Off).unwrap();
        assert_eq!(g.value(a.embedding()), g.value(b.embedding()));
        assert_eq!(g.value(a.pop().unwrap().embedding()), g.value(st.embedding()));
    }

    #[test]
    fn pop_discards_intermediate_push() {
        let (s, lstm) = setup();
        let mut g = Graph::new(&s);
        let xa = g.input(vec![1.0, 0.0]);
        let xb = g.input(vec![0.0, 1.0]);
        let xc = g.input(vec![-0.5, 0.5]);
        let e = StackRnn::new(&mut g, &lstm);
        let d = &mut Dropout::Off;
        let one = e
            .push(&mut g, &lstm, xa, d)
            .unwrap()
            .push(&mut g, &lstm, xb, d)
            .unwrap()
            .pop()
            .unwrap()
            .push(&mut g, &lstm, xc, d)
            .unwrap();
        let two = e.push(&mut g, &lstm, xa, d).unwrap().push(&mut g, &lstm, xc, d).unwrap();
        assert_eq!(g.value(one.embedding()), g.value(two.embedding()));
    }

    proptest! {
        #[test]
        fn interleaved_ops_match_recomputation(ops in proptest::collection::vec((any::<bool>(), 0usize..4), 1..30)) {
            let (s, lstm) = setup();
            let mut g = Graph::new(&s);
            let inputs: Vec<NodeId> = (0..4).map(|i| g.input(vec![i as f64 * 0.3 - 0.5, 0.2 * i as f64])).collect();
            let mut st = StackRnn::new(&mut g, &lstm);
            let mut alive: Vec<usize> = Vec::new();
            for (push, which) in ops {
                if push || alive.is_empty() {
                    st = st.push(&mut g, &lstm, inputs[which], &mut Dropout::Off).unwrap();
                    alive.push(which);
                } else {
                    st = st.pop().unwrap();
                    alive.pop();
                }
            }
            let mut fresh = StackRnn::new(&mut g, &lstm);
            for &w in &alive {
                fresh = fresh.push(&mut g, &lstm, inputs[w], &mut Dropout::Off).unwrap();
            }
            prop_assert_eq!(st.depth(), alive.len());
            prop_assert_eq!(g.value(st.embedding()).to_vec(), g.value(fresh.embedding()).to_vec());
        }
    }
}
