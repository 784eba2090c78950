use rand_chacha::ChaCha8Rng;
use smallvec::SmallVec;

use super::{dropout, Graph, Init, NeuralError, NodeId, ParamId, ParamStore, Real};

/// Whether (and how) to apply dropout while running a network.
pub enum Dropout<'r> {
    Off,
    On { rate: f64, rng: &'r mut ChaCha8Rng },
}

impl Dropout<'_> {
    pub fn apply<T: Real>(&mut self, g: &mut Graph<'_, T>, x: NodeId) -> Result<NodeId, NeuralError> {
        match self {
            Dropout::Off => Ok(x),
            Dropout::On { rate, rng } => dropout(g, x, *rate, true, rng),
        }
    }

    pub fn is_on(&self) -> bool {
        matches!(self, Dropout::On { rate, .. } if *rate > 0.0)
    }

    /// The dropout generator, if dropout is on.
    pub fn rng(&mut self) -> Option<&mut ChaCha8Rng> {
        match self {
            Dropout::Off => None,
            Dropout::On { rng, .. } => Some(rng),
        }
    }

    pub fn reborrow(&mut self) -> Dropout<'_> {
        match self {
            Dropout::Off => Dropout::Off,
            Dropout::On { rate, rng } => Dropout::On { rate: *rate, rng },
        }
    }
}

#[derive(Debug, Clone)]
struct Layer {
    w: ParamId,
    b: ParamId,
    h0: ParamId,
    c0: ParamId,
    input: usize,
}

/// Per-layer `(hidden, cell)` nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmState {
    pub layers: SmallVec<[(NodeId, NodeId); 2]>,
}

impl LstmState {
    /// Hidden state of the last layer.
    pub fn output(&self) -> NodeId {
        self.layers.last().expect("an LSTM has at least one layer").0
    }
}

/// A stacked LSTM with input, forget and output gates and a tanh candidate.
/// Gate rows in each layer's weight matrix are ordered i, f, o, g and the
/// weights act on `[x; h_prev]`.
#[derive(Debug, Clone)]
pub struct Lstm {
    layers: Vec<Layer>,
    hidden: usize,
}

impl Lstm {
    pub fn new<T: Real>(
        store: &mut ParamStore<T>,
        name: &str,
        input: usize,
        hidden: usize,
        num_layers: usize,
    ) -> Result<Self, NeuralError> {
        if num_layers == 0 || hidden == 0 {
            return Err(NeuralError::Shape {
                op: "lstm",
                detail: format!("{num_layers} layers of width {hidden}"),
            });
        }
        let mut layers = Vec::with_capacity(num_layers);
        for l in 0..num_layers {
            let inp = if l == 0 { input } else { hidden };
            let w = store.add(&format!("{name}.l{l}.w"), 4 * hidden, inp + hidden, Init::Glorot)?;
            let b = store.add(&format!("{name}.l{l}.b"), 4 * hidden, 1, Init::Zeros)?;
            for r in hidden..2 * hidden {
                store.param_mut(b).data[r] = T::one();
            }
            let h0 = store.add(&format!("{name}.l{l}.h0"), hidden, 1, Init::Zeros)?;
            let c0 = store.add(&format!("{name}.l{l}.c0"), hidden, 1, Init::Zeros)?;
            layers.push(Layer { w, b, h0, c0, input: inp });
        }
        Ok(Self { layers, hidden })
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input
    }

    /// Parameter ids of layer `l` as `(w, b, h0, c0)`.
    pub fn layer_params(&self, l: usize) -> (ParamId, ParamId, ParamId, ParamId) {
        let x = &self.layers[l];
        (x.w, x.b, x.h0, x.c0)
    }

    /// The learned initial state.
    pub fn initial_state<T: Real>(&self, g: &mut Graph<'_, T>) -> LstmState {
        let layers = self.layers.iter().map(|l| (g.param(l.h0), g.param(l.c0))).collect();
        LstmState { layers }
    }

    /// One time step. Dropout, when on, is applied to each layer's input.
    pub fn step<T: Real>(
        &self,
        g: &mut Graph<'_, T>,
        state: &LstmState,
        x: NodeId,
        drop: &mut Dropout<'_>,
    ) -> Result<LstmState, NeuralError> {
        if state.layers.len() != self.layers.len() {
            return Err(NeuralError::Shape {
                op: "lstm_step",
                detail: format!("state has {} layers, network {}", state.layers.len(), self.layers.len()),
            });
        }
        let h = self.hidden;
        let mut input = x;
        let mut out = SmallVec::with_capacity(self.layers.len());
        for (layer, &(h_prev, c_prev)) in self.layers.iter().zip(&state.layers) {
            if g.value(input).len() != layer.input {
                return Err(NeuralError::Shape {
                    op: "lstm_step",
                    detail: format!("input has {}, layer expects {}", g.value(input).len(), layer.input),
                });
            }
            let input_d = drop.apply(g, input)?;
            let xh = g.concat(&[input_d, h_prev]);
            let pre = g.affine(layer.w, xh, Some(layer.b))?;
            let i = g.slice(pre, 0, h)?;
            let f = g.slice(pre, h, h)?;
            let o = g.slice(pre, 2 * h, h)?;
            let cand = g.slice(pre, 3 * h, h)?;
            let i = g.sigmoid(i);
            let f = g.sigmoid(f);
            let o = g.sigmoid(o);
            let cand = g.tanh(cand);
            let keep = g.mul(f, c_prev)?;
            let write = g.mul(i, cand)?;
            let c = g.add(keep, write)?;
            let tc = g.tanh(c);
            let hn = g.mul(o, tc)?;
            out.push((hn, c));
            input = hn;
        }
        Ok(LstmState { layers: out })
    }

    /// Runs the network over `xs` from the initial state and returns the
    /// state after every input.
    pub fn run<T: Real>(
        &self,
        g: &mut Graph<'_, T>,
        xs: &[NodeId],
        drop: &mut Dropout<'_>,
    ) -> Result<Vec<LstmState>, NeuralError> {
        let mut s = self.initial_state(g);
        let mut out = Vec::with_capacity(xs.len());
        for &x in xs {
            s = self.step(g, &s, x, drop)?;
            out.push(s.clone());
        }
        Ok(out)
    }
}
