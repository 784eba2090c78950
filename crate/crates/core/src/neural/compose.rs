use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Dropout, Graph, Init, Lstm, NeuralError, NodeId, ParamId, ParamStore, Real};

/// Which composition function to use when a constituent is reduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Composition {
    #[default]
    Correct,
    /// Drops the rightmost child and reads a second copy of the label in
    /// its place.
    Buggy,
}

impl FromStr for Composition {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "correct" => Ok(Self::Correct),
            "buggy" => Ok(Self::Buggy),
            _ => Err(format!("unknown composition variant '{s}' (expected correct or buggy)")),
        }
    }
}

impl fmt::Display for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Correct => "correct",
            Self::Buggy => "buggy",
        })
    }
}

/// The sequences read by the forward and reverse LSTMs.
pub fn composition_sequences<X: Clone>(
    variant: Composition,
    label: X,
    children: &[X],
) -> Result<(Vec<X>, Vec<X>), NeuralError> {
    if children.is_empty() {
        return Err(NeuralError::NoChildren);
    }
    let body: Vec<X> = match variant {
        Composition::Correct => children.to_vec(),
        Composition::Buggy => {
            let mut b = children[..children.len() - 1].to_vec();
            b.push(label.clone());
            b
        }
    };
    let mut fwd = vec![label.clone()];
    fwd.extend(body.iter().cloned());
    let mut bwd = vec![label];
    bwd.extend(body.into_iter().rev());
    Ok((fwd, bwd))
}

/// Bidirectional LSTM composition: the final forward and reverse hidden
/// states are concatenated and mapped back to the item dimension through
/// an affine layer and tanh.
#[derive(Debug, Clone)]
pub struct Composer {
    fwd: Lstm,
    bwd: Lstm,
    w: ParamId,
    b: ParamId,
    variant: Composition,
}

impl Composer {
    pub fn new<T: Real>(
        store: &mut ParamStore<T>,
        name: &str,
        dim: usize,
        hidden: usize,
        layers: usize,
        variant: Composition,
    ) -> Result<Self, NeuralError> {
        let fwd = Lstm::new(store, &format!("{name}.fwd"), dim, hidden, layers)?;
        let bwd = Lstm::new(store, &format!("{name}.bwd"), dim, hidden, layers)?;
        let w = store.add(&format!("{name}.w"), dim, 2 * hidden, Init::Glorot)?;
        let b = store.add(&format!("{name}.b"), dim, 1, Init::Zeros)?;
        Ok(Self { fwd, bwd, w, b, variant })
    }

    pub fn variant(&self) -> Composition {
        self.variant
    }

    pub fn compose<T: Real>(
        &self,
        g: &mut Graph<'_, T>,
        label: NodeId,
        children: &[NodeId],
    ) -> Result<NodeId, NeuralError> {
        let (f, r) = composition_sequences(self.variant, label, children)?;
        let hf = self.fwd.run(g, &f, &mut Dropout::Off)?.pop().expect("non-empty").output();
        let hr = self.bwd.run(g, &r, &mut Dropout::Off)?.pop().expect("non-empty").output();
        let both = g.concat(&[hf, hr]);
        let a = g.affine(self.w, both, Some(self.b))?;
        Ok(g.tanh(a))
    }
}
