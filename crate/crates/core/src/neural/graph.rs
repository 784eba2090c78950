//! Reverse-mode automatic differentiation over dense vectors.
//!
//! A [`Graph`] is a tape: every operation appends a node recording its
//! inputs, and its value is stored in one contiguous arena. Parameters are
//! read from a borrowed [`ParamStore`]; [`Graph::backward`] walks the tape
//! once in reverse and returns per-parameter gradients.

use rand::Rng;

use super::{Gradients, NeuralError, ParamId, ParamStore, Real};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A range into one of the side arenas.
#[derive(Debug, Clone, Copy)]
struct Span {
    start: u32,
    len: u32,
}

impl Span {
    fn range(self) -> std::ops::Range<usize> {
        self.start as usize..(self.start + self.len) as usize
    }
}

#[derive(Debug, Clone, Copy)]
enum Op<T> {
    Const,
    Param(ParamId),
    Lookup(ParamId, u32),
    Affine {
        w: ParamId,
        b: Option<ParamId>,
        x: NodeId,
    },
    AffineRows {
        w: ParamId,
        b: Option<ParamId>,
        rows: Span,
        x: NodeId,
    },
    Add(NodeId, NodeId),
    Sum(Span),
    Mul(NodeId, NodeId),
    Scale(NodeId, T),
    Tanh(NodeId),
    Sigmoid(NodeId),
    Concat(Span),
    Slice(NodeId, u32),
    LogSoftmax(NodeId, Option<Span>),
    Pick(NodeId, u32),
}

/// Arena lengths before a node was added, so truncation can roll back.
#[derive(Debug, Clone, Copy)]
struct Marks {
    value: u32,
    id: u32,
    row: u32,
    mask: u32,
}

#[derive(Debug, Clone, Copy)]
struct Node<T> {
    op: Op<T>,
    marks: Marks,
    len: u32,
}

/// A computation tape over a read-only parameter snapshot.
pub struct Graph<'p, T: Real> {
    store: &'p ParamStore<T>,
    nodes: Vec<Node<T>>,
    values: Vec<T>,
    ids: Vec<NodeId>,
    rows: Vec<u32>,
    masks: Vec<bool>,
    scratch: Vec<std::ops::Range<usize>>,
    dot_products: u64,
}

#[inline]
fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    let mut s = T::zero();
    for (x, y) in a.iter().zip(b) {
        s += *x * *y;
    }
    s
}

fn sigmoid<T: Real>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

fn shape(op: &'static str, detail: String) -> NeuralError {
    NeuralError::Shape { op, detail }
}

impl<'p, T: Real> Graph<'p, T> {
    pub fn new(store: &'p ParamStore<T>) -> Self {
        Self {
            store,
            nodes: Vec::new(),
            values: Vec::new(),
            ids: Vec::new(),
            rows: Vec::new(),
            masks: Vec::new(),
            scratch: Vec::new(),
            dot_products: 0,
        }
    }

    pub fn store(&self) -> &'p ParamStore<T> {
        self.store
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Drops every node created after the tape had `len` nodes. Ids handed
    /// out after that point become invalid.
    pub fn truncate(&mut self, len: usize) {
        if let Some(n) = self.nodes.get(len) {
            let m = n.marks;
            self.values.truncate(m.value as usize);
            self.ids.truncate(m.id as usize);
            self.rows.truncate(m.row as usize);
            self.masks.truncate(m.mask as usize);
            self.nodes.truncate(len);
        }
    }

    /// Row-times-vector products evaluated so far (cost instrumentation).
    pub fn dot_products(&self) -> u64 {
        self.dot_products
    }

    pub fn value(&self, id: NodeId) -> &[T] {
        let n = &self.nodes[id.index()];
        let start = n.marks.value as usize;
        &self.values[start..start + n.len as usize]
    }

    pub fn scalar(&self, id: NodeId) -> T {
        self.values[self.nodes[id.index()].marks.value as usize]
    }

    fn marks(&self) -> Marks {
        Marks {
            value: self.values.len() as u32,
            id: self.ids.len() as u32,
            row: self.rows.len() as u32,
            mask: self.masks.len() as u32,
        }
    }

    fn value_range(&self, id: NodeId) -> std::ops::Range<usize> {
        let n = &self.nodes[id.index()];
        n.marks.value as usize..(n.marks.value + n.len) as usize
    }

    /// Appends a node of `len` values computed by `fill`, which sees the
    /// existing arena and the new (zeroed) output slice.
    fn push_with(&mut self, op: Op<T>, marks: Marks, len: usize, fill: impl FnOnce(&[T], &mut [T])) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        let off = marks.value as usize;
        self.values.resize(off + len, T::zero());
        let (old, new) = self.values.split_at_mut(off);
        fill(old, new);
        self.nodes.push(Node {
            op,
            marks,
            len: len as u32,
        });
        id
    }

    fn push_values(&mut self, op: Op<T>, v: &[T]) -> NodeId {
        let marks = self.marks();
        self.push_with(op, marks, v.len(), |_, out| out.copy_from_slice(v))
    }

    pub fn input(&mut self, value: Vec<T>) -> NodeId {
        self.push_values(Op::Const, &value)
    }

    /// A whole parameter, flattened row-major, as a vector node.
    pub fn param(&mut self, p: ParamId) -> NodeId {
        let store = self.store;
        self.push_values(Op::Param(p), &store.param(p).data)
    }

    /// One row of a parameter matrix (an embedding lookup).
    pub fn lookup(&mut self, p: ParamId, row: usize) -> Result<NodeId, NeuralError> {
        let param = self.store.param(p);
        if row >= param.rows {
            return Err(shape("lookup", format!("row {row} of {}x{} '{}'", param.rows, param.cols, param.name)));
        }
        Ok(self.push_values(Op::Lookup(p, row as u32), param.row(row)))
    }

    /// `W x + b` for parameter matrix `W` and optional bias `b`.
    pub fn affine(&mut self, w: ParamId, x: NodeId, b: Option<ParamId>) -> Result<NodeId, NeuralError> {
        let store = self.store;
        let wp = store.param(w);
        let xr = self.value_range(x);
        if wp.cols != xr.len() {
            return Err(shape("affine", format!("'{}' is {}x{}, input has {}", wp.name, wp.rows, wp.cols, xr.len())));
        }
        let bias = match b {
            Some(b) => {
                let bp = store.param(b);
                if bp.data.len() != wp.rows {
                    return Err(shape("affine", format!("bias '{}' has {}, expected {}", bp.name, bp.data.len(), wp.rows)));
                }
                Some(&bp.data[..])
            }
            None => None,
        };
        self.dot_products += wp.rows as u64;
        let marks = self.marks();
        Ok(self.push_with(Op::Affine { w, b, x }, marks, wp.rows, |old, out| {
            let xv = &old[xr];
            for (r, o) in out.iter_mut().enumerate() {
                *o = dot(wp.row(r), xv);
            }
            if let Some(bias) = bias {
                for (o, bb) in out.iter_mut().zip(bias) {
                    *o += *bb;
                }
            }
        }))
    }

    /// `affine` restricted to the listed rows of `W` (and `b`).
    pub fn affine_rows(
        &mut self,
        w: ParamId,
        rows: &[usize],
        x: NodeId,
        b: Option<ParamId>,
    ) -> Result<NodeId, NeuralError> {
        let store = self.store;
        let wp = store.param(w);
        let xr = self.value_range(x);
        if wp.cols != xr.len() {
            return Err(shape("affine_rows", format!("'{}' is {}x{}, input has {}", wp.name, wp.rows, wp.cols, xr.len())));
        }
        if let Some(&r) = rows.iter().find(|&&r| r >= wp.rows) {
            return Err(shape("affine_rows", format!("row {r} of '{}' with {} rows", wp.name, wp.rows)));
        }
        let bias = match b {
            Some(b) => {
                let bp = store.param(b);
                if bp.data.len() != wp.rows {
                    return Err(shape("affine_rows", format!("bias '{}' has {}, expected {}", bp.name, bp.data.len(), wp.rows)));
                }
                Some(&bp.data[..])
            }
            None => None,
        };
        self.dot_products += rows.len() as u64;
        let marks = self.marks();
        self.rows.extend(rows.iter().map(|&r| r as u32));
        let span = Span {
            start: marks.row,
            len: rows.len() as u32,
        };
        Ok(self.push_with(Op::AffineRows { w, b, rows: span, x }, marks, rows.len(), |old, out| {
            let xv = &old[xr];
            for (o, &r) in out.iter_mut().zip(rows) {
                *o = dot(wp.row(r), xv);
                if let Some(bias) = bias {
                    *o += bias[r];
                }
            }
        }))
    }

    fn binary(&mut self, name: &'static str, op: Op<T>, a: NodeId, b: NodeId, f: fn(T, T) -> T) -> Result<NodeId, NeuralError> {
        let (ar, br) = (self.value_range(a), self.value_range(b));
        if ar.len() != br.len() {
            return Err(shape(name, format!("{} vs {}", ar.len(), br.len())));
        }
        let marks = self.marks();
        Ok(self.push_with(op, marks, ar.len(), |old, out| {
            for ((o, x), y) in out.iter_mut().zip(&old[ar]).zip(&old[br]) {
                *o = f(*x, *y);
            }
        }))
    }

    fn unary(&mut self, op: Op<T>, a: NodeId, f: impl Fn(T) -> T) -> NodeId {
        let ar = self.value_range(a);
        let marks = self.marks();
        self.push_with(op, marks, ar.len(), |old, out| {
            for (o, x) in out.iter_mut().zip(&old[ar]) {
                *o = f(*x);
            }
        })
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, NeuralError> {
        self.binary("add", Op::Add(a, b), a, b, |x, y| x + y)
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, NeuralError> {
        self.binary("mul", Op::Mul(a, b), a, b, |x, y| x * y)
    }

    /// Elementwise sum of equally sized nodes.
    pub fn sum(&mut self, xs: &[NodeId]) -> Result<NodeId, NeuralError> {
        let Some(&first) = xs.first() else {
            return Err(shape("sum", "no inputs".into()));
        };
        let len = self.value_range(first).len();
        let mut ranges = std::mem::take(&mut self.scratch);
        ranges.clear();
        ranges.extend(xs.iter().map(|&x| self.value_range(x)));
        if let Some(r) = ranges.iter().find(|r| r.len() != len) {
            let e = shape("sum", format!("{} vs {}", len, r.len()));
            self.scratch = ranges;
            return Err(e);
        }
        let marks = self.marks();
        self.ids.extend_from_slice(xs);
        let span = Span {
            start: marks.id,
            len: xs.len() as u32,
        };
        let id = self.push_with(Op::Sum(span), marks, len, |old, out| {
            for r in &ranges {
                for (o, x) in out.iter_mut().zip(&old[r.clone()]) {
                    *o += *x;
                }
            }
        });
        self.scratch = ranges;
        Ok(id)
    }

    /// Elementwise product with a constant vector.
    pub fn mul_const(&mut self, a: NodeId, c: Vec<T>) -> Result<NodeId, NeuralError> {
        let k = self.input(c);
        self.mul(a, k)
    }

    pub fn scale(&mut self, a: NodeId, c: T) -> NodeId {
        self.unary(Op::Scale(a, c), a, |x| x * c)
    }

    pub fn neg(&mut self, a: NodeId) -> NodeId {
        self.scale(a, -T::one())
    }

    pub fn tanh(&mut self, a: NodeId) -> NodeId {
        self.unary(Op::Tanh(a), a, |x| x.tanh())
    }

    pub fn sigmoid(&mut self, a: NodeId) -> NodeId {
        self.unary(Op::Sigmoid(a), a, sigmoid)
    }

    pub fn concat(&mut self, xs: &[NodeId]) -> NodeId {
        let marks = self.marks();
        self.ids.extend_from_slice(xs);
        let span = Span {
            start: marks.id,
            len: xs.len() as u32,
        };
        let mut ranges = std::mem::take(&mut self.scratch);
        ranges.clear();
        ranges.extend(xs.iter().map(|&x| self.value_range(x)));
        let len = ranges.iter().map(|r| r.len()).sum();
        let id = self.push_with(Op::Concat(span), marks, len, |old, out| {
            let mut off = 0;
            for r in &ranges {
                out[off..off + r.len()].copy_from_slice(&old[r.clone()]);
                off += r.len();
            }
        });
        self.scratch = ranges;
        id
    }

    pub fn slice(&mut self, a: NodeId, start: usize, len: usize) -> Result<NodeId, NeuralError> {
        let ar = self.value_range(a);
        if start + len > ar.len() {
            return Err(shape("slice", format!("[{start}, {}) of {}", start + len, ar.len())));
        }
        let marks = self.marks();
        let src = ar.start + start..ar.start + start + len;
        Ok(self.push_with(Op::Slice(a, start as u32), marks, len, |old, out| {
            out.copy_from_slice(&old[src])
        }))
    }

    /// Log-softmax over the entries where `mask` is true; masked entries get
    /// negative infinity and no gradient. `None` means no mask.
    pub fn log_softmax(&mut self, a: NodeId, mask: Option<&[bool]>) -> Result<NodeId, NeuralError> {
        let ar = self.value_range(a);
        if let Some(m) = &mask {
            if m.len() != ar.len() {
                return Err(shape("log_softmax", format!("mask {} vs scores {}", m.len(), ar.len())));
            }
            if !m.iter().any(|&b| b) {
                return Err(NeuralError::EmptySupport);
            }
        }
        if ar.is_empty() {
            return Err(NeuralError::EmptySupport);
        }
        let marks = self.marks();
        let span = mask.map(|m| {
            self.masks.extend_from_slice(m);
            Span {
                start: marks.mask,
                len: m.len() as u32,
            }
        });
        let on = |i: usize| mask.is_none_or(|m| m[i]);
        Ok(self.push_with(Op::LogSoftmax(a, span), marks, ar.len(), |old, out| {
            let av = &old[ar];
            let mut max = T::neg_infinity();
            for (i, &x) in av.iter().enumerate() {
                if on(i) && x > max {
                    max = x;
                }
            }
            let mut z = T::zero();
            for (i, &x) in av.iter().enumerate() {
                if on(i) {
                    z += (x - max).exp();
                }
            }
            let lz = max + z.ln();
            for (i, (o, &x)) in out.iter_mut().zip(av).enumerate() {
                *o = if on(i) { x - lz } else { T::neg_infinity() };
            }
        }))
    }

    pub fn pick(&mut self, a: NodeId, i: usize) -> Result<NodeId, NeuralError> {
        let ar = self.value_range(a);
        if i >= ar.len() {
            return Err(shape("pick", format!("index {i} of {}", ar.len())));
        }
        let marks = self.marks();
        Ok(self.push_with(Op::Pick(a, i as u32), marks, 1, |old, out| out[0] = old[ar.start + i]))
    }

    /// Backpropagates from the scalar `loss` and returns parameter
    /// gradients. Consumes the tape.
    pub fn backward(self, loss: NodeId) -> Result<Gradients<T>, NeuralError> {
        let lr = self.value_range(loss);
        if lr.len() != 1 {
            return Err(shape("backward", format!("loss has {} entries", lr.len())));
        }
        let n = loss.index() + 1;
        // adjoints share the value arena's layout
        let mut adj = vec![T::zero(); lr.end];
        let mut live = vec![false; n];
        adj[lr.start] = T::one();
        live[loss.index()] = true;
        let mut pgrads: Vec<Option<Vec<T>>> = vec![None; self.store.len()];

        fn acc<T: Real>(slot: &mut Option<Vec<T>>, len: usize) -> &mut Vec<T> {
            slot.get_or_insert_with(|| vec![T::zero(); len])
        }

        for i in (0..n).rev() {
            if !live[i] {
                continue;
            }
            let node = self.nodes[i];
            let yr = self.value_range(NodeId(i as u32));
            // the output adjoint lies after every input's slot
            let (before, gy) = adj.split_at_mut(yr.start);
            let gy = &gy[..yr.len()];
            let vals = &self.values;
            let mut touch = |id: NodeId| -> std::ops::Range<usize> {
                live[id.index()] = true;
                self.value_range(id)
            };
            match node.op {
                Op::Const => {}
                Op::Param(p) => {
                    let g = acc(&mut pgrads[p.0], gy.len());
                    for (a, b) in g.iter_mut().zip(gy) {
                        *a += *b;
                    }
                }
                Op::Lookup(p, row) => {
                    let param = self.store.param(p);
                    let g = acc(&mut pgrads[p.0], param.data.len());
                    let off = row as usize * param.cols;
                    for (a, b) in g[off..off + param.cols].iter_mut().zip(gy) {
                        *a += *b;
                    }
                }
                Op::Affine { w, b, x } => {
                    let wp = self.store.param(w);
                    let xr = touch(x);
                    let xv = &vals[xr.clone()];
                    let gw = acc(&mut pgrads[w.0], wp.data.len());
                    for (r, &gr) in gy.iter().enumerate() {
                        if gr == T::zero() {
                            continue;
                        }
                        for (a, xx) in gw[r * wp.cols..(r + 1) * wp.cols].iter_mut().zip(xv) {
                            *a += gr * *xx;
                        }
                    }
                    if let Some(b) = b {
                        let gb = acc(&mut pgrads[b.0], gy.len());
                        for (a, g) in gb.iter_mut().zip(gy) {
                            *a += *g;
                        }
                    }
                    let gx = &mut before[xr];
                    for (r, &gr) in gy.iter().enumerate() {
                        if gr == T::zero() {
                            continue;
                        }
                        for (a, ww) in gx.iter_mut().zip(wp.row(r)) {
                            *a += gr * *ww;
                        }
                    }
                }
                Op::AffineRows { w, b, rows, x } => {
                    let wp = self.store.param(w);
                    let xr = touch(x);
                    let xv = &vals[xr.clone()];
                    let rows = &self.rows[rows.range()];
                    let gw = acc(&mut pgrads[w.0], wp.data.len());
                    for (&r, &gr) in rows.iter().zip(gy) {
                        let r = r as usize;
                        for (a, xx) in gw[r * wp.cols..(r + 1) * wp.cols].iter_mut().zip(xv) {
                            *a += gr * *xx;
                        }
                    }
                    if let Some(b) = b {
                        let gb = acc(&mut pgrads[b.0], wp.rows);
                        for (&r, &gr) in rows.iter().zip(gy) {
                            gb[r as usize] += gr;
                        }
                    }
                    let gx = &mut before[xr];
                    for (&r, &gr) in rows.iter().zip(gy) {
                        for (a, ww) in gx.iter_mut().zip(wp.row(r as usize)) {
                            *a += gr * *ww;
                        }
                    }
                }
                Op::Add(a, b) => {
                    for id in [a, b] {
                        let r = touch(id);
                        for (s, d) in before[r].iter_mut().zip(gy) {
                            *s += *d;
                        }
                    }
                }
                Op::Sum(span) => {
                    for &id in &self.ids[span.range()] {
                        let r = touch(id);
                        for (s, d) in before[r].iter_mut().zip(gy) {
                            *s += *d;
                        }
                    }
                }
                Op::Mul(a, b) => {
                    let (ar, br) = (touch(a), touch(b));
                    for k in 0..gy.len() {
                        let (av, bv) = (vals[ar.start + k], vals[br.start + k]);
                        before[ar.start + k] += gy[k] * bv;
                        before[br.start + k] += gy[k] * av;
                    }
                }
                Op::Scale(a, c) => {
                    let r = touch(a);
                    for (s, d) in before[r].iter_mut().zip(gy) {
                        *s += *d * c;
                    }
                }
                Op::Tanh(a) => {
                    let r = touch(a);
                    for ((s, d), y) in before[r].iter_mut().zip(gy).zip(&vals[yr.clone()]) {
                        *s += *d * (T::one() - *y * *y);
                    }
                }
                Op::Sigmoid(a) => {
                    let r = touch(a);
                    for ((s, d), y) in before[r].iter_mut().zip(gy).zip(&vals[yr.clone()]) {
                        *s += *d * *y * (T::one() - *y);
                    }
                }
                Op::Concat(span) => {
                    let mut off = 0;
                    for &id in &self.ids[span.range()] {
                        let r = touch(id);
                        let len = r.len();
                        for (s, d) in before[r].iter_mut().zip(&gy[off..off + len]) {
                            *s += *d;
                        }
                        off += len;
                    }
                }
                Op::Slice(a, start) => {
                    let r = touch(a);
                    let s0 = r.start + start as usize;
                    for (s, d) in before[s0..s0 + gy.len()].iter_mut().zip(gy) {
                        *s += *d;
                    }
                }
                Op::LogSoftmax(a, mask) => {
                    let mask = mask.map(|m| &self.masks[m.range()]);
                    let on = |k: usize| mask.is_none_or(|m| m[k]);
                    let total: T = (0..gy.len()).filter(|&k| on(k)).map(|k| gy[k]).sum();
                    let r = touch(a);
                    let y = &vals[yr.clone()];
                    for k in (0..gy.len()).filter(|&k| on(k)) {
                        before[r.start + k] += gy[k] - y[k].exp() * total;
                    }
                }
                Op::Pick(a, idx) => {
                    let r = touch(a);
                    before[r.start + idx as usize] += gy[0];
                }
            }
        }
        Ok(Gradients { per_param: pgrads })
    }
}

/// Inverted dropout: in training, zero each unit with probability `rate`
/// and scale survivors by `1 / (1 - rate)`; at evaluation, identity.
pub fn dropout<T: Real>(
    g: &mut Graph<'_, T>,
    x: NodeId,
    rate: f64,
    training: bool,
    rng: &mut impl Rng,
) -> Result<NodeId, NeuralError> {
    if !(0.0..1.0).contains(&rate) {
        return Err(NeuralError::DropoutRate(rate));
    }
    if !training || rate == 0.0 {
        return Ok(x);
    }
    let keep = T::of(1.0 / (1.0 - rate));
    let mask = (0..g.value(x).len())
        .map(|_| if rng.gen::<f64>() < rate { T::zero() } else { keep })
        .collect();
    g.mul_const(x, mask)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::Init;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol || x == y)
    }

    #[test]
    fn log_softmax_symmetric() {
        let s = ParamStore::<f64>::new(0);
        let mut g = Graph::new(&s);
        let x = g.input(vec![0.0, 0.0]);
        let y = g.log_softmax(x, Some(&[true, true])).unwrap();
        let l2 = std::f64::consts::LN_2;
        assert!(close(g.value(y), &[-l2, -l2], 1e-15));
    }

    #[test]
    fn log_softmax_single_valid() {
        let s = ParamStore::<f64>::new(0);
        let mut g = Graph::new(&s);
        let x = g.input(vec![5.0, 0.0]);
        let y = g.log_softmax(x, Some(&[true, false])).unwrap();
        assert_eq!(g.value(y), &[0.0, f64::NEG_INFINITY]);
    }

    #[test]
    fn fully_masked_is_error() {
        let s = ParamStore::<f64>::new(0);
        let mut g = Graph::new(&s);
        let x = g.input(vec![1.0, 2.0]);
        assert!(matches!(g.log_softmax(x, Some(&[false, false])), Err(NeuralError::EmptySupport)));
    }

    #[test]
    fn masked_entries_get_no_gradient() {
        let mut s = ParamStore::<f64>::new(0);
        let p = s.add("v", 3, 1, Init::Constant(0.3)).unwrap();
        let mut g = Graph::new(&s);
        let x = g.param(p);
        let y = g.log_softmax(x, Some(&[true, false, true])).unwrap();
        let l = g.pick(y, 0).unwrap();
        let grads = g.backward(l).unwrap();
        let gv = grads.get(p).unwrap();
        assert_eq!(gv[1], 0.0);
        assert!((gv[0] - 0.5).abs() < 1e-12 && (gv[2] + 0.5).abs() < 1e-12);
    }

    #[test]
    fn affine_identity() {
        let mut s = ParamStore::<f64>::new(0);
        let w = s.add("I", 3, 3, Init::Zeros).unwrap();
        let b = s.add("b", 3, 1, Init::Zeros).unwrap();
        for i in 0..3 {
            s.param_mut(w).data[i * 3 + i] = 1.0;
        }
        let mut g = Graph::new(&s);
        let x = g.input(vec![1.5, -2.0, 0.25]);
        let y = g.affine(w, x, Some(b)).unwrap();
        assert_eq!(g.value(y), &[1.5, -2.0, 0.25]);
        assert_eq!(g.dot_products(), 3);
    }

    #[test]
    fn shape_errors() {
        let mut s = ParamStore::<f64>::new(0);
        let w = s.add("w", 2, 3, Init::Zeros).unwrap();
        let mut g = Graph::new(&s);
        let x = g.input(vec![1.0, 2.0]);
        let y = g.input(vec![1.0, 2.0, 3.0]);
        assert!(matches!(g.affine(w, x, None), Err(NeuralError::Shape { .. })));
        assert!(matches!(g.add(x, y), Err(NeuralError::Shape { .. })));
        assert!(matches!(g.mul(x, y), Err(NeuralError::Shape { .. })));
        assert!(matches!(g.slice(x, 1, 2), Err(NeuralError::Shape { .. })));
        assert!(matches!(g.lookup(w, 2), Err(NeuralError::Shape { .. })));
        assert!(matches!(g.log_softmax(x, Some(&[true])), Err(NeuralError::Shape { .. })));
    }

    #[test]
    fn concat_and_slice() {
        let s = ParamStore::<f64>::new(0);
        let mut g = Graph::new(&s);
        let a = g.input(vec![1.0, 2.0]);
        let b = g.input(vec![3.0]);
        let c = g.concat(&[a, b]);
        assert_eq!(g.value(c), &[1.0, 2.0, 3.0]);
        let d = g.slice(c, 1, 2).unwrap();
        assert_eq!(g.value(d), &[2.0, 3.0]);
    }

    #[test]
    fn dropout_contract() {
        let s = ParamStore::<f64>::new(0);
        let mut g = Graph::new(&s);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = g.input(vec![1.0; 1000]);
        assert_eq!(dropout(&mut g, x, 0.0, true, &mut rng).unwrap(), x);
        assert_eq!(dropout(&mut g, x, 0.3, false, &mut rng).unwrap(), x);
        let y = dropout(&mut g, x, 0.3, true, &mut rng).unwrap();
        let v = g.value(y);
        let kept = v.iter().filter(|&&z| z != 0.0).count();
        assert!(v.iter().all(|&z| z == 0.0 || (z - 1.0 / 0.7).abs() < 1e-12));
        assert!((600..800).contains(&kept), "{kept}");
        assert!(matches!(dropout(&mut g, x, 1.0, true, &mut rng), Err(NeuralError::DropoutRate(_))));
    }

    #[test]
    fn truncate_rolls_back() {
        let s = ParamStore::<f64>::new(0);
        let mut g = Graph::new(&s);
        let a = g.input(vec![1.0]);
        let mark = g.len();
        let _ = g.tanh(a);
        g.truncate(mark);
        assert_eq!(g.len(), 1);
        assert_eq!(g.value(a), &[1.0]);
    }

    #[test]
    fn sigmoid_is_stable() {
        let s = ParamStore::<f64>::new(0);
        let mut g = Graph::new(&s);
        let a = g.input(vec![-800.0, 0.0, 800.0]);
        let y = g.sigmoid(a);
        assert_eq!(g.value(y), &[0.0, 0.5, 1.0]);
    }
}
