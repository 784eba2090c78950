//! Named trainable parameters and the checkpoint container.
//!
//! Checkpoint layout, all integers little-endian:
//!
//! | field          | bytes                                   |
//! |----------------|-----------------------------------------|
//! | magic          | 8, ASCII `RNNGCKPT`                     |
//! | version        | u32, currently 1                        |
//! | precision      | u8, 4 = f32, 8 = f64                    |
//! | seed           | u64                                     |
//! | metadata       | u32 length + UTF-8 bytes                |
//! | param count    | u32                                     |
//! | per parameter  | u32 name length + UTF-8 name, u32 rows, u32 cols, rows*cols raw little-endian values |
//!
//! Values are stored row-major. Loading into a different precision converts
//! each value; loading into the same precision is bit-exact.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{NeuralError, Precision, Real};

const MAGIC: &[u8; 8] = b"RNNGCKPT";
const VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamId(pub(crate) usize);

impl ParamId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Initialization scheme for a new parameter.
#[derive(Debug, Clone, Copy)]
pub enum Init {
    Zeros,
    Constant(f64),
    /// Uniform(-a, a) with a = sqrt(6 / (fan_in + fan_out)).
    Glorot,
    Uniform(f64),
}

#[derive(Debug, Clone)]
pub struct Param<T> {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
    pub grad: Vec<T>,
}

impl<T: Real> Param<T> {
    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }
}

/// Samples a `rows x cols` Glorot-uniform array.
pub fn glorot_init<T: Real>(rows: usize, cols: usize, rng: &mut impl Rng) -> Vec<T> {
    let a = (6.0 / (rows + cols) as f64).sqrt();
    (0..rows * cols).map(|_| T::of(rng.gen_range(-a..a))).collect()
}

/// Dense gradients keyed by parameter, produced by a backward pass.
#[derive(Debug, Clone)]
pub struct Gradients<T> {
    pub(crate) per_param: Vec<Option<Vec<T>>>,
}

impl<T: Real> Gradients<T> {
    pub fn get(&self, id: ParamId) -> Option<&[T]> {
        self.per_param.get(id.0).and_then(|g| g.as_deref())
    }
}

/// The collection of trainable arrays, addressed by unique name.
#[derive(Debug, Clone)]
pub struct ParamStore<T> {
    params: Vec<Param<T>>,
    index: HashMap<String, ParamId>,
    seed: u64,
    rng: ChaCha8Rng,
}

impl<T: Real> ParamStore<T> {
    pub fn new(seed: u64) -> Self {
        Self {
            params: Vec::new(),
            index: HashMap::new(),
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Registers a parameter. Initial values are drawn from the store's
    /// seeded stream, so declaration order fixes the values.
    pub fn add(&mut self, name: &str, rows: usize, cols: usize, init: Init) -> Result<ParamId, NeuralError> {
        if self.index.contains_key(name) {
            return Err(NeuralError::DuplicateParam(name.to_string()));
        }
        let n = rows * cols;
        let data = match init {
            Init::Zeros => vec![T::zero(); n],
            Init::Constant(c) => vec![T::of(c); n],
            Init::Glorot => glorot_init(rows, cols, &mut self.rng),
            Init::Uniform(a) => (0..n).map(|_| T::of(self.rng.gen_range(-a..a))).collect(),
        };
        let id = ParamId(self.params.len());
        self.params.push(Param {
            name: name.to_string(),
            rows,
            cols,
            data,
            grad: vec![T::zero(); n],
        });
        self.index.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn id(&self, name: &str) -> Option<ParamId> {
        self.index.get(name).copied()
    }

    pub fn param(&self, id: ParamId) -> &Param<T> {
        &self.params[id.0]
    }

    pub fn param_mut(&mut self, id: ParamId) -> &mut Param<T> {
        &mut self.params[id.0]
    }

    pub fn params(&self) -> &[Param<T>] {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn num_values(&self) -> usize {
        self.params.iter().map(|p| p.data.len()).sum()
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.params.len()).map(ParamId)
    }

    /// Adds a backward pass's gradients into the adjoint slots.
    pub fn accumulate(&mut self, grads: &Gradients<T>) {
        for (p, g) in self.params.iter_mut().zip(&grads.per_param) {
            if let Some(g) = g {
                for (a, b) in p.grad.iter_mut().zip(g) {
                    *a += *b;
                }
            }
        }
    }

    pub fn zero_grads(&mut self) {
        for p in &mut self.params {
            p.grad.iter_mut().for_each(|g| *g = T::zero());
        }
    }

    pub fn grad_norm(&self) -> f64 {
        self.params
            .iter()
            .flat_map(|p| p.grad.iter())
            .map(|g| g.as_f64() * g.as_f64())
            .sum::<f64>()
            .sqrt()
    }

    /// Rescales adjoints so their global L2 norm is at most `max_norm`.
    pub fn clip_grads(&mut self, max_norm: f64) {
        let norm = self.grad_norm();
        if norm > max_norm && norm > 0.0 {
            let s = T::of(max_norm / norm);
            for p in &mut self.params {
                p.grad.iter_mut().for_each(|g| *g *= s);
            }
        }
    }

    /// Plain SGD: theta <- theta - lr * grad, then zero the adjoints.
    pub fn sgd_step(&mut self, lr: f64) {
        let lr = T::of(lr);
        for p in &mut self.params {
            for (d, g) in p.data.iter_mut().zip(p.grad.iter_mut()) {
                *d -= lr * *g;
                *g = T::zero();
            }
        }
    }

    /// Serializes the store plus an opaque metadata string.
    pub fn save(&self, metadata: &str) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.push(T::PRECISION.tag());
        out.extend_from_slice(&self.seed.to_le_bytes());
        put_str(&mut out, metadata);
        out.extend_from_slice(&(self.params.len() as u32).to_le_bytes());
        for p in &self.params {
            put_str(&mut out, &p.name);
            out.extend_from_slice(&(p.rows as u32).to_le_bytes());
            out.extend_from_slice(&(p.cols as u32).to_le_bytes());
            for v in &p.data {
                v.write_le(&mut out);
            }
        }
        out
    }

    /// Reads a checkpoint, converting values to `T` if needed. Returns the
    /// store, the metadata string and the precision it was written in.
    pub fn load(bytes: &[u8]) -> Result<(Self, String, Precision), NeuralError> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(NeuralError::Checkpoint("bad magic".into()));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(NeuralError::Checkpoint(format!("unsupported version {version}")));
        }
        let tag = r.take(1)?[0];
        let precision =
            Precision::from_tag(tag).ok_or_else(|| NeuralError::Checkpoint(format!("bad precision tag {tag}")))?;
        let seed = u64::from_le_bytes(r.take(8)?.try_into().expect("8 bytes"));
        let metadata = r.string()?;
        let count = r.u32()? as usize;
        let mut store = ParamStore::new(seed);
        let width = precision.tag() as usize;
        for _ in 0..count {
            let name = r.string()?;
            let rows = r.u32()? as usize;
            let cols = r.u32()? as usize;
            let raw = r.take(rows * cols * width)?;
            let data: Vec<T> = raw
                .chunks_exact(width)
                .map(|c| match precision {
                    Precision::F64 if T::PRECISION == Precision::F64 => T::read_le(c),
                    Precision::F32 if T::PRECISION == Precision::F32 => T::read_le(c),
                    Precision::F64 => T::of(f64::read_le(c)),
                    Precision::F32 => T::of(f32::read_le(c) as f64),
                })
                .collect();
            let id = store.add(&name, rows, cols, Init::Zeros)?;
            store.params[id.0].data = data;
        }
        if r.pos != bytes.len() {
            return Err(NeuralError::Checkpoint("trailing bytes".into()));
        }
        Ok((store, metadata, precision))
    }

    /// Copies values from `other` into parameters of the same name and
    /// shape. Errors if any parameter of `self` is missing from `other`.
    pub fn copy_values_from(&mut self, other: &ParamStore<T>) -> Result<(), NeuralError> {
        for p in &mut self.params {
            let src = other
                .id(&p.name)
                .map(|id| other.param(id))
                .ok_or_else(|| NeuralError::Checkpoint(format!("checkpoint lacks parameter '{}'", p.name)))?;
            if (src.rows, src.cols) != (p.rows, p.cols) {
                return Err(NeuralError::Checkpoint(format!(
                    "parameter '{}' is {}x{} in the checkpoint, expected {}x{}",
                    p.name, src.rows, src.cols, p.rows, p.cols
                )));
            }
            p.data.clone_from(&src.data);
        }
        Ok(())
    }
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    out.extend_from_slice(&(s.len() as u32).to_le_bytes());
    out.extend_from_slice(s.as_bytes());
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], NeuralError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| NeuralError::Checkpoint("truncated file".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, NeuralError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn string(&mut self) -> Result<String, NeuralError> {
        let n = self.u32()? as usize;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| NeuralError::Checkpoint("invalid UTF-8".into()))
    }
}
