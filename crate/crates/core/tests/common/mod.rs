#![allow(dead_code)]

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rnng::models::{DiscriminativeModel, GenerativeModel, LstmLm, ModelConfig};
use rnng::neural::{ParamStore, Real};
use rnng::treebank::{parse_tree, SingletonPolicy, Tree, Vocab, WordClasses};

/// A closed vocabulary with exactly these terminals and nonterminals, in
/// this order.
pub fn toy_vocab(words: &[&str], nts: &[&str]) -> Vocab {
    let leaves = words.join(" ");
    let mut text = String::new();
    for nt in nts {
        text.push_str(&format!("({nt} "));
    }
    text.push_str(&leaves);
    text.push_str(&")".repeat(nts.len()));
    Vocab::closed(&[parse_tree(&text).unwrap()], SingletonPolicy::SingleUnk).unwrap()
}

pub fn zero<T: Real>(store: &mut ParamStore<T>) {
    for id in store.ids().collect::<Vec<_>>() {
        store.param_mut(id).data.iter_mut().for_each(|v| *v = T::zero());
    }
}

/// Overwrites every parameter with uniform(-scale, scale) draws.
pub fn randomize<T: Real>(store: &mut ParamStore<T>, seed: u64, scale: f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for id in store.ids().collect::<Vec<_>>() {
        store
            .param_mut(id)
            .data
            .iter_mut()
            .for_each(|v| *v = T::of(rng.gen_range(-scale..scale)));
    }
}

pub fn config(dim: usize, cap: usize) -> ModelConfig {
    ModelConfig {
        max_open_nts: cap,
        ..ModelConfig::tiny(dim)
    }
}

pub fn gen_model(words: &[&str], nts: &[&str], dim: usize, cap: usize, seed: u64) -> GenerativeModel<f64> {
    let vocab = toy_vocab(words, nts);
    let classes = WordClasses::single(vocab.terminals.len());
    let mut m = GenerativeModel::new(config(dim, cap), vocab, classes).unwrap();
    randomize(m.store_mut(), seed, 0.8);
    m
}

pub fn disc_model(words: &[&str], nts: &[&str], dim: usize, cap: usize, seed: u64) -> DiscriminativeModel<f64> {
    let vocab = toy_vocab(words, nts);
    let mut m = DiscriminativeModel::new(config(dim, cap), vocab).unwrap();
    randomize(m.store_mut(), seed, 0.8);
    m
}

pub fn lm_model(words: &[&str], dim: usize, seed: u64) -> LstmLm<f64> {
    let vocab = toy_vocab(words, &["X"]);
    let classes = WordClasses::single(vocab.terminals.len());
    let mut m = LstmLm::new(config(dim, 100), vocab, classes).unwrap();
    randomize(m.store_mut(), seed, 0.8);
    m
}

pub fn tree(s: &str) -> Tree {
    parse_tree(s).unwrap()
}

pub fn words(s: &str) -> Vec<String> {
    s.split_whitespace().map(String::from).collect()
}

pub const HUNGRY_CAT: &str = "(S (NP The hungry cat) (VP meows) .)";

pub const NTS: [&str; 3] = ["S", "NP", "VP"];
pub const WORDS: [&str; 3] = ["a", "b", "c"];

/// Random trees over `NTS` and `WORDS` with an internal root.
pub fn arb_tree() -> impl Strategy<Value = Tree> {
    let leaf = prop::sample::select(&WORDS[..]).prop_map(Tree::leaf);
    let subtree = leaf.prop_recursive(4, 24, 4, |inner| {
        (prop::sample::select(&NTS[..]), prop::collection::vec(inner, 1..4)).prop_map(|(l, c)| Tree::node(l, c))
    });
    (prop::sample::select(&NTS[..]), prop::collection::vec(subtree, 1..4)).prop_map(|(l, c)| Tree::node(l, c))
}
