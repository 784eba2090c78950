//! Probabilistic context-free grammars for sampling synthetic treebanks.
//!
//! Grammar text has one rule per line, `LHS -> RHS... weight`. Symbols that
//! never appear on a left-hand side are terminals. The first rule's LHS is
//! the start symbol. `#` starts a comment.

use std::collections::HashMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{strip_preterminals, Tree, TreebankError};

#[derive(Debug, Clone)]
struct Expansions {
    rhs: Vec<Vec<String>>,
    pick: WeightedIndex<f64>,
}

#[derive(Debug, Clone)]
pub struct Pcfg {
    start: String,
    rules: HashMap<String, Expansions>,
}

pub const TOY_GRAMMAR: &str = "\
S -> NP VP PUNCT 0.8
S -> NP VP 0.2
NP -> DT NN 0.45
NP -> DT JJ NN 0.2
NP -> NP PP 0.15
NP -> PRP 0.1
NP -> NNP 0.1
VP -> VBI 0.3
VP -> VBT NP 0.4
VP -> VBT NP PP 0.1
VP -> VBS SBAR 0.1
VP -> VP CC VP 0.1
PP -> IN NP 1
SBAR -> COMP S 1
DT -> the 5
DT -> a 3
DT -> every 1
NN -> cat 6
NN -> dog 5
NN -> bird 3
NN -> child 3
NN -> teacher 2
NN -> park 2
NN -> house 2
NN -> garden 1
NN -> book 1
NN -> telescope 1
JJ -> hungry 3
JJ -> small 2
JJ -> old 2
JJ -> happy 1
JJ -> red 1
PRP -> she 2
PRP -> he 2
PRP -> they 1
NNP -> Alice 2
NNP -> Bob 1
NNP -> Paris 1
VBI -> meows 3
VBI -> sleeps 3
VBI -> runs 2
VBI -> laughs 1
VBT -> sees 4
VBT -> likes 3
VBT -> finds 2
VBT -> reads 1
VBS -> thinks 2
VBS -> says 2
VBS -> believes 1
IN -> in 3
IN -> with 3
IN -> near 1
IN -> on 2
COMP -> that 1
CC -> and 1
PUNCT -> . 1
";

impl Pcfg {
    pub fn parse(text: &str) -> Result<Pcfg, TreebankError> {
        let mut start = None;
        let mut raw: Vec<(String, Vec<(Vec<String>, f64)>)> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: &str| TreebankError::Grammar {
                line: i + 1,
                message: message.into(),
            };
            let (lhs, rest) = line.split_once("->").ok_or_else(|| err("expected 'LHS -> RHS weight'"))?;
            let lhs = lhs.trim();
            let mut rhs: Vec<String> = rest.split_whitespace().map(String::from).collect();
            let weight: f64 = rhs
                .pop()
                .and_then(|w| w.parse().ok())
                .ok_or_else(|| err("rule must end with a numeric weight"))?;
            if lhs.is_empty() || lhs.contains(char::is_whitespace) || rhs.is_empty() {
                return Err(err("rule needs one LHS symbol and a non-empty RHS"));
            }
            if !(weight > 0.0 && weight.is_finite()) {
                return Err(err("weight must be positive"));
            }
            start.get_or_insert_with(|| lhs.to_string());
            match raw.iter_mut().find(|(l, _)| l == lhs) {
                Some((_, v)) => v.push((rhs, weight)),
                None => raw.push((lhs.to_string(), vec![(rhs, weight)])),
            }
        }
        let start = start.ok_or(TreebankError::Grammar {
            line: 0,
            message: "grammar has no rules".into(),
        })?;
        let rules = raw
            .into_iter()
            .map(|(lhs, alts)| {
                let pick = WeightedIndex::new(alts.iter().map(|(_, w)| *w)).expect("weights checked positive");
                let rhs = alts.into_iter().map(|(r, _)| r).collect();
                (lhs, Expansions { rhs, pick })
            })
            .collect();
        Ok(Pcfg { start, rules })
    }

    /// The built-in English-like grammar.
    pub fn toy() -> Pcfg {
        Pcfg::parse(TOY_GRAMMAR).expect("built-in grammar parses")
    }

    pub fn start(&self) -> &str {
        &self.start
    }

    pub fn is_nonterminal(&self, symbol: &str) -> bool {
        self.rules.contains_key(symbol)
    }

    /// One derivation from the start symbol, or `None` if it would nest
    /// deeper than `max_depth`.
    pub fn sample(&self, rng: &mut impl Rng, max_depth: usize) -> Option<Tree> {
        self.expand(&self.start, rng, max_depth)
    }

    fn expand(&self, symbol: &str, rng: &mut impl Rng, depth: usize) -> Option<Tree> {
        let Some(e) = self.rules.get(symbol) else {
            return Some(Tree::leaf(symbol));
        };
        if depth == 0 {
            return None;
        }
        let rhs = &e.rhs[e.pick.sample(rng)];
        let children = rhs.iter().map(|s| self.expand(s, rng, depth - 1)).collect::<Option<Vec<_>>>()?;
        Some(Tree::node(symbol, children))
    }

    /// `n` trees with preterminals stripped, rejecting derivations deeper
    /// than `max_depth` or longer than `max_len` words.
    pub fn sample_corpus(&self, n: usize, seed: u64, max_depth: usize, max_len: usize) -> Vec<Tree> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            if let Some(t) = self.sample(&mut rng, max_depth) {
                if t.leaf_count() <= max_len {
                    out.push(strip_preterminals(&t));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toy_grammar_samples_sentences() {
        let g = Pcfg::toy();
        assert_eq!(g.start(), "S");
        let corpus = g.sample_corpus(200, 7, 12, 25);
        assert_eq!(corpus.len(), 200);
        for t in &corpus {
            assert_eq!(t.label(), "S");
            assert!(t.leaf_count() <= 25);
            assert!(t.leaves().iter().all(|w| !g.is_nonterminal(w)));
            // the preterminal layer is gone
            assert!(t.labels().iter().all(|l| !matches!(*l, "DT" | "NN" | "PUNCT")));
        }
        assert_eq!(g.sample_corpus(20, 7, 12, 25), g.sample_corpus(20, 7, 12, 25));
    }

    #[test]
    fn single_rule_is_deterministic() {
        let g = Pcfg::parse("X -> a b 1\n").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(g.sample(&mut rng, 3).unwrap().to_string(), "(X a b)");
        assert!(g.sample(&mut rng, 0).is_none());
    }

    #[test]
    fn rule_frequencies_follow_weights() {
        let g = Pcfg::parse("X -> a 3\nX -> b 1\n").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 20_000;
        let a = (0..n).filter(|_| g.sample(&mut rng, 2).unwrap().leaves() == ["a"]).count();
        let p = a as f64 / n as f64;
        let sd = (0.75 * 0.25 / n as f64).sqrt();
        assert!((p - 0.75).abs() < 4.0 * sd, "{p}");
    }

    #[test]
    fn malformed_grammars() {
        for bad in ["X a 1", "X -> a", "X -> a -1", "-> a 1", ""] {
            assert!(Pcfg::parse(bad).is_err(), "{bad:?}");
        }
    }
}
