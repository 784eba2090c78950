//! Exhaustive enumeration for toy-sized inventories. Cost is exponential;
//! these exist to check normalization and sampling against exact values.

use crate::models::{DiscState, DiscriminativeModel, GenState, GenerativeModel, MOVE, NT_OFFSET, REDUCE};
use crate::neural::{Dropout, Graph, Real};
use crate::transition::{all_parses, Action, AlgoState};
use crate::treebank::Tree;

use super::{log_sum_exp, InferenceError};

/// Every parse of `sentence` reachable under the parser's cap with its
/// probability q(y | x).
pub fn parse_distribution<T: Real, S: AsRef<str>>(
    disc: &DiscriminativeModel<T>,
    sentence: &[S],
) -> Result<Vec<(Tree, f64)>, InferenceError> {
    let mut g = disc.graph();
    let st = disc.start(&mut g, sentence, &mut Dropout::Off)?;
    let mut out = Vec::new();
    walk_parses(disc, &mut g, &st, 0.0, &mut out)?;
    Ok(out)
}

fn walk_parses<T: Real>(
    disc: &DiscriminativeModel<T>,
    g: &mut Graph<'_, T>,
    st: &DiscState,
    lp: f64,
    out: &mut Vec<(Tree, f64)>,
) -> Result<(), InferenceError> {
    if st.is_terminal() {
        out.push((st.algo().clone().into_tree()?, lp));
        return Ok(());
    }
    let mark = g.len();
    let sc = disc.scores(g, st, &mut Dropout::Off)?;
    let lps: Vec<f64> = g.value(sc.log_probs).iter().map(|v| v.as_f64()).collect();
    let after = g.len();
    for (i, &l) in lps.iter().enumerate() {
        if l == f64::NEG_INFINITY {
            continue;
        }
        let a = match i {
            REDUCE => Action::Reduce,
            MOVE => Action::Shift,
            n => Action::Nt(disc.vocab().nonterminals.symbol(n - NT_OFFSET).to_string()),
        };
        let next = disc.advance(g, st, &a, &mut Dropout::Off)?;
        walk_parses(disc, g, &next, lp + l, out)?;
        g.truncate(after);
    }
    g.truncate(mark);
    Ok(())
}

/// log of the exact marginal p(x) = sum over every parse y of p(x, y),
/// where parses range over the generator's nonterminals and cap.
pub fn exact_log_marginal<T: Real, S: AsRef<str>>(
    gen: &GenerativeModel<T>,
    sentence: &[S],
) -> Result<f64, InferenceError> {
    let nts: Vec<&str> = gen.vocab().nonterminals.iter().collect();
    let trees = all_parses(sentence, &nts, gen.config().max_open_nts)?;
    let lps = trees
        .iter()
        .map(|t| gen.tree_log_prob(t))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(log_sum_exp(&lps))
}

/// Totals over all complete generator derivations of at most `max_len`
/// actions.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GenerationMass {
    /// Sum of p(x, y).
    pub total: f64,
    pub derivations: u64,
    /// Partial derivations expanded (states whose distribution was scored).
    pub expanded: u64,
}

/// Fewest actions that can complete a generator derivation once `action`
/// is applied to `algo`. A new open NT needs a GEN and every open NT a
/// REDUCE.
fn min_remaining_after(algo: &AlgoState, action: &Action) -> usize {
    let n = algo.open_nts();
    match action {
        Action::Nt(_) => n + 2,
        Action::Gen(_) | Action::Shift => n,
        Action::Reduce => n - 1,
    }
}

/// Enumerates every complete derivation of at most `max_len` actions and
/// sums their probabilities. Partial derivations that cannot finish within
/// the budget are pruned.
pub fn generation_mass<T: Real>(gen: &GenerativeModel<T>, max_len: usize) -> Result<GenerationMass, InferenceError> {
    let mut g = gen.graph();
    let st = gen.start(&mut g);
    let mut acc = GenerationMass::default();
    if max_len >= 3 {
        walk(gen, &mut g, &st, 0.0, max_len, &mut acc, &mut None)?;
    }
    Ok(acc)
}

/// Every complete derivation of at most `max_len` actions with its log
/// probability.
pub fn generation_list<T: Real>(
    gen: &GenerativeModel<T>,
    max_len: usize,
) -> Result<Vec<(Tree, f64)>, InferenceError> {
    let mut g = gen.graph();
    let st = gen.start(&mut g);
    let mut out = Vec::new();
    let mut acc = GenerationMass::default();
    if max_len >= 3 {
        walk(gen, &mut g, &st, 0.0, max_len, &mut acc, &mut Some(&mut out))?;
    }
    Ok(out)
}

fn walk<T: Real>(
    gen: &GenerativeModel<T>,
    g: &mut Graph<'_, T>,
    st: &GenState,
    lp: f64,
    max_len: usize,
    acc: &mut GenerationMass,
    list: &mut Option<&mut Vec<(Tree, f64)>>,
) -> Result<(), InferenceError> {
    if st.is_terminal() {
        acc.total += lp.exp();
        acc.derivations += 1;
        if let Some(l) = list {
            l.push((st.algo().clone().into_tree()?, lp));
        }
        return Ok(());
    }
    acc.expanded += 1;
    let mark = g.len();
    let sc = gen.scores(g, st, &mut Dropout::Off)?;
    let lps: Vec<f64> = g.value(sc.log_probs).iter().map(|v| v.as_f64()).collect();
    let word_lps = if lps[MOVE].is_finite() {
        gen.word_softmax().all_log_probs(g, sc.u)?
    } else {
        Vec::new()
    };
    let after = g.len();
    let steps = st.algo().steps();
    let vocab = gen.vocab();
    let mut children: Vec<(Action, f64)> = Vec::new();
    if lps[REDUCE].is_finite() {
        children.push((Action::Reduce, lps[REDUCE]));
    }
    for (w, l) in word_lps.iter().enumerate() {
        children.push((Action::Gen(vocab.terminals.symbol(w).to_string()), lps[MOVE] + l));
    }
    for (k, l) in lps.iter().enumerate().skip(NT_OFFSET) {
        if l.is_finite() {
            children.push((Action::Nt(vocab.nonterminals.symbol(k - NT_OFFSET).to_string()), *l));
        }
    }
    for (a, l) in children {
        if steps + 1 + min_remaining_after(st.algo(), &a) > max_len {
            continue;
        }
        let next = gen.advance(g, st, &a, &mut Dropout::Off)?;
        walk(gen, g, &next, lp + l, max_len, acc, list)?;
        g.truncate(after);
    }
    g.truncate(mark);
    Ok(())
}
