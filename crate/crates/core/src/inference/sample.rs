use rand::Rng;

use crate::models::{DiscState, DiscriminativeModel, GenerativeModel, MOVE, NT_OFFSET, REDUCE};
use crate::neural::{Dropout, Graph, Real};
use crate::transition::Action;
use crate::treebank::Tree;

use super::{InferenceError, WeightedSample};

/// Draws an index from `log_probs` (entries of negative infinity are never
/// drawn) after raising the distribution to the power `alpha`. Returns the
/// index and its log-probability under the flattened distribution.
pub fn sample_index(log_probs: &[f64], alpha: f64, rng: &mut impl Rng) -> (usize, f64) {
    let max = log_probs
        .iter()
        .copied()
        .filter(|l| l.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    let scaled: Vec<f64> = log_probs.iter().map(|&l| alpha * (l - max)).collect();
    let z: f64 = scaled.iter().map(|s| s.exp()).sum();
    let lz = z.ln();
    let mut r = rng.gen::<f64>() * z;
    let mut last = 0;
    for (i, s) in scaled.iter().enumerate() {
        if !s.is_finite() {
            continue;
        }
        last = i;
        let p = s.exp();
        if r < p {
            return (i, s - lz);
        }
        r -= p;
    }
    (last, scaled[last] - lz)
}

fn parse_action<T: Real>(disc: &DiscriminativeModel<T>, index: usize) -> Action {
    match index {
        REDUCE => Action::Reduce,
        MOVE => Action::Shift,
        i => Action::Nt(disc.vocab().nonterminals.symbol(i - NT_OFFSET).to_string()),
    }
}

fn check_alpha(alpha: f64) -> Result<(), InferenceError> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(InferenceError::Alpha(alpha))
    }
}

/// Samples one parse from a started parser state. Nodes added to the
/// graph are discarded before returning.
pub(crate) fn sample_from<T: Real>(
    disc: &DiscriminativeModel<T>,
    g: &mut Graph<'_, T>,
    start: &DiscState,
    alpha: f64,
    rng: &mut impl Rng,
) -> Result<WeightedSample, InferenceError> {
    let mark = g.len();
    let mut st = start.clone();
    let mut log_q = 0.0;
    while !st.is_terminal() {
        let sc = disc.scores(g, &st, &mut Dropout::Off)?;
        let lps: Vec<f64> = g.value(sc.log_probs).iter().map(|v| v.as_f64()).collect();
        let (i, lq) = sample_index(&lps, alpha, rng);
        log_q += lq;
        st = disc.advance(g, &st, &parse_action(disc, i), &mut Dropout::Off)?;
    }
    let tree = st.algo().clone().into_tree()?;
    g.truncate(mark);
    Ok(WeightedSample { tree, log_q, log_p: None })
}

/// Ancestral sample y ~ q(y | x) with each step's distribution flattened
/// by `alpha`.
pub fn sample_parse<T: Real, S: AsRef<str>>(
    disc: &DiscriminativeModel<T>,
    sentence: &[S],
    alpha: f64,
    rng: &mut impl Rng,
) -> Result<WeightedSample, InferenceError> {
    check_alpha(alpha)?;
    let mut g = disc.graph();
    let st = disc.start(&mut g, sentence, &mut Dropout::Off)?;
    sample_from(disc, &mut g, &st, alpha, rng)
}

/// Applies the most probable valid action at every step (ties go to the
/// earliest action in inventory order).
pub fn greedy_parse<T: Real, S: AsRef<str>>(
    disc: &DiscriminativeModel<T>,
    sentence: &[S],
) -> Result<Tree, InferenceError> {
    let mut g = disc.graph();
    let mut st = disc.start(&mut g, sentence, &mut Dropout::Off)?;
    while !st.is_terminal() {
        let sc = disc.scores(&mut g, &st, &mut Dropout::Off)?;
        let best = sc.argmax(&g);
        st = disc.advance(&mut g, &st, &parse_action(disc, best), &mut Dropout::Off)?;
    }
    Ok(st.algo().clone().into_tree()?)
}

/// Ancestral sample (x, y) ~ p. At GEN a word class is drawn, then a word
/// within it.
pub fn generate<T: Real>(
    gen: &GenerativeModel<T>,
    rng: &mut impl Rng,
    max_steps: usize,
) -> Result<(Vec<String>, Tree), InferenceError> {
    if max_steps < 3 {
        return Err(InferenceError::TinyBudget(max_steps));
    }
    let mut g = gen.graph();
    let mut st = gen.start(&mut g);
    let mut actions = Vec::new();
    let words = gen.word_softmax();
    while !st.is_terminal() {
        if actions.len() == max_steps {
            return Err(InferenceError::StepBudget {
                max_steps,
                partial: actions,
            });
        }
        let sc = gen.scores(&mut g, &st, &mut Dropout::Off)?;
        let lps: Vec<f64> = g.value(sc.log_probs).iter().map(|v| v.as_f64()).collect();
        let (i, _) = sample_index(&lps, 1.0, rng);
        let action = match i {
            REDUCE => Action::Reduce,
            MOVE => {
                let cl = words.class_log_probs(&mut g, sc.u)?;
                let cl: Vec<f64> = g.value(cl).iter().map(|v| v.as_f64()).collect();
                let (c, _) = sample_index(&cl, 1.0, rng);
                let ml = words.member_log_probs(&mut g, sc.u, c)?;
                let ml: Vec<f64> = g.value(ml).iter().map(|v| v.as_f64()).collect();
                let (m, _) = sample_index(&ml, 1.0, rng);
                let w = words.classes().members(c)[m];
                Action::Gen(gen.vocab().terminals.symbol(w).to_string())
            }
            n => Action::Nt(gen.vocab().nonterminals.symbol(n - NT_OFFSET).to_string()),
        };
        st = gen.advance(&mut g, &st, &action, &mut Dropout::Off)?;
        actions.push(action);
    }
    let tree = st.algo().clone().into_tree()?;
    Ok((tree.leaves().iter().map(|s| s.to_string()).collect(), tree))
}
