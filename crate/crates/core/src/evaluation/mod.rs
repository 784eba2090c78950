//! Labeled-bracket scoring.
//!
//! Every internal node contributes one `(label, start, end)` bracket,
//! including the root. Unary chains produce repeated brackets, which are
//! kept as multiset entries. Counts are micro-averaged over the corpus.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::treebank::Tree;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("gold has {gold} trees, predictions have {pred}")]
    Length { gold: usize, pred: usize },
    #[error("sentence {index}: yields differ")]
    Yield { index: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bracket {
    pub label: String,
    pub start: usize,
    pub end: usize,
}

/// Brackets of `tree` in pre-order. Zero-width nodes are skipped.
pub fn brackets(tree: &Tree) -> Vec<Bracket> {
    let mut out = Vec::new();
    collect(tree, 0, &mut out);
    out
}

fn collect(tree: &Tree, start: usize, out: &mut Vec<Bracket>) -> usize {
    match tree {
        Tree::Leaf(_) => start + 1,
        Tree::Internal { label, children } => {
            let slot = out.len();
            out.push(Bracket {
                label: label.clone(),
                start,
                end: start,
            });
            let mut end = start;
            for c in children {
                end = collect(c, end, out);
            }
            if end == start {
                out.remove(slot);
            } else {
                out[slot].end = end;
            }
            end
        }
    }
}

/// Size of the multiset intersection.
pub fn matched(gold: &[Bracket], pred: &[Bracket]) -> usize {
    let mut counts: HashMap<&Bracket, usize> = HashMap::new();
    for b in gold {
        *counts.entry(b).or_default() += 1;
    }
    let mut m = 0;
    for b in pred {
        if let Some(c) = counts.get_mut(b) {
            if *c > 0 {
                *c -= 1;
                m += 1;
            }
        }
    }
    m
}

/// Bracket counts for one sentence or a whole corpus.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counts {
    pub matched: usize,
    pub gold: usize,
    pub pred: usize,
}

impl Counts {
    pub fn of(gold: &Tree, pred: &Tree) -> Counts {
        let g = brackets(gold);
        let p = brackets(pred);
        Counts {
            matched: matched(&g, &p),
            gold: g.len(),
            pred: p.len(),
        }
    }

    /// Precision in percent; 0 when nothing was predicted.
    pub fn precision(&self) -> f64 {
        percent(self.matched, self.pred)
    }

    pub fn recall(&self) -> f64 {
        percent(self.matched, self.gold)
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }

    pub fn is_exact(&self) -> bool {
        self.matched == self.gold && self.matched == self.pred
    }
}

impl std::ops::AddAssign for Counts {
    fn add_assign(&mut self, o: Counts) {
        self.matched += o.matched;
        self.gold += o.gold;
        self.pred += o.pred;
    }
}

fn percent(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

/// Rounds a percentage to one decimal, as reported.
pub fn round1(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scores {
    pub total: Counts,
    pub sentences: Vec<Counts>,
}

impl Scores {
    pub fn precision(&self) -> f64 {
        round1(self.total.precision())
    }

    pub fn recall(&self) -> f64 {
        round1(self.total.recall())
    }

    pub fn f1(&self) -> f64 {
        round1(self.total.f1())
    }

    /// Fraction of sentences (in percent) whose brackets match exactly.
    pub fn exact_match(&self) -> f64 {
        let exact = self.sentences.iter().filter(|c| c.is_exact()).count();
        round1(percent(exact, self.sentences.len()))
    }
}

/// Corpus-level precision, recall and F1.
pub fn f1(gold: &[Tree], pred: &[Tree]) -> Result<Scores, EvalError> {
    if gold.len() != pred.len() {
        return Err(EvalError::Length {
            gold: gold.len(),
            pred: pred.len(),
        });
    }
    let mut total = Counts::default();
    let mut sentences = Vec::with_capacity(gold.len());
    for (index, (g, p)) in gold.iter().zip(pred).enumerate() {
        if g.leaves() != p.leaves() {
            return Err(EvalError::Yield { index });
        }
        let c = Counts::of(g, p);
        total += c;
        sentences.push(c);
    }
    Ok(Scores { total, sentences })
}

/// Plain-text table, one row per named corpus.
pub fn format_report(rows: &[(String, Scores)]) -> String {
    let width = rows.iter().map(|(n, _)| n.len()).max().unwrap_or(0).max(6);
    let mut out = format!(
        "{:<width$}  {:>5}  {:>6}  {:>6}  {:>6}  {:>6}\n",
        "corpus", "sents", "P", "R", "F1", "exact"
    );
    for (name, s) in rows {
        let _ = writeln!(
            out,
            "{:<width$}  {:>5}  {:>6.1}  {:>6.1}  {:>6.1}  {:>6.1}",
            name,
            s.sentences.len(),
            s.precision(),
            s.recall(),
            s.f1(),
            s.exact_match()
        );
    }
    out
}

/// Tab-separated per-sentence counts with a header line.
pub fn format_sentence_tsv(scores: &Scores) -> String {
    let mut out = String::from("id\tmatched\tgold\tpred\tP\tR\tF1\n");
    for (i, c) in scores.sentences.iter().enumerate() {
        let _ = writeln!(
            out,
            "{i}\t{}\t{}\t{}\t{:.1}\t{:.1}\t{:.1}",
            c.matched,
            c.gold,
            c.pred,
            c.precision(),
            c.recall(),
            c.f1()
        );
    }
    out
}
