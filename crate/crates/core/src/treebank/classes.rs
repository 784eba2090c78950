use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{TreebankError, Vocab};

/// A partition of the terminal indices into word classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<usize>", into = "Vec<usize>")]
pub struct WordClasses {
    class_of: Vec<usize>,
    members: Vec<Vec<usize>>,
    /// Position of each terminal inside its class's member list.
    offset: Vec<usize>,
}

impl WordClasses {
    /// Builds the partition from a class id per terminal. Class ids must be
    /// dense (`0..k`, each used at least once).
    pub fn from_assignment(class_of: Vec<usize>) -> Self {
        let k = class_of.iter().map(|c| c + 1).max().unwrap_or(0);
        let mut members = vec![Vec::new(); k];
        let mut offset = vec![0; class_of.len()];
        for (w, &c) in class_of.iter().enumerate() {
            offset[w] = members[c].len();
            members[c].push(w);
        }
        assert!(members.iter().all(|m| !m.is_empty()), "class ids must be dense");
        Self {
            class_of,
            members,
            offset,
        }
    }

    /// Every terminal in one class.
    pub fn single(num_terminals: usize) -> Self {
        Self::from_assignment(vec![0; num_terminals])
    }

    pub fn num_classes(&self) -> usize {
        self.members.len()
    }

    pub fn num_terminals(&self) -> usize {
        self.class_of.len()
    }

    pub fn class_of(&self, terminal: usize) -> usize {
        self.class_of[terminal]
    }

    pub fn members(&self, class: usize) -> &[usize] {
        &self.members[class]
    }

    /// Index of `terminal` within `members(class_of(terminal))`.
    pub fn offset_in_class(&self, terminal: usize) -> usize {
        self.offset[terminal]
    }

    /// Adds one terminal (index `num_terminals()`) as a singleton class.
    pub fn with_extra_singleton(&self) -> Self {
        let mut class_of = self.class_of.clone();
        class_of.push(self.num_classes());
        Self::from_assignment(class_of)
    }
}

impl From<Vec<usize>> for WordClasses {
    fn from(v: Vec<usize>) -> Self {
        Self::from_assignment(v)
    }
}

impl From<WordClasses> for Vec<usize> {
    fn from(w: WordClasses) -> Self {
        w.class_of
    }
}

/// Default class count: ceil(sqrt(|terminals|)).
pub fn default_num_classes(num_terminals: usize) -> usize {
    let mut k = (num_terminals as f64).sqrt().ceil() as usize;
    // guard against floating error on perfect squares
    while k > 1 && (k - 1) * (k - 1) >= num_terminals {
        k -= 1;
    }
    while k * k < num_terminals {
        k += 1;
    }
    k.max(1)
}

/// Reads classes from a cluster file (`word<TAB>class-id` per line) when
/// given; otherwise falls back to frequency binning with the default class
/// count.
pub fn assign_word_classes(vocab: &Vocab, external: Option<&str>) -> Result<WordClasses, TreebankError> {
    match external {
        Some(text) => classes_from_file(vocab, text),
        None => Ok(frequency_binned(vocab, default_num_classes(vocab.terminals.len()))),
    }
}

/// Parses a cluster file. Class ids are arbitrary strings (Brown cluster
/// bit strings work); they are densified in order of first appearance among
/// vocabulary terminals. Words absent from the vocabulary are ignored.
pub fn classes_from_file(vocab: &Vocab, text: &str) -> Result<WordClasses, TreebankError> {
    let mut cluster: HashMap<&str, &str> = HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split('\t');
        let (Some(word), Some(class), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(TreebankError::ClusterFormat {
                line: lineno + 1,
                message: "expected '<word>\\t<class-id>'".into(),
            });
        };
        cluster.insert(word, class.trim());
    }
    let mut dense: HashMap<&str, usize> = HashMap::new();
    let mut class_of = Vec::with_capacity(vocab.terminals.len());
    for w in vocab.terminals.iter() {
        let Some(c) = cluster.get(w) else {
            return Err(TreebankError::ClusterMissing(w.to_string()));
        };
        let next = dense.len();
        class_of.push(*dense.entry(c).or_insert(next));
    }
    Ok(WordClasses::from_assignment(class_of))
}

/// Sorts terminals by descending training count (ties by index) and cuts
/// the sorted list into `k` contiguous bins of near-equal total frequency.
/// A bin closes once its cumulative mass reaches its share of the total;
/// every bin receives at least one terminal.
pub fn frequency_binned(vocab: &Vocab, k: usize) -> WordClasses {
    let n = vocab.terminals.len();
    let k = k.clamp(1, n.max(1));
    let mut order: Vec<usize> = (0..n).collect();
    let count = |i: usize| vocab.count(vocab.terminals.symbol(i)).max(1);
    order.sort_by(|&a, &b| count(b).cmp(&count(a)).then(a.cmp(&b)));
    let total: usize = order.iter().map(|&i| count(i)).sum();

    let mut class_of = vec![0; n];
    let mut bin = 0;
    let mut cum = 0usize;
    for (pos, &w) in order.iter().enumerate() {
        class_of[w] = bin;
        cum += count(w);
        let remaining_items = n - pos - 1;
        let remaining_bins = k - bin - 1;
        if remaining_bins == 0 {
            continue;
        }
        // cum / total >= (bin + 1) / k, in integers
        let reached = cum * k >= (bin + 1) * total;
        if reached || remaining_items == remaining_bins {
            bin += 1;
        }
    }
    WordClasses::from_assignment(class_of)
}
