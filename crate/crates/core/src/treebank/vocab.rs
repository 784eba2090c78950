use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::unk::{self, SingletonPolicy};
use super::{Tree, TreebankError};

/// An indexed set of strings; index assignment is a bijection.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct SymbolTable {
    symbols: Vec<String>,
    index: HashMap<String, usize>,
}

impl SymbolTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the index of `s`, adding it if absent.
    pub fn intern(&mut self, s: &str) -> usize {
        if let Some(&i) = self.index.get(s) {
            return i;
        }
        let i = self.symbols.len();
        self.symbols.push(s.to_string());
        self.index.insert(s.to_string(), i);
        i
    }

    pub fn get(&self, s: &str) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn contains(&self, s: &str) -> bool {
        self.index.contains_key(s)
    }

    pub fn symbol(&self, i: usize) -> &str {
        &self.symbols[i]
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.symbols.iter().map(String::as_str)
    }
}

impl From<Vec<String>> for SymbolTable {
    fn from(symbols: Vec<String>) -> Self {
        let mut t = SymbolTable::new();
        for s in &symbols {
            t.intern(s);
        }
        t
    }
}

impl From<SymbolTable> for Vec<String> {
    fn from(t: SymbolTable) -> Self {
        t.symbols
    }
}

impl<'a> FromIterator<&'a str> for SymbolTable {
    fn from_iter<I: IntoIterator<Item = &'a str>>(iter: I) -> Self {
        let mut t = SymbolTable::new();
        for s in iter {
            t.intern(s);
        }
        t
    }
}

/// Terminal and nonterminal inventories built from a training corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vocab {
    pub policy: SingletonPolicy,
    pub terminals: SymbolTable,
    pub nonterminals: SymbolTable,
    /// Training frequency of each terminal after unkification.
    pub counts: BTreeMap<String, usize>,
}

/// Builds the vocabulary. Words seen exactly once are replaced by UNK
/// tokens under `policy`; everything else is kept verbatim (case preserved,
/// numbers untouched).
pub fn build_vocab(corpus: &[Tree], policy: SingletonPolicy) -> Result<Vocab, TreebankError> {
    if corpus.is_empty() {
        return Err(TreebankError::EmptyCorpus);
    }
    let mut raw: HashMap<&str, usize> = HashMap::new();
    for t in corpus {
        for w in t.leaves() {
            *raw.entry(w).or_default() += 1;
        }
    }
    let known: HashSet<&str> = raw.iter().filter(|(_, &c)| c > 1).map(|(w, _)| *w).collect();

    let mut terminals = SymbolTable::new();
    let mut nonterminals = SymbolTable::new();
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for t in corpus {
        for label in t.labels() {
            nonterminals.intern(label);
        }
        for (pos, w) in t.leaves().into_iter().enumerate() {
            let tok = if known.contains(w) {
                w.to_string()
            } else {
                unk::signature(w, pos, policy, |lw| known.contains(lw))
            };
            terminals.intern(&tok);
            *counts.entry(tok).or_default() += 1;
        }
    }
    Ok(Vocab {
        policy,
        terminals,
        nonterminals,
        counts,
    })
}

impl Vocab {
    /// A closed vocabulary containing exactly the terminals of `corpus`,
    /// with no singleton mapping. Used when the corpus is already unkified.
    pub fn closed(corpus: &[Tree], policy: SingletonPolicy) -> Result<Vocab, TreebankError> {
        if corpus.is_empty() {
            return Err(TreebankError::EmptyCorpus);
        }
        let mut terminals = SymbolTable::new();
        let mut nonterminals = SymbolTable::new();
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        for t in corpus {
            for label in t.labels() {
                nonterminals.intern(label);
            }
            for w in t.leaves() {
                terminals.intern(w);
                *counts.entry(w.to_string()).or_default() += 1;
            }
        }
        Ok(Vocab {
            policy,
            terminals,
            nonterminals,
            counts,
        })
    }

    pub fn terminal_index(&self, token: &str) -> Option<usize> {
        self.terminals.get(token)
    }

    pub fn nonterminal_index(&self, label: &str) -> Option<usize> {
        self.nonterminals.get(label)
    }

    pub fn count(&self, token: &str) -> usize {
        self.counts.get(token).copied().unwrap_or(0)
    }

    /// Number of distinct UNK tokens in the vocabulary.
    pub fn unk_types(&self) -> usize {
        self.terminals.iter().filter(|t| unk::is_unk_token(t)).count()
    }

    fn is_known_word(&self, w: &str) -> bool {
        self.terminals.contains(w) && !unk::is_unk_token(w)
    }

    /// Maps `word` to a vocabulary token. Known words map to themselves.
    /// Unknown words map to the most specific UNK signature present in the
    /// vocabulary; if none of its back-offs is present the full signature is
    /// returned (and will not resolve to an index).
    pub fn unkify(&self, word: &str, position: usize) -> String {
        if self.terminals.contains(word) {
            return word.to_string();
        }
        let sig = unk::signature(word, position, self.policy, |lw| self.is_known_word(lw));
        let found = unk::backoffs(&sig).find(|s| self.terminals.contains(s)).map(str::to_string);
        found.unwrap_or(sig)
    }

    pub fn unkify_sentence<S: AsRef<str>>(&self, words: &[S]) -> Vec<String> {
        words
            .iter()
            .enumerate()
            .map(|(i, w)| self.unkify(w.as_ref(), i))
            .collect()
    }

    pub fn unkify_tree(&self, tree: &Tree) -> Tree {
        tree.map_leaves(|pos, w| self.unkify(w, pos))
    }
}
