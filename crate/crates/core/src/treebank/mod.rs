//! Bracketed treebank I/O and preprocessing: preterminal stripping,
//! vocabulary construction with unknown-word mapping, word classes and
//! corpus statistics.

mod classes;
pub mod pcfg;
mod reader;
mod stats;
mod tree;
pub mod unk;
mod vocab;

pub use classes::{
    assign_word_classes, classes_from_file, default_num_classes, frequency_binned, WordClasses,
};
pub use reader::{parse_bracketed, parse_tree, write_bracketed};
pub use stats::{corpus_stats, format_stats_table, CorpusStats};
pub use tree::{strip_preterminals, Tree};
pub use unk::SingletonPolicy;
pub use vocab::{build_vocab, SymbolTable, Vocab};

#[derive(Debug, thiserror::Error)]
pub enum TreebankError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported label '{label}' at line {line}, column {column} (strip function tags and traces first)")]
    UnsupportedLabel {
        label: String,
        line: usize,
        column: usize,
    },
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("cluster file has no entry for terminal '{0}'")]
    ClusterMissing(String),
    #[error("cluster file line {line}: {message}")]
    ClusterFormat { line: usize, message: String },
    #[error("grammar line {line}: {message}")]
    Grammar { line: usize, message: String },
}
