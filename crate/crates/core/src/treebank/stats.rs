use std::collections::HashSet;

use super::unk::is_unk_token;
use super::Tree;

/// Size statistics of a (preprocessed) corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CorpusStats {
    pub sequences: usize,
    pub tokens: usize,
    pub types: usize,
    pub unk_types: usize,
}

/// Counts sequences, tokens, word types and UNK types. Pass an unkified
/// corpus to get post-unkification numbers.
pub fn corpus_stats(corpus: &[Tree]) -> CorpusStats {
    let mut types: HashSet<&str> = HashSet::new();
    let mut tokens = 0;
    for t in corpus {
        for w in t.leaves() {
            tokens += 1;
            types.insert(w);
        }
    }
    CorpusStats {
        sequences: corpus.len(),
        tokens,
        unk_types: types.iter().filter(|w| is_unk_token(w)).count(),
        types: types.len(),
    }
}

/// Renders named statistics as an aligned plain-text table, one column per
/// corpus.
pub fn format_stats_table(columns: &[(String, CorpusStats)]) -> String {
    let rows: [(&str, fn(&CorpusStats) -> usize); 4] = [
        ("Sequences", |s| s.sequences),
        ("Tokens", |s| s.tokens),
        ("Types", |s| s.types),
        ("UNK-Types", |s| s.unk_types),
    ];
    let mut cells: Vec<Vec<String>> = Vec::new();
    let mut header = vec![String::new()];
    header.extend(columns.iter().map(|(n, _)| n.clone()));
    cells.push(header);
    for (name, get) in rows {
        let mut row = vec![name.to_string()];
        row.extend(columns.iter().map(|(_, s)| group_thousands(get(s))));
        cells.push(row);
    }
    let ncols = cells[0].len();
    let widths: Vec<usize> = (0..ncols)
        .map(|c| cells.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &cells {
        let mut line = format!("{:<w$}", row[0], w = widths[0]);
        for c in 1..ncols {
            line.push_str(&format!("  {:>w$}", row[c], w = widths[c]));
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

fn group_thousands(n: usize) -> String {
    let s = n.to_string();
    let mut out = String::new();
    for (i, ch) in s.chars().enumerate() {
        if i > 0 && (s.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(ch);
    }
    out
}
