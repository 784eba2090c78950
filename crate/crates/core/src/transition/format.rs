//! Oracle file format.
//!
//! One block per derivation, blocks separated by one blank line:
//!
//! ```text
//! The hungry cat meows .
//! The hungry cat meows .
//! NT(S)
//! NT(NP)
//! SHIFT
//! ...
//! REDUCE
//!
//! ```
//!
//! Line 1 is the raw sentence, line 2 the unkified sentence (tokens joined
//! by single spaces), then one action per line. Every line, including the
//! last action, ends in `\n`, and every block is followed by an empty line.

use super::{execute, Action, Mode, TransitionError};
use crate::treebank::Tree;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleEntry {
    pub raw: Vec<String>,
    pub unkified: Vec<String>,
    pub actions: Vec<Action>,
}

impl OracleEntry {
    /// Parse mode if the derivation shifts, generate mode if it generates.
    pub fn mode(&self) -> Mode {
        if self.actions.iter().any(|a| matches!(a, Action::Gen(_))) {
            Mode::Generate
        } else {
            Mode::Parse
        }
    }

    /// Rebuilds the tree: parse-mode derivations shift the raw sentence,
    /// generate-mode derivations use the generated (unkified) words.
    pub fn replay(&self) -> Result<Tree, TransitionError> {
        match self.mode() {
            Mode::Parse => execute(&self.actions, Mode::Parse, Some(&self.raw)),
            Mode::Generate => execute::<&str>(&self.actions, Mode::Generate, None),
        }
    }
}

pub fn write_oracle(entries: &[OracleEntry]) -> String {
    let mut out = String::new();
    for e in entries {
        out.push_str(&e.raw.join(" "));
        out.push('\n');
        out.push_str(&e.unkified.join(" "));
        out.push('\n');
        for a in &e.actions {
            out.push_str(&a.to_string());
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

pub fn read_oracle(text: &str) -> Result<Vec<OracleEntry>, TransitionError> {
    let mut entries = Vec::new();
    let mut lines = text.lines().enumerate().peekable();
    loop {
        while lines.peek().is_some_and(|(_, l)| l.trim().is_empty()) {
            lines.next();
        }
        let Some((_, raw)) = lines.next() else { break };
        let Some((ln, unk)) = lines.next() else {
            return Err(TransitionError::Format {
                line: text.lines().count(),
                message: "block ends after the raw sentence".into(),
            });
        };
        let raw: Vec<String> = raw.split_whitespace().map(String::from).collect();
        let unkified: Vec<String> = unk.split_whitespace().map(String::from).collect();
        if raw.len() != unkified.len() {
            return Err(TransitionError::Format {
                line: ln + 1,
                message: format!("unkified sentence has {} tokens, raw has {}", unkified.len(), raw.len()),
            });
        }
        let mut actions = Vec::new();
        while let Some((ln, l)) = lines.next_if(|(_, l)| !l.trim().is_empty()) {
            let a = l.trim().parse::<Action>().map_err(|_| TransitionError::Format {
                line: ln + 1,
                message: format!("bad action '{l}'"),
            })?;
            actions.push(a);
        }
        let shifts = actions.iter().any(|a| matches!(a, Action::Shift));
        let gens = actions.iter().any(|a| matches!(a, Action::Gen(_)));
        if shifts && gens {
            return Err(TransitionError::Format {
                line: ln + 1,
                message: "derivation mixes SHIFT and GEN".into(),
            });
        }
        entries.push(OracleEntry { raw, unkified, actions });
    }
    Ok(entries)
}
