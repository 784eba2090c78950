use std::fmt;
use std::str::FromStr;

use super::TransitionError;

/// Which transition table is in force.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Consume an input buffer with SHIFT.
    Parse,
    /// Emit terminals with GEN.
    Generate,
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "parse" => Ok(Mode::Parse),
            "generate" | "gen" => Ok(Mode::Generate),
            other => Err(format!("unknown mode '{other}' (expected parse or generate)")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Parse => "parse",
            Mode::Generate => "generate",
        })
    }
}

/// A transition. `Shift` is parser-only and `Gen` generator-only.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Nt(String),
    Shift,
    Gen(String),
    Reduce,
}

impl Action {
    pub fn nt(label: impl Into<String>) -> Self {
        Action::Nt(label.into())
    }

    pub fn gen(word: impl Into<String>) -> Self {
        Action::Gen(word.into())
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Nt(x) => write!(f, "NT({x})"),
            Action::Shift => f.write_str("SHIFT"),
            Action::Gen(w) => write!(f, "GEN({w})"),
            Action::Reduce => f.write_str("REDUCE"),
        }
    }
}

impl FromStr for Action {
    type Err = TransitionError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || TransitionError::BadAction(s.to_string());
        match s {
            "SHIFT" => Ok(Action::Shift),
            "REDUCE" => Ok(Action::Reduce),
            _ => {
                let inner = |prefix: &str| {
                    s.strip_prefix(prefix)
                        .and_then(|r| r.strip_suffix(')'))
                        .filter(|r| !r.is_empty() && !r.contains(char::is_whitespace))
                };
                if let Some(x) = inner("NT(") {
                    Ok(Action::Nt(x.to_string()))
                } else if let Some(w) = inner("GEN(") {
                    Ok(Action::Gen(w.to_string()))
                } else {
                    Err(bad())
                }
            }
        }
    }
}
