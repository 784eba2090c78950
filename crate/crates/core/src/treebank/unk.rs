//! Unknown-word signatures.
//!
//! The English rule table follows the shape of the Berkeley parser's
//! signature scheme: a capitalization class, digit and hyphen flags, and at
//! most one suffix class. It is a fixed reimplementation, not a byte-exact
//! port.

use serde::{Deserialize, Serialize};

/// Token used when every unknown word shares one class.
pub const SINGLE_UNK: &str = "UNK";

/// How training singletons (and unseen words) are mapped to UNK tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingletonPolicy {
    BerkeleyRules,
    SingleUnk,
}

impl std::str::FromStr for SingletonPolicy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "berkeley" | "berkeley_rules" | "berkeley-rules" => Ok(Self::BerkeleyRules),
            "single" | "single_unk" | "single-unk" => Ok(Self::SingleUnk),
            other => Err(format!("unknown singleton policy '{other}'")),
        }
    }
}

/// Suffix classes, longest first. Only consulted for words of length >= 5
/// without hyphens.
const SUFFIXES: &[&str] = &[
    "ness", "ment", "able", "ible", "less", "ing", "ion", "ity", "ive", "ous", "ful", "ize", "ism",
    "ist", "est", "ed", "er", "ly", "al", "ic", "y",
];

/// True if `token` is one of the UNK tokens produced by either policy.
pub fn is_unk_token(token: &str) -> bool {
    token == SINGLE_UNK || token.starts_with("UNK-")
}

/// Computes the UNK signature for `word` at sentence position `position`.
/// `known_lower` reports whether the lowercased form is a known word; it is
/// only consulted for sentence-initial capitalized words.
pub fn signature(
    word: &str,
    position: usize,
    policy: SingletonPolicy,
    known_lower: impl Fn(&str) -> bool,
) -> String {
    match policy {
        SingletonPolicy::SingleUnk => SINGLE_UNK.to_string(),
        SingletonPolicy::BerkeleyRules => berkeley_signature(word, position, known_lower),
    }
}

fn berkeley_signature(word: &str, position: usize, known_lower: impl Fn(&str) -> bool) -> String {
    let mut sig = String::from(SINGLE_UNK);
    let chars: Vec<char> = word.chars().collect();
    let Some(&first) = chars.first() else {
        return sig;
    };

    let mut num_caps = 0;
    let mut has_digit = false;
    let mut has_dash = false;
    let mut has_lower = false;
    for &ch in &chars {
        if ch.is_numeric() {
            has_digit = true;
        } else if ch == '-' {
            has_dash = true;
        } else if ch.is_alphabetic() {
            if ch.is_lowercase() {
                has_lower = true;
            } else {
                num_caps += 1;
            }
        }
    }
    let lowered = word.to_lowercase();

    if first.is_uppercase() {
        if position == 0 && num_caps == 1 {
            sig.push_str("-INITC");
            if known_lower(&lowered) {
                sig.push_str("-KNOWNLC");
            }
        } else {
            sig.push_str("-CAPS");
        }
    } else if !first.is_alphabetic() && num_caps > 0 {
        sig.push_str("-CAPS");
    } else if has_lower {
        sig.push_str("-LC");
    }
    if has_digit {
        sig.push_str("-NUM");
    }
    if has_dash {
        sig.push_str("-DASH");
    }

    let len = chars.len();
    let suffix_ok = len >= 5 && !has_dash && !(has_digit && num_caps > 0);
    if let Some(sfx) = SUFFIXES.iter().find(|s| suffix_ok && lowered.ends_with(*s)) {
        sig.push('-');
        sig.push_str(sfx);
    } else if len >= 3 && lowered.ends_with('s') {
        let second_last = lowered.chars().rev().nth(1).unwrap_or(' ');
        if !matches!(second_last, 's' | 'i' | 'u') {
            sig.push_str("-s");
        }
    }
    sig
}

/// Successively coarser versions of a signature, from most specific to
/// the bare `UNK`: `UNK-LC-NUM-ed`, `UNK-LC-NUM`, `UNK-LC`, `UNK`.
pub fn backoffs(signature: &str) -> impl Iterator<Item = &str> {
    let mut cur = Some(signature);
    std::iter::from_fn(move || {
        let out = cur?;
        cur = out.rfind('-').map(|i| &out[..i]);
        Some(out)
    })
}
