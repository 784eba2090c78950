//! Reader for bracketed phrase-structure corpora.
//!
//! Trees may span several lines; a tree ends when its brackets balance.
//! A PTB-style unlabeled wrapper `( (S ...) )` around a single tree is
//! unwrapped. Functional tags (`NP-SBJ`) and trace nodes (`-NONE-`) are
//! rejected and must be removed beforehand.

use super::{Tree, TreebankError};

#[derive(Debug, Clone, PartialEq)]
enum Tok<'a> {
    Open,
    Close,
    Atom(&'a str),
}

#[derive(Debug, Clone, Copy)]
struct Pos {
    line: usize,
    column: usize,
}

fn tokenize(text: &str) -> Vec<(Tok<'_>, Pos)> {
    let mut out = Vec::new();
    let mut line = 1;
    let mut column = 1;
    let mut atom_start: Option<(usize, Pos)> = None;
    for (i, ch) in text.char_indices() {
        let pos = Pos { line, column };
        let is_delim = ch.is_whitespace() || ch == '(' || ch == ')';
        if is_delim {
            if let Some((start, p)) = atom_start.take() {
                out.push((Tok::Atom(&text[start..i]), p));
            }
            if ch == '(' {
                out.push((Tok::Open, pos));
            } else if ch == ')' {
                out.push((Tok::Close, pos));
            }
        } else if atom_start.is_none() {
            atom_start = Some((i, pos));
        }
        if ch == '\n' {
            line += 1;
            column = 1;
        } else {
            column += 1;
        }
    }
    if let Some((start, p)) = atom_start {
        out.push((Tok::Atom(&text[start..]), p));
    }
    out
}

/// Parses every top-level bracket group in `text`, in order.
pub fn parse_bracketed(text: &str) -> Result<Vec<Tree>, TreebankError> {
    let toks = tokenize(text);
    let end = end_position(text);
    let mut trees = Vec::new();
    let mut i = 0;
    while i < toks.len() {
        match &toks[i] {
            (Tok::Open, _) => {
                let (tree, next) = parse_group(&toks, i, end)?;
                let tree = match tree {
                    Parsed::Tree(t) => t,
                    Parsed::Wrapper(mut inner, pos) => {
                        if inner.len() != 1 {
                            return Err(err(pos, "unlabeled bracket must wrap exactly one tree"));
                        }
                        inner.pop().expect("length checked")
                    }
                };
                trees.push(tree);
                i = next;
            }
            (Tok::Close, p) => return Err(err(*p, "unbalanced ')'")),
            (Tok::Atom(a), p) => {
                return Err(err(*p, &format!("token '{a}' outside of any bracket")))
            }
        }
    }
    Ok(trees)
}

/// Parses a single tree; errors if the text holds zero or several.
pub fn parse_tree(text: &str) -> Result<Tree, TreebankError> {
    let mut trees = parse_bracketed(text)?;
    match trees.len() {
        1 => Ok(trees.pop().expect("length checked")),
        n => Err(TreebankError::Parse {
            line: 1,
            column: 1,
            message: format!("expected exactly one tree, found {n}"),
        }),
    }
}

enum Parsed {
    Tree(Tree),
    Wrapper(Vec<Tree>, Pos),
}

fn end_position(text: &str) -> Pos {
    let line = text.matches('\n').count() + 1;
    let column = text.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    Pos { line, column }
}

fn err(pos: Pos, message: &str) -> TreebankError {
    TreebankError::Parse {
        line: pos.line,
        column: pos.column,
        message: message.to_string(),
    }
}

fn check_label(label: &str, pos: Pos) -> Result<(), TreebankError> {
    if label == "-NONE-" {
        return Err(TreebankError::UnsupportedLabel {
            label: label.to_string(),
            line: pos.line,
            column: pos.column,
        });
    }
    let starts_alnum = label.chars().next().is_some_and(|c| c.is_alphanumeric());
    if starts_alnum && (label.contains('-') || label.contains('=')) {
        return Err(TreebankError::UnsupportedLabel {
            label: label.to_string(),
            line: pos.line,
            column: pos.column,
        });
    }
    Ok(())
}

// Iterative so that deep trees cannot overflow the call stack.
fn parse_group(toks: &[(Tok<'_>, Pos)], start: usize, end: Pos) -> Result<(Parsed, usize), TreebankError> {
    struct Frame {
        label: Option<String>,
        children: Vec<Tree>,
        pos: Pos,
    }
    let mut stack: Vec<Frame> = Vec::new();
    let mut i = start;
    loop {
        let Some((tok, pos)) = toks.get(i) else {
            return Err(err(end, "unbalanced brackets at end of input"));
        };
        match tok {
            Tok::Open => {
                let label = match toks.get(i + 1) {
                    Some((Tok::Atom(a), lp)) => {
                        check_label(a, *lp)?;
                        i += 1;
                        Some(a.to_string())
                    }
                    Some((Tok::Close, _)) => return Err(err(*pos, "empty constituent '()'")),
                    Some((Tok::Open, _)) => None,
                    None => return Err(err(end, "unbalanced brackets at end of input")),
                };
                stack.push(Frame {
                    label,
                    children: Vec::new(),
                    pos: *pos,
                });
            }
            Tok::Close => {
                let frame = stack.pop().expect("frame pushed by matching '('");
                let done = match frame.label {
                    Some(label) => {
                        if frame.children.is_empty() {
                            return Err(err(frame.pos, &format!("constituent '{label}' has no children")));
                        }
                        Parsed::Tree(Tree::Internal {
                            label,
                            children: frame.children,
                        })
                    }
                    None => Parsed::Wrapper(frame.children, frame.pos),
                };
                match stack.last_mut() {
                    Some(parent) => match done {
                        Parsed::Tree(t) => parent.children.push(t),
                        Parsed::Wrapper(_, p) => {
                            return Err(err(p, "unlabeled bracket inside a tree"));
                        }
                    },
                    None => return Ok((done, i + 1)),
                }
            }
            Tok::Atom(a) => {
                let parent = stack.last_mut().expect("atoms only reached inside a group");
                if parent.label.is_none() {
                    return Err(err(*pos, "unlabeled bracket may only wrap a tree"));
                }
                parent.children.push(Tree::Leaf(a.to_string()));
            }
        }
        i += 1;
    }
}

/// Serializes trees one per line.
pub fn write_bracketed(trees: &[Tree]) -> String {
    let mut out = String::new();
    for t in trees {
        out.push_str(&t.to_string());
        out.push('\n');
    }
    out
}
