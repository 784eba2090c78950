use std::fmt;

/// A phrase-structure tree. Internal nodes carry nonterminal labels, leaves
/// carry terminal tokens.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tree {
    Leaf(String),
    Internal { label: String, children: Vec<Tree> },
}

impl Tree {
    pub fn leaf(token: impl Into<String>) -> Self {
        Tree::Leaf(token.into())
    }

    /// Builds an internal node. Panics on an empty child list; use the
    /// reader for untrusted input.
    pub fn node(label: impl Into<String>, children: Vec<Tree>) -> Self {
        assert!(!children.is_empty(), "internal node needs at least one child");
        Tree::Internal {
            label: label.into(),
            children,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Tree::Leaf(_))
    }

    /// Label of an internal node, token of a leaf.
    pub fn label(&self) -> &str {
        match self {
            Tree::Leaf(t) => t,
            Tree::Internal { label, .. } => label,
        }
    }

    pub fn children(&self) -> &[Tree] {
        match self {
            Tree::Leaf(_) => &[],
            Tree::Internal { children, .. } => children,
        }
    }

    /// An internal node whose only child is a leaf.
    pub fn is_preterminal(&self) -> bool {
        matches!(self, Tree::Internal { children, .. } if children.len() == 1 && children[0].is_leaf())
    }

    /// The yield of the tree, left to right.
    pub fn leaves(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Tree::Leaf(t) => out.push(t),
            Tree::Internal { children, .. } => {
                for c in children {
                    c.collect_leaves(out);
                }
            }
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            Tree::Leaf(_) => 1,
            Tree::Internal { children, .. } => children.iter().map(Tree::leaf_count).sum(),
        }
    }

    pub fn internal_count(&self) -> usize {
        match self {
            Tree::Leaf(_) => 0,
            Tree::Internal { children, .. } => {
                1 + children.iter().map(Tree::internal_count).sum::<usize>()
            }
        }
    }

    /// Maximum number of simultaneously open nonterminals when the tree is
    /// built top-down, i.e. the number of internal nodes on the deepest path.
    pub fn open_depth(&self) -> usize {
        match self {
            Tree::Leaf(_) => 0,
            Tree::Internal { children, .. } => {
                1 + children.iter().map(Tree::open_depth).max().unwrap_or(0)
            }
        }
    }

    /// Nonterminal labels in pre-order.
    pub fn labels(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.visit_internal(&mut |t| out.push(t.label()));
        out
    }

    fn visit_internal<'a>(&'a self, f: &mut impl FnMut(&'a Tree)) {
        if let Tree::Internal { children, .. } = self {
            f(self);
            for c in children {
                c.visit_internal(f);
            }
        }
    }

    /// Returns a copy with leaves replaced, in order, by `tokens`.
    /// `tokens` must have exactly `leaf_count()` entries.
    pub fn with_leaves<S: AsRef<str>>(&self, tokens: &[S]) -> Tree {
        assert_eq!(tokens.len(), self.leaf_count(), "token count must match yield");
        let mut it = tokens.iter();
        self.relabel_leaves(&mut || it.next().expect("length checked").as_ref().to_string())
    }

    /// Returns a copy with each leaf token passed through `f` (with its
    /// position in the yield).
    pub fn map_leaves(&self, mut f: impl FnMut(usize, &str) -> String) -> Tree {
        let mut pos = 0;
        self.map_leaves_inner(&mut pos, &mut f)
    }

    fn map_leaves_inner(&self, pos: &mut usize, f: &mut impl FnMut(usize, &str) -> String) -> Tree {
        match self {
            Tree::Leaf(t) => {
                let out = Tree::Leaf(f(*pos, t));
                *pos += 1;
                out
            }
            Tree::Internal { label, children } => Tree::Internal {
                label: label.clone(),
                children: children.iter().map(|c| c.map_leaves_inner(pos, f)).collect(),
            },
        }
    }

    fn relabel_leaves(&self, next: &mut impl FnMut() -> String) -> Tree {
        match self {
            Tree::Leaf(_) => Tree::Leaf(next()),
            Tree::Internal { label, children } => Tree::Internal {
                label: label.clone(),
                children: children.iter().map(|c| c.relabel_leaves(next)).collect(),
            },
        }
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tree::Leaf(t) => f.write_str(t),
            Tree::Internal { label, children } => {
                write!(f, "({label}")?;
                for c in children {
                    write!(f, " {c}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Removes the preterminal layer: every non-root internal node whose only
/// child is a leaf is replaced by that leaf. Unary chains of nonterminals
/// above the preterminal are kept, and the root is never collapsed so the
/// result always has an internal root.
pub fn strip_preterminals(tree: &Tree) -> Tree {
    match tree {
        Tree::Leaf(_) => tree.clone(),
        Tree::Internal { label, children } => Tree::Internal {
            label: label.clone(),
            children: children.iter().map(strip_below_root).collect(),
        },
    }
}

fn strip_below_root(tree: &Tree) -> Tree {
    if tree.is_preterminal() {
        return tree.children()[0].clone();
    }
    match tree {
        Tree::Leaf(_) => tree.clone(),
        Tree::Internal { label, children } => Tree::Internal {
            label: label.clone(),
            children: children.iter().map(strip_below_root).collect(),
        },
    }
}
