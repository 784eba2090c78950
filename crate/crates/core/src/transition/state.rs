use crate::treebank::Tree;

use super::{Action, Mode, TransitionError};

/// Default cap on simultaneously open nonterminals.
pub const DEFAULT_MAX_OPEN_NTS: usize = 100;

/// One entry of the algorithm stack.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StackItem {
    OpenNt(String),
    Terminal(String),
    Completed(Tree),
}

impl StackItem {
    pub fn is_open_nt(&self) -> bool {
        matches!(self, StackItem::OpenNt(_))
    }
}

/// Which action types are currently allowed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Legal {
    pub nt: bool,
    pub shift: bool,
    pub gen: bool,
    pub reduce: bool,
}

impl Legal {
    pub fn allows(&self, action: &Action) -> bool {
        match action {
            Action::Nt(_) => self.nt,
            Action::Shift => self.shift,
            Action::Gen(_) => self.gen,
            Action::Reduce => self.reduce,
        }
    }

    pub fn count_types(&self) -> usize {
        [self.nt, self.shift, self.gen, self.reduce].iter().filter(|b| **b).count()
    }
}

/// Push/pop counters, used to check that total work is linear.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct WorkCounter {
    pub pushes: usize,
    pub pops: usize,
}

/// Parser or generator configuration: stack, input buffer (parse) or
/// generated terminals (generate), and the open-nonterminal count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgoState {
    mode: Mode,
    stack: Vec<StackItem>,
    sentence: Vec<String>,
    /// Parse mode: index of the front of the buffer into `sentence`.
    cursor: usize,
    open_nts: usize,
    max_open_nts: usize,
    steps: usize,
    work: WorkCounter,
}

impl AlgoState {
    /// Initial parser state with the whole sentence in the buffer.
    pub fn parser<S: AsRef<str>>(sentence: &[S], max_open_nts: usize) -> Result<Self, TransitionError> {
        if sentence.is_empty() {
            return Err(TransitionError::EmptySentence);
        }
        Ok(Self {
            mode: Mode::Parse,
            stack: Vec::new(),
            sentence: sentence.iter().map(|s| s.as_ref().to_string()).collect(),
            cursor: 0,
            open_nts: 0,
            max_open_nts,
            steps: 0,
            work: WorkCounter::default(),
        })
    }

    /// Initial generator state: empty stack, no terminals.
    pub fn generator(max_open_nts: usize) -> Self {
        Self {
            mode: Mode::Generate,
            stack: Vec::new(),
            sentence: Vec::new(),
            cursor: 0,
            open_nts: 0,
            max_open_nts,
            steps: 0,
            work: WorkCounter::default(),
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn stack(&self) -> &[StackItem] {
        &self.stack
    }

    /// Unconsumed input (parse mode); empty in generate mode.
    pub fn buffer(&self) -> &[String] {
        match self.mode {
            Mode::Parse => &self.sentence[self.cursor..],
            Mode::Generate => &[],
        }
    }

    /// Number of terminals shifted so far (parse) or generated (generate).
    pub fn position(&self) -> usize {
        match self.mode {
            Mode::Parse => self.cursor,
            Mode::Generate => self.sentence.len(),
        }
    }

    /// Terminals generated so far (generate mode), or consumed (parse mode).
    pub fn terms(&self) -> &[String] {
        match self.mode {
            Mode::Parse => &self.sentence[..self.cursor],
            Mode::Generate => &self.sentence,
        }
    }

    /// Full input sentence in parse mode.
    pub fn sentence(&self) -> &[String] {
        &self.sentence
    }

    pub fn open_nts(&self) -> usize {
        self.open_nts
    }

    pub fn max_open_nts(&self) -> usize {
        self.max_open_nts
    }

    /// Number of actions applied so far.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn work(&self) -> WorkCounter {
        self.work
    }

    fn top_is_open_nt(&self) -> bool {
        self.stack.last().is_some_and(StackItem::is_open_nt)
    }

    pub fn is_terminal(&self) -> bool {
        let single_done = self.stack.len() == 1 && matches!(self.stack[0], StackItem::Completed(_));
        match self.mode {
            Mode::Parse => single_done && self.cursor == self.sentence.len(),
            Mode::Generate => single_done,
        }
    }

    /// Legal action types in this state. Errors on a terminal state.
    pub fn legal(&self) -> Result<Legal, TransitionError> {
        if self.is_terminal() {
            return Err(TransitionError::TerminalState);
        }
        let n = self.open_nts;
        let under_cap = n < self.max_open_nts;
        let top_closed = !self.stack.is_empty() && !self.top_is_open_nt();
        Ok(match self.mode {
            Mode::Parse => {
                let has_input = self.cursor < self.sentence.len();
                Legal {
                    nt: has_input && under_cap,
                    shift: has_input && n >= 1,
                    gen: false,
                    reduce: top_closed && n >= 1 && (n >= 2 || !has_input),
                }
            }
            Mode::Generate => Legal {
                nt: under_cap,
                shift: false,
                gen: n >= 1,
                reduce: top_closed && n >= 1,
            },
        })
    }

    /// The concrete valid action set. GEN is expanded over `terminals`
    /// (generate mode only) and NT over `nonterminals`.
    pub fn valid_actions<S: AsRef<str>, T: AsRef<str>>(
        &self,
        nonterminals: &[S],
        terminals: &[T],
    ) -> Result<Vec<Action>, TransitionError> {
        let legal = self.legal()?;
        let mut out = Vec::new();
        if legal.reduce {
            out.push(Action::Reduce);
        }
        if legal.shift {
            out.push(Action::Shift);
        }
        if legal.gen {
            out.extend(terminals.iter().map(|w| Action::Gen(w.as_ref().to_string())));
        }
        if legal.nt {
            out.extend(nonterminals.iter().map(|x| Action::Nt(x.as_ref().to_string())));
        }
        Ok(out)
    }

    fn violation(&self, action: &Action) -> Option<&'static str> {
        let n = self.open_nts;
        let has_input = self.cursor < self.sentence.len();
        match (self.mode, action) {
            (Mode::Parse, Action::Gen(_)) => Some("GEN is not a parser action"),
            (Mode::Generate, Action::Shift) => Some("SHIFT is not a generator action"),
            (_, Action::Nt(_)) if n >= self.max_open_nts => Some("NT requires open NTs below the cap"),
            (Mode::Parse, Action::Nt(_)) if !has_input => Some("NT requires a non-empty buffer"),
            (Mode::Parse, Action::Shift) if !has_input => Some("SHIFT requires a non-empty buffer"),
            (Mode::Parse, Action::Shift) if n == 0 => Some("SHIFT requires an open NT"),
            (Mode::Generate, Action::Gen(_)) if n == 0 => Some("GEN requires an open NT"),
            (_, Action::Reduce) if self.stack.is_empty() => Some("REDUCE on an empty stack"),
            (_, Action::Reduce) if self.top_is_open_nt() => Some("REDUCE with an open NT on top of the stack"),
            (_, Action::Reduce) if n == 0 => Some("REDUCE requires an open NT"),
            (Mode::Parse, Action::Reduce) if n < 2 && has_input => {
                Some("REDUCE of the last open NT requires an empty buffer")
            }
            _ => None,
        }
    }

    /// Applies `action` in place.
    pub fn apply(&mut self, action: &Action) -> Result<(), TransitionError> {
        if self.is_terminal() {
            return Err(TransitionError::TerminalState);
        }
        if let Some(reason) = self.violation(action) {
            return Err(TransitionError::Illegal {
                action: action.to_string(),
                reason,
            });
        }
        match action {
            Action::Nt(x) => {
                self.stack.push(StackItem::OpenNt(x.clone()));
                self.open_nts += 1;
                self.work.pushes += 1;
            }
            Action::Shift => {
                let w = self.sentence[self.cursor].clone();
                self.cursor += 1;
                self.stack.push(StackItem::Terminal(w));
                self.work.pushes += 1;
            }
            Action::Gen(w) => {
                self.sentence.push(w.clone());
                self.stack.push(StackItem::Terminal(w.clone()));
                self.work.pushes += 1;
            }
            Action::Reduce => {
                let mut children = Vec::new();
                let label = loop {
                    self.work.pops += 1;
                    match self.stack.pop().expect("an open NT is on the stack") {
                        StackItem::OpenNt(x) => break x,
                        StackItem::Terminal(w) => children.push(Tree::Leaf(w)),
                        StackItem::Completed(t) => children.push(t),
                    }
                };
                children.reverse();
                self.stack.push(StackItem::Completed(Tree::Internal { label, children }));
                self.open_nts -= 1;
                self.work.pushes += 1;
            }
        }
        self.steps += 1;
        Ok(())
    }

    /// Functional form of [`AlgoState::apply`].
    pub fn applied(&self, action: &Action) -> Result<Self, TransitionError> {
        let mut next = self.clone();
        next.apply(action)?;
        Ok(next)
    }

    /// Number of items popped by a REDUCE in this state (children plus the
    /// open NT), or `None` if no NT is open.
    pub fn reduce_width(&self) -> Option<usize> {
        self.stack.iter().rev().position(StackItem::is_open_nt).map(|p| p + 1)
    }

    /// The completed tree of a terminal state.
    pub fn finished_tree(&self) -> Option<&Tree> {
        match (self.is_terminal(), self.stack.first()) {
            (true, Some(StackItem::Completed(t))) => Some(t),
            _ => None,
        }
    }

    pub fn into_tree(mut self) -> Result<Tree, TransitionError> {
        if !self.is_terminal() {
            return Err(TransitionError::NotTerminal);
        }
        match self.stack.pop() {
            Some(StackItem::Completed(t)) => Ok(t),
            _ => unreachable!("terminal state holds one completed item"),
        }
    }
}
