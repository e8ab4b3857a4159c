//! Finite automata over named actions.
//!
//! Every finite set of test sequences the push-in pipeline manipulates is held
//! as an [`Nfa`]. The constructions here are the usual ones (product,
//! homomorphic projection, subset construction, partition refinement) plus a
//! few specific to the pipeline: the "skipping" product [`lift_intersect`],
//! layered prefix extraction and exact big-integer word counting.

mod canonical;
mod ops;
mod text;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub use canonical::{
    count_words, enumerate, max_word_length, normalize, prefixes_of_length, same_language, Words,
};
pub use ops::{
    accepts, append_any_symbol, from_word_set, intersect, is_empty_language, lift_intersect,
    project, union,
};

/// Reserved token for internal moves in every text format.
pub const EPS_TOKEN: &str = "eps";

/// Exact, unbounded count of words.
pub type WordCount = num_bigint::BigUint;

/// A finite sequence of observable actions.
pub type Word = Vec<Symbol>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AutomataError {
    #[error("invalid action name {0:?}")]
    InvalidSymbol(String),
    #[error("alphabet mismatch: {left} vs {right}")]
    AlphabetMismatch { left: Alphabet, right: Alphabet },
    #[error("alphabet {sub} is not contained in {sup}")]
    NotSubset { sub: Alphabet, sup: Alphabet },
    #[error("action {symbol} is not in alphabet {alphabet}")]
    UnknownSymbol { symbol: String, alphabet: Alphabet },
    #[error("state {0} does not exist")]
    UnknownState(usize),
    #[error("language is infinite")]
    InfiniteLanguage,
    #[error("language is empty")]
    EmptyLanguage,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T, E = AutomataError> = std::result::Result<T, E>;

/// An observable action name.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Result<Self> {
        if name.is_empty() || name.chars().any(char::is_whitespace) || name == EPS_TOKEN {
            return Err(AutomataError::InvalidSymbol(name.to_string()));
        }
        Ok(Symbol(Arc::from(name)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<&str> for Symbol {
    type Error = AutomataError;

    fn try_from(value: &str) -> Result<Self> {
        Symbol::new(value)
    }
}

/// Parses a whitespace-separated word such as `"send msg ack"`.
pub fn parse_word(text: &str) -> Result<Word> {
    text.split_whitespace().map(Symbol::new).collect()
}

/// Renders a word with single spaces; the empty word renders as `""`.
pub fn format_word(word: &[Symbol]) -> String {
    word.iter()
        .map(Symbol::as_str)
        .collect::<Vec<_>>()
        .join(" ")
}

/// `word↓keep`: the word with every action outside `keep` dropped.
pub fn project_word(word: &[Symbol], keep: &Alphabet) -> Word {
    word.iter().filter(|s| keep.contains(s)).cloned().collect()
}

/// A finite set of actions, kept sorted by name.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Alphabet {
    symbols: Arc<[Symbol]>,
}

impl Alphabet {
    pub fn new(symbols: impl IntoIterator<Item = Symbol>) -> Self {
        let set: BTreeSet<Symbol> = symbols.into_iter().collect();
        Alphabet {
            symbols: set.into_iter().collect(),
        }
    }

    pub fn from_names<S: AsRef<str>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let symbols = names
            .into_iter()
            .map(|n| Symbol::new(n.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Alphabet::new(symbols))
    }

    pub fn empty() -> Self {
        Alphabet::default()
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn iter(&self) -> impl Iterator<Item = &Symbol> {
        self.symbols.iter()
    }

    pub fn index_of(&self, symbol: &Symbol) -> Option<usize> {
        self.symbols.binary_search(symbol).ok()
    }

    pub fn index_of_name(&self, name: &str) -> Option<usize> {
        self.symbols.binary_search_by(|s| s.as_str().cmp(name)).ok()
    }

    pub fn contains(&self, symbol: &Symbol) -> bool {
        self.index_of(symbol).is_some()
    }

    pub fn symbol(&self, index: usize) -> &Symbol {
        &self.symbols[index]
    }

    pub fn is_subset(&self, other: &Alphabet) -> bool {
        self.iter().all(|s| other.contains(s))
    }

    pub fn union(&self, other: &Alphabet) -> Alphabet {
        Alphabet::new(self.iter().chain(other.iter()).cloned())
    }

    pub fn minus(&self, other: &Alphabet) -> Alphabet {
        Alphabet::new(self.iter().filter(|s| !other.contains(s)).cloned())
    }

    pub fn intersection(&self, other: &Alphabet) -> Alphabet {
        Alphabet::new(self.iter().filter(|s| other.contains(s)).cloned())
    }

    pub(crate) fn require_subset_of(&self, sup: &Alphabet) -> Result<()> {
        if self.is_subset(sup) {
            Ok(())
        } else {
            Err(AutomataError::NotSubset {
                sub: self.clone(),
                sup: sup.clone(),
            })
        }
    }

    /// Maps every symbol of `word` to its index, failing on foreign actions.
    pub(crate) fn encode(&self, word: &[Symbol]) -> Result<Vec<u32>> {
        word.iter()
            .map(|s| {
                self.index_of(s)
                    .map(|i| i as u32)
                    .ok_or_else(|| AutomataError::UnknownSymbol {
                        symbol: s.to_string(),
                        alphabet: self.clone(),
                    })
            })
            .collect()
    }

    pub(crate) fn decode(&self, word: &[u32]) -> Word {
        word.iter()
            .map(|&i| self.symbols[i as usize].clone())
            .collect()
    }

    /// `remap[i]` is the index in `target` of this alphabet's i-th symbol.
    pub(crate) fn remap_into(&self, target: &Alphabet) -> Vec<Option<u32>> {
        self.iter()
            .map(|s| target.index_of(s).map(|i| i as u32))
            .collect()
    }
}

impl fmt::Debug for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, s) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(s.as_str())?;
        }
        f.write_str("}")
    }
}

impl FromIterator<Symbol> for Alphabet {
    fn from_iter<T: IntoIterator<Item = Symbol>>(iter: T) -> Self {
        Alphabet::new(iter)
    }
}

pub type StateId = usize;

/// Transition label: an internal move or an index into the automaton's alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Eps,
    Sym(u32),
}

/// Nondeterministic finite automaton with ε-moves.
///
/// States are `0..num_states()`. Outputs of [`normalize`] are additionally
/// deterministic, trim, minimal and numbered in breadth-first order, so two
/// canonical automata are equal (`==`) exactly when their languages are.
#[derive(Clone, PartialEq, Eq)]
pub struct Nfa {
    pub(crate) alphabet: Alphabet,
    pub(crate) initial: StateId,
    pub(crate) accepting: Vec<bool>,
    pub(crate) edges: Vec<Vec<(Label, StateId)>>,
    pub(crate) canonical: bool,
}

impl Nfa {
    /// A single non-accepting state and no transitions.
    pub fn new(alphabet: Alphabet) -> Self {
        Nfa {
            alphabet,
            initial: 0,
            accepting: vec![false],
            edges: vec![Vec::new()],
            canonical: false,
        }
    }

    /// The canonical automaton of the empty language.
    pub fn empty_language(alphabet: Alphabet) -> Self {
        let mut nfa = Nfa::new(alphabet);
        nfa.canonical = true;
        nfa
    }

    /// Accepts only the empty word.
    pub fn empty_word(alphabet: Alphabet) -> Self {
        let mut nfa = Nfa::new(alphabet);
        nfa.accepting[0] = true;
        nfa.canonical = true;
        nfa
    }

    /// Accepts exactly one word.
    pub fn word(alphabet: Alphabet, word: &[Symbol]) -> Result<Self> {
        let codes = alphabet.encode(word)?;
        let mut nfa = Nfa::new(alphabet);
        let mut cur = 0;
        for c in codes {
            let next = nfa.add_state();
            nfa.edges[cur].push((Label::Sym(c), next));
            cur = next;
        }
        nfa.accepting[cur] = true;
        Ok(nfa)
    }

    /// Accepts every word whose length lies in `min..=max`.
    pub fn length_window(alphabet: Alphabet, min: usize, max: usize) -> Self {
        let mut nfa = Nfa::new(alphabet);
        if min > max {
            return nfa;
        }
        let n = nfa.alphabet.len() as u32;
        for len in 0..=max {
            if len > 0 {
                let s = nfa.add_state();
                for c in 0..n {
                    nfa.edges[s - 1].push((Label::Sym(c), s));
                }
            }
            nfa.accepting[len] = len >= min;
        }
        nfa
    }

    /// Accepts every word of length exactly `len`.
    pub fn exact_length(alphabet: Alphabet, len: usize) -> Self {
        Nfa::length_window(alphabet, len, len)
    }

    /// Accepts every word over the alphabet (`Σ*`).
    pub fn universal(alphabet: Alphabet) -> Self {
        let mut nfa = Nfa::new(alphabet);
        nfa.accepting[0] = true;
        for c in 0..nfa.alphabet.len() as u32 {
            nfa.edges[0].push((Label::Sym(c), 0));
        }
        nfa
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.edges.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn is_accepting(&self, state: StateId) -> bool {
        self.accepting[state]
    }

    pub fn accepting_states(&self) -> impl Iterator<Item = StateId> + '_ {
        self.accepting
            .iter()
            .enumerate()
            .filter_map(|(i, &a)| a.then_some(i))
    }

    pub fn transitions_from(&self, state: StateId) -> &[(Label, StateId)] {
        &self.edges[state]
    }

    /// True when produced by [`normalize`] and not modified since.
    pub fn is_canonical(&self) -> bool {
        self.canonical
    }

    pub fn add_state(&mut self) -> StateId {
        self.canonical = false;
        self.edges.push(Vec::new());
        self.accepting.push(false);
        self.edges.len() - 1
    }

    pub fn set_initial(&mut self, state: StateId) -> Result<()> {
        self.check_state(state)?;
        self.canonical = false;
        self.initial = state;
        Ok(())
    }

    pub fn set_accepting(&mut self, state: StateId, accepting: bool) -> Result<()> {
        self.check_state(state)?;
        self.canonical = false;
        self.accepting[state] = accepting;
        Ok(())
    }

    /// Adds `src --symbol--> dst`; `None` adds an ε-move.
    pub fn add_transition(
        &mut self,
        src: StateId,
        symbol: Option<&Symbol>,
        dst: StateId,
    ) -> Result<()> {
        let label = match symbol {
            None => Label::Eps,
            Some(s) => Label::Sym(self.alphabet.encode(std::slice::from_ref(s))?[0]),
        };
        self.add_edge(src, label, dst)
    }

    pub fn add_edge(&mut self, src: StateId, label: Label, dst: StateId) -> Result<()> {
        self.check_state(src)?;
        self.check_state(dst)?;
        if let Label::Sym(c) = label {
            if c as usize >= self.alphabet.len() {
                return Err(AutomataError::InvalidSymbol(format!("#{c}")));
            }
        }
        self.canonical = false;
        self.edges[src].push((label, dst));
        Ok(())
    }

    fn check_state(&self, state: StateId) -> Result<()> {
        if state < self.edges.len() {
            Ok(())
        } else {
            Err(AutomataError::UnknownState(state))
        }
    }

    pub(crate) fn require_same_alphabet(&self, other: &Nfa) -> Result<()> {
        if self.alphabet == other.alphabet {
            Ok(())
        } else {
            Err(AutomataError::AlphabetMismatch {
                left: self.alphabet.clone(),
                right: other.alphabet.clone(),
            })
        }
    }

    /// ε-closure of a set of states, returned sorted.
    pub(crate) fn eps_closure(&self, seeds: impl IntoIterator<Item = StateId>) -> Vec<StateId> {
        let mut seen = vec![false; self.num_states()];
        let mut stack: Vec<StateId> = Vec::new();
        for s in seeds {
            if !seen[s] {
                seen[s] = true;
                stack.push(s);
            }
        }
        let mut out = Vec::new();
        while let Some(s) = stack.pop() {
            out.push(s);
            for &(label, t) in &self.edges[s] {
                if label == Label::Eps && !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Same automaton with every state accepting.
    pub(crate) fn all_accepting(mut self) -> Nfa {
        self.accepting.iter_mut().for_each(|a| *a = true);
        self.canonical = false;
        self
    }
}

impl fmt::Debug for Nfa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
