//! Units: labeled transition systems with an input/output interface.
//!
//! A unit's observable behaviors are the label sequences of its runs with the
//! internal moves dropped. They are prefix-closed and always contain the empty
//! word. [`bbtest`] decides membership; [`compose`] builds the synchronous
//! product in which every unit owning an action takes part in it.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::automata::{self, Alphabet, AutomataError, Label, Nfa, Symbol, Word, EPS_TOKEN};
use crate::parse::{tokenize, ParseError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LtsError {
    #[error("action {0} is declared both as input and output")]
    OverlappingInterface(Symbol),
    #[error("unit {unit}: action {action:?} is not in its interface")]
    OutsideInterface { unit: String, action: String },
    #[error("unit {0} has no states")]
    NoStates(String),
    #[error("unit {0} has no initial state")]
    NoInitial(String),
    #[error("unit {unit}: unknown state {state:?}")]
    UnknownState { unit: String, state: String },
    #[error("duplicate unit name {0}")]
    DuplicateUnit(String),
    #[error("composition of zero units")]
    EmptyComposition,
    #[error(transparent)]
    Automata(#[from] AutomataError),
    #[error("{0}")]
    Parse(#[from] ParseError),
}

pub type Result<T, E = LtsError> = std::result::Result<T, E>;

/// Input and output actions of a unit; the two sets are disjoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interface {
    inputs: Alphabet,
    outputs: Alphabet,
    all: Alphabet,
}

impl Interface {
    pub fn new(inputs: Alphabet, outputs: Alphabet) -> Result<Self> {
        if let Some(s) = inputs.iter().find(|s| outputs.contains(s)) {
            return Err(LtsError::OverlappingInterface(s.clone()));
        }
        let all = inputs.union(&outputs);
        Ok(Interface {
            inputs,
            outputs,
            all,
        })
    }

    pub fn from_names<S: AsRef<str>>(
        inputs: impl IntoIterator<Item = S>,
        outputs: impl IntoIterator<Item = S>,
    ) -> Result<Self> {
        Interface::new(
            Alphabet::from_names(inputs)?,
            Alphabet::from_names(outputs)?,
        )
    }

    pub fn inputs(&self) -> &Alphabet {
        &self.inputs
    }

    pub fn outputs(&self) -> &Alphabet {
        &self.outputs
    }

    /// All observable actions, `Π ∪ Γ`.
    pub fn alphabet(&self) -> &Alphabet {
        &self.all
    }

    pub fn len(&self) -> usize {
        self.all.len()
    }

    pub fn is_empty(&self) -> bool {
        self.all.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Transition {
    pub src: usize,
    /// `None` is the internal action.
    pub action: Option<Symbol>,
    pub dst: usize,
}

/// A finite labeled transition system. Immutable once built.
#[derive(Clone)]
pub struct Unit {
    name: String,
    interface: Interface,
    states: Vec<String>,
    initial: usize,
    transitions: Vec<Transition>,
    nfa: Nfa,
}

impl PartialEq for Unit {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.interface == other.interface
            && self.states == other.states
            && self.initial == other.initial
            && self.transitions == other.transitions
    }
}

impl Eq for Unit {}

impl fmt::Debug for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Unit {
    pub fn builder(name: impl Into<String>, interface: Interface) -> UnitBuilder {
        UnitBuilder {
            name: name.into(),
            interface,
            states: Vec::new(),
            index: HashMap::new(),
            initial: None,
            transitions: Vec::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn interface(&self) -> &Interface {
        &self.interface
    }

    pub fn alphabet(&self) -> &Alphabet {
        self.interface.alphabet()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// The pessimistic-automaton view: every state accepting.
    pub fn as_nfa(&self) -> &Nfa {
        &self.nfa
    }

    /// Copy with the same structure under a different name.
    pub fn renamed(&self, name: impl Into<String>) -> Unit {
        Unit {
            name: name.into(),
            ..self.clone()
        }
    }

    /// Rebuilds the unit with each transition passed through `edit`.
    pub fn map_transitions(&self, mut edit: impl FnMut(&Transition) -> Transition) -> Result<Unit> {
        let mut b = Unit::builder(self.name.clone(), self.interface.clone());
        for s in &self.states {
            b.state(s);
        }
        b.initial(&self.states[self.initial]);
        for t in &self.transitions {
            let t = edit(t);
            b.transition_ids(t.src, t.action, t.dst)?;
        }
        b.build()
    }
}

pub struct UnitBuilder {
    name: String,
    interface: Interface,
    states: Vec<String>,
    index: HashMap<String, usize>,
    initial: Option<usize>,
    transitions: Vec<Transition>,
}

impl UnitBuilder {
    /// Returns the id of `name`, declaring it if new.
    pub fn state(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        self.states.push(name.to_string());
        self.index.insert(name.to_string(), self.states.len() - 1);
        self.states.len() - 1
    }

    pub fn initial(&mut self, name: &str) -> &mut Self {
        let id = self.state(name);
        self.initial = Some(id);
        self
    }

    /// Adds `src --action--> dst`; `None` is an internal move.
    pub fn transition(&mut self, src: &str, action: Option<&str>, dst: &str) -> Result<&mut Self> {
        let action = action.map(|a| self.interface_symbol(a)).transpose()?;
        let (src, dst) = (self.state(src), self.state(dst));
        self.transitions.push(Transition { src, action, dst });
        Ok(self)
    }

    fn transition_ids(&mut self, src: usize, action: Option<Symbol>, dst: usize) -> Result<()> {
        if let Some(a) = &action {
            self.interface_symbol(a.as_str())?;
        }
        self.transitions.push(Transition { src, action, dst });
        Ok(())
    }

    fn interface_symbol(&self, action: &str) -> Result<Symbol> {
        let outside = || LtsError::OutsideInterface {
            unit: self.name.clone(),
            action: action.to_string(),
        };
        let index = self
            .interface
            .alphabet()
            .index_of_name(action)
            .ok_or_else(outside)?;
        Ok(self.interface.alphabet().symbol(index).clone())
    }

    pub fn build(self) -> Result<Unit> {
        if self.states.is_empty() {
            return Err(LtsError::NoStates(self.name));
        }
        let initial = self
            .initial
            .ok_or_else(|| LtsError::NoInitial(self.name.clone()))?;
        let mut nfa = Nfa::new(self.interface.alphabet().clone());
        for _ in 1..self.states.len() {
            nfa.add_state();
        }
        nfa.set_initial(initial)?;
        for s in 0..self.states.len() {
            nfa.set_accepting(s, true)?;
        }
        for t in &self.transitions {
            nfa.add_transition(t.src, t.action.as_ref(), t.dst)?;
        }
        Ok(Unit {
            name: self.name,
            interface: self.interface,
            states: self.states,
            initial,
            transitions: self.transitions,
            nfa,
        })
    }
}

/// The automaton of a unit's observable behaviors: all states accepting,
/// internal moves as ε-moves.
pub fn lts_to_nfa(unit: &Unit) -> Nfa {
    unit.nfa.clone()
}

/// Black-box test: is `word` an observable behavior of `unit`?
pub fn bbtest(unit: &Unit, word: &[Symbol]) -> Result<bool> {
    if let Some(s) = word.iter().find(|s| !unit.alphabet().contains(s)) {
        return Err(LtsError::OutsideInterface {
            unit: unit.name.clone(),
            action: s.to_string(),
        });
    }
    Ok(automata::accepts(&unit.nfa, word)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message}")]
pub struct OracleError {
    pub message: String,
}

impl OracleError {
    pub fn new(message: impl Into<String>) -> Self {
        OracleError {
            message: message.into(),
        }
    }
}

/// Access to a component through testing only.
///
/// Implementations must answer `true` for the empty word and be prefix-closed.
/// Queries may arrive concurrently from several threads.
pub trait BlackBoxOracle: Send + Sync {
    fn interface(&self) -> &Interface;

    fn query(&self, word: &[Symbol]) -> Result<bool, OracleError>;
}

impl BlackBoxOracle for Unit {
    fn interface(&self) -> &Interface {
        &self.interface
    }

    fn query(&self, word: &[Symbol]) -> Result<bool, OracleError> {
        bbtest(self, word).map_err(|e| OracleError::new(e.to_string()))
    }
}

impl<T: BlackBoxOracle + ?Sized> BlackBoxOracle for Arc<T> {
    fn interface(&self) -> &Interface {
        (**self).interface()
    }

    fn query(&self, word: &[Symbol]) -> Result<bool, OracleError> {
        (**self).query(word)
    }
}

/// Synchronous product of units.
///
/// An internal move of one unit leaves the others in place; an observable
/// action is taken jointly by every unit whose interface contains it while the
/// rest stay put. Only the reachable part is built.
pub fn compose(units: &[&Unit]) -> Result<Unit> {
    if units.is_empty() {
        return Err(LtsError::EmptyComposition);
    }
    let mut names = BTreeSet::new();
    for u in units {
        if !names.insert(u.name.as_str()) {
            return Err(LtsError::DuplicateUnit(u.name.clone()));
        }
    }
    let outputs = units
        .iter()
        .fold(Alphabet::empty(), |acc, u| acc.union(u.interface.outputs()));
    let inputs = units
        .iter()
        .fold(Alphabet::empty(), |acc, u| acc.union(u.interface.inputs()))
        .minus(&outputs);
    let interface = Interface::new(inputs, outputs)?;
    let alphabet = interface.alphabet().clone();

    // Per unit: per state, ε-successors and per global-symbol successors.
    struct Moves {
        eps: Vec<Vec<usize>>,
        sym: Vec<Vec<Vec<usize>>>,
        owns: Vec<bool>,
    }
    let moves: Vec<Moves> = units
        .iter()
        .map(|u| {
            let n = u.num_states();
            let mut eps = vec![Vec::new(); n];
            let mut sym = vec![vec![Vec::new(); alphabet.len()]; n];
            for (s, row) in u.nfa.edges.iter().enumerate() {
                for &(label, t) in row {
                    match label {
                        Label::Eps => eps[s].push(t),
                        Label::Sym(c) => {
                            let g = alphabet.index_of(u.alphabet().symbol(c as usize)).unwrap();
                            sym[s][g].push(t);
                        }
                    }
                }
            }
            let owns = alphabet.iter().map(|a| u.alphabet().contains(a)).collect();
            Moves { eps, sym, owns }
        })
        .collect();

    let start: Vec<usize> = units.iter().map(|u| u.initial).collect();
    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut order = vec![start.clone()];
    index.insert(start.clone(), 0);
    let mut queue = VecDeque::from([start]);
    let mut edges: Vec<(usize, Option<usize>, Vec<usize>)> = Vec::new();
    while let Some(global) = queue.pop_front() {
        let src = index[&global];
        let mut succ: Vec<(Option<usize>, Vec<usize>)> = Vec::new();
        for (i, m) in moves.iter().enumerate() {
            for &t in &m.eps[global[i]] {
                let mut next = global.clone();
                next[i] = t;
                succ.push((None, next));
            }
        }
        for c in 0..alphabet.len() {
            let mut partial = vec![global.clone()];
            for (i, m) in moves.iter().enumerate() {
                if !m.owns[c] {
                    continue;
                }
                let targets = &m.sym[global[i]][c];
                partial = partial
                    .iter()
                    .flat_map(|p| {
                        targets.iter().map(move |&t| {
                            let mut q = p.clone();
                            q[i] = t;
                            q
                        })
                    })
                    .collect();
                if partial.is_empty() {
                    break;
                }
            }
            succ.extend(partial.into_iter().map(|p| (Some(c), p)));
        }
        for (label, next) in succ {
            if !index.contains_key(&next) {
                index.insert(next.clone(), order.len());
                order.push(next.clone());
                queue.push_back(next.clone());
            }
            edges.push((src, label, next));
        }
    }

    let name = units
        .iter()
        .map(|u| u.name.as_str())
        .collect::<Vec<_>>()
        .join("||");
    let mut b = Unit::builder(name, interface);
    for global in &order {
        let label = global
            .iter()
            .zip(units)
            .map(|(&s, u)| u.states[s].as_str())
            .collect::<Vec<_>>()
            .join(",");
        b.state(&format!("({label})"));
    }
    b.initial = Some(0);
    for (src, label, next) in edges {
        let action = label.map(|c| alphabet.symbol(c).clone());
        b.transition_ids(src, action, index[&next])?;
    }
    b.build()
}

/// Every observable behavior of length at most `n`.
pub fn observable_behaviors_upto(unit: &Unit, n: usize) -> BTreeSet<Word> {
    let nfa = &unit.nfa;
    let mut out = BTreeSet::new();
    let mut frontier: Vec<(Word, Vec<usize>)> = vec![(Vec::new(), nfa.eps_closure([nfa.initial]))];
    out.insert(Vec::new());
    for _ in 0..n {
        let mut next_frontier = Vec::new();
        for (word, states) in &frontier {
            for (c, symbol) in unit.alphabet().iter().enumerate() {
                let label = Label::Sym(c as u32);
                let targets: Vec<usize> = states
                    .iter()
                    .flat_map(|&s| nfa.edges[s].iter())
                    .filter(|(l, _)| *l == label)
                    .map(|&(_, t)| t)
                    .collect();
                if targets.is_empty() {
                    continue;
                }
                let mut w = word.clone();
                w.push(symbol.clone());
                out.insert(w.clone());
                next_frontier.push((w, nfa.eps_closure(targets)));
            }
        }
        frontier = next_frontier;
    }
    out
}

// ---------------------------------------------------------------------------
// Text format

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "unit {}", self.name)?;
        let list = |a: &Alphabet| a.iter().map(|s| format!(" {s}")).collect::<String>();
        writeln!(f, "inputs{}", list(self.interface.inputs()))?;
        writeln!(f, "outputs{}", list(self.interface.outputs()))?;
        writeln!(f, "states {}", self.states.join(" "))?;
        writeln!(f, "initial {}", self.states[self.initial])?;
        for t in &self.transitions {
            let action = t.action.as_ref().map_or(EPS_TOKEN, Symbol::as_str);
            writeln!(
                f,
                "trans {} {} {}",
                self.states[t.src], action, self.states[t.dst]
            )?;
        }
        Ok(())
    }
}

/// Parses the unit file format.
///
/// ```text
/// unit Timer
/// inputs pause resume
/// outputs fire
/// states t0 t1
/// initial t0
/// trans t0 fire t0
/// trans t0 pause t1
/// trans t1 resume t0
/// ```
pub fn parse_unit(text: &str) -> Result<Unit> {
    let mut name: Option<String> = None;
    let mut inputs: Vec<Symbol> = Vec::new();
    let mut outputs: Vec<Symbol> = Vec::new();
    let mut states: Vec<(usize, usize, String)> = Vec::new();
    let mut initial: Option<(usize, usize, String)> = None;
    let mut transitions = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let tokens = tokenize(line);
        let Some((head, rest)) = tokens.split_first() else {
            continue;
        };
        let err =
            |column: usize, msg: String| LtsError::Parse(ParseError::new(line_no, column, msg));
        let symbols = |rest: &[crate::parse::Token<'_>]| -> Result<Vec<Symbol>> {
            rest.iter()
                .map(|t| Symbol::new(t.text).map_err(|e| err(t.column, e.to_string())))
                .collect()
        };
        match head.text {
            "unit" => match rest {
                [n] => name = Some(n.text.to_string()),
                _ => return Err(err(head.column, "unit takes exactly one name".into())),
            },
            "inputs" => inputs.extend(symbols(rest)?),
            "outputs" => outputs.extend(symbols(rest)?),
            "states" => states.extend(rest.iter().map(|t| (line_no, t.column, t.text.to_string()))),
            "initial" => match rest {
                [s] => initial = Some((line_no, s.column, s.text.to_string())),
                _ => return Err(err(head.column, "initial takes exactly one state".into())),
            },
            "trans" => match rest {
                [src, action, dst] => transitions.push((line_no, *src, *action, *dst)),
                _ => {
                    return Err(err(
                        head.column,
                        "trans takes <src> <action|eps> <dst>".into(),
                    ))
                }
            },
            other => return Err(err(head.column, format!("unknown declaration {other:?}"))),
        }
    }
    let name = name.ok_or_else(|| LtsError::Parse(ParseError::new(1, 1, "missing unit name")))?;
    let interface = Interface::new(Alphabet::new(inputs), Alphabet::new(outputs))?;
    let mut b = Unit::builder(name, interface);
    let declared: BTreeSet<&str> = states.iter().map(|(_, _, s)| s.as_str()).collect();
    for (_, _, s) in &states {
        b.state(s);
    }
    let check = |line: usize, column: usize, s: &str| {
        if declared.contains(s) {
            Ok(())
        } else {
            Err(LtsError::Parse(ParseError::new(
                line,
                column,
                format!("undeclared state {s:?}"),
            )))
        }
    };
    if let Some((line, column, s)) = &initial {
        check(*line, *column, s)?;
        b.initial(s);
    }
    for (line, src, action, dst) in transitions {
        check(line, src.column, src.text)?;
        check(line, dst.column, dst.text)?;
        let action_name = (action.text != EPS_TOKEN).then_some(action.text);
        b.transition(src.text, action_name, dst.text)
            .map_err(|e| match e {
                LtsError::OutsideInterface { .. } => {
                    LtsError::Parse(ParseError::new(line, action.column, e.to_string()))
                }
                other => other,
            })?;
    }
    b.build()
}
