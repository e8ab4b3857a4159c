//! Systems of black-boxes hosted by a gluer.
//!
//! The gluer is fully known. Each black-box contributes an interface and,
//! optionally, an oracle (and for simulated boxes the implementing [`Unit`]).

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::automata::{self, Alphabet, AutomataError, Label, Nfa, Symbol};
use crate::lts::{self, BlackBoxOracle, Interface, LtsError, Unit};
use crate::parse::{tokenize, ParseError};

#[derive(Debug, Error)]
pub enum SystemError {
    #[error("a system needs at least one black-box")]
    NoBlackBoxes,
    #[error("duplicate unit name {0}")]
    DuplicateName(String),
    #[error("black-box {name}: implementation interface {found} differs from declared {declared}")]
    InterfaceMismatch {
        name: String,
        declared: String,
        found: String,
    },
    #[error("action {0} is not in the system alphabet")]
    UnknownAction(Symbol),
    #[error("black-box {0} has no implementation")]
    MissingImplementation(String),
    #[error("unknown black-box {0:?} in order")]
    UnknownBlackBox(String),
    #[error("order must name every black-box exactly once")]
    BadOrder,
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<SystemError>,
    },
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Lts(#[from] LtsError),
    #[error(transparent)]
    Automata(#[from] AutomataError),
}

pub type Result<T, E = SystemError> = std::result::Result<T, E>;

#[derive(Clone)]
pub struct BlackBox {
    pub name: String,
    pub interface: Interface,
    pub oracle: Option<Arc<dyn BlackBoxOracle>>,
    /// Known only for simulated boxes.
    pub implementation: Option<Unit>,
}

impl BlackBox {
    /// A box with nothing behind its interface.
    pub fn opaque(name: impl Into<String>, interface: Interface) -> Self {
        BlackBox {
            name: name.into(),
            interface,
            oracle: None,
            implementation: None,
        }
    }

    /// A box answering queries from a given oracle.
    pub fn with_oracle(name: impl Into<String>, oracle: Arc<dyn BlackBoxOracle>) -> Self {
        BlackBox {
            name: name.into(),
            interface: oracle.interface().clone(),
            oracle: Some(oracle),
            implementation: None,
        }
    }

    /// A simulated box: `unit` is both the oracle and the known implementation.
    pub fn simulated(name: impl Into<String>, unit: Unit) -> Self {
        BlackBox {
            name: name.into(),
            interface: unit.interface().clone(),
            oracle: Some(Arc::new(unit.clone())),
            implementation: Some(unit),
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        self.interface.alphabet()
    }
}

impl fmt::Debug for BlackBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BlackBox")
            .field("name", &self.name)
            .field("interface", &self.interface)
            .field("oracle", &self.oracle.is_some())
            .field("implementation", &self.implementation)
            .finish()
    }
}

/// Units sharing an action; index 0 is the gluer, `i` the `i`-th black-box.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    pub action: Symbol,
    pub members: BTreeSet<usize>,
}

#[derive(Debug, Clone)]
pub struct SystemDescription {
    gluer: Unit,
    blackboxes: Vec<BlackBox>,
    alphabet: Alphabet,
}

impl SystemDescription {
    pub fn new(gluer: Unit, blackboxes: Vec<BlackBox>) -> Result<Self> {
        if blackboxes.is_empty() {
            return Err(SystemError::NoBlackBoxes);
        }
        let mut names = BTreeSet::from([gluer.name().to_string()]);
        for b in &blackboxes {
            if !names.insert(b.name.clone()) {
                return Err(SystemError::DuplicateName(b.name.clone()));
            }
            if let Some(unit) = &b.implementation {
                if unit.interface() != &b.interface {
                    return Err(SystemError::InterfaceMismatch {
                        name: b.name.clone(),
                        declared: describe(&b.interface),
                        found: describe(unit.interface()),
                    });
                }
            }
            if let Some(oracle) = &b.oracle {
                if oracle.interface().alphabet() != b.alphabet() {
                    return Err(SystemError::InterfaceMismatch {
                        name: b.name.clone(),
                        declared: describe(&b.interface),
                        found: describe(oracle.interface()),
                    });
                }
            }
        }
        let alphabet = blackboxes
            .iter()
            .fold(gluer.alphabet().clone(), |acc, b| acc.union(b.alphabet()));
        Ok(SystemDescription {
            gluer,
            blackboxes,
            alphabet,
        })
    }

    pub fn gluer(&self) -> &Unit {
        &self.gluer
    }

    pub fn blackboxes(&self) -> &[BlackBox] {
        &self.blackboxes
    }

    pub fn k(&self) -> usize {
        self.blackboxes.len()
    }

    /// `Σ = Σ_0 ∪ … ∪ Σ_k`.
    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    /// Union of the black-box interfaces.
    pub fn blackbox_alphabet(&self) -> Alphabet {
        self.blackboxes
            .iter()
            .fold(Alphabet::empty(), |acc, b| acc.union(b.alphabet()))
    }

    pub fn blackbox_index(&self, name: &str) -> Option<usize> {
        self.blackboxes.iter().position(|b| b.name == name)
    }

    /// Replaces the implementation (and oracle) of a black-box.
    pub fn with_implementation(&self, name: &str, unit: Unit) -> Result<Self> {
        let i = self
            .blackbox_index(name)
            .ok_or_else(|| SystemError::UnknownBlackBox(name.to_string()))?;
        let mut boxes = self.blackboxes.clone();
        boxes[i] = BlackBox::simulated(name, unit);
        SystemDescription::new(self.gluer.clone(), boxes)
    }

    /// The full system from the gluer and every implementation.
    pub fn compose_implementations(&self) -> Result<Unit> {
        let mut units = vec![&self.gluer];
        for b in &self.blackboxes {
            units.push(
                b.implementation
                    .as_ref()
                    .ok_or_else(|| SystemError::MissingImplementation(b.name.clone()))?,
            );
        }
        Ok(lts::compose(&units)?)
    }

    pub fn resolve_order(&self, order: &OrderSpec) -> Result<Vec<usize>> {
        match order {
            OrderSpec::Auto => {
                let mut idx: Vec<usize> = (0..self.k()).collect();
                idx.sort_by_key(|&i| self.blackboxes[i].interface.len());
                Ok(idx)
            }
            OrderSpec::Names(names) => {
                let mut idx = Vec::with_capacity(names.len());
                for n in names {
                    let i = self
                        .blackbox_index(n)
                        .ok_or_else(|| SystemError::UnknownBlackBox(n.clone()))?;
                    if idx.contains(&i) {
                        return Err(SystemError::BadOrder);
                    }
                    idx.push(i);
                }
                if idx.len() != self.k() {
                    return Err(SystemError::BadOrder);
                }
                Ok(idx)
            }
        }
    }
}

fn describe(i: &Interface) -> String {
    format!("inputs {} outputs {}", i.inputs(), i.outputs())
}

/// Black-box testing order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum OrderSpec {
    /// Ascending interface size, ties by declaration order.
    #[default]
    Auto,
    Names(Vec<String>),
}

impl FromStr for OrderSpec {
    type Err = SystemError;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(OrderSpec::Auto);
        }
        let names: Vec<String> = s.split(',').map(|n| n.trim().to_string()).collect();
        if names.iter().any(String::is_empty) {
            return Err(SystemError::BadOrder);
        }
        Ok(OrderSpec::Names(names))
    }
}

pub fn signature(sys: &SystemDescription, action: &Symbol) -> Result<Signature> {
    if !sys.alphabet.contains(action) {
        return Err(SystemError::UnknownAction(action.clone()));
    }
    let mut members = BTreeSet::new();
    if sys.gluer.alphabet().contains(action) {
        members.insert(0);
    }
    for (i, b) in sys.blackboxes.iter().enumerate() {
        if b.alphabet().contains(action) {
            members.insert(i + 1);
        }
    }
    Ok(Signature {
        action: action.clone(),
        members,
    })
}

/// The gluer with every black-box free-running: one state per gluer state,
/// all accepting, with self-loops on every action the gluer does not own.
pub fn pessimistic_automaton(sys: &SystemDescription) -> Nfa {
    let gluer = sys.gluer.as_nfa();
    let sigma = &sys.alphabet;
    let remap = gluer.alphabet().remap_into(sigma);
    let free: Vec<u32> = sigma
        .iter()
        .enumerate()
        .filter(|(_, a)| !sys.gluer.alphabet().contains(a))
        .map(|(c, _)| c as u32)
        .collect();
    let mut nfa = Nfa::new(sigma.clone());
    for _ in 1..gluer.num_states() {
        nfa.add_state();
    }
    nfa.set_initial(gluer.initial()).expect("gluer state");
    for s in 0..gluer.num_states() {
        nfa.set_accepting(s, true).expect("gluer state");
        for &(label, t) in gluer.transitions_from(s) {
            let label = match label {
                Label::Eps => Label::Eps,
                Label::Sym(c) => Label::Sym(remap[c as usize].expect("gluer action in Σ")),
            };
            nfa.add_edge(s, label, t).expect("gluer state");
        }
        for &c in &free {
            nfa.add_edge(s, Label::Sym(c), s).expect("gluer state");
        }
    }
    nfa
}

/// `M_global`: pessimistic behaviors that are also bad, canonical.
pub fn build_m_global(sys: &SystemDescription, m_bad: &Nfa) -> Result<Nfa> {
    let product = automata::intersect(&pessimistic_automaton(sys), m_bad)?;
    Ok(automata::normalize(&product))
}

// ---------------------------------------------------------------------------
// System files

/// One `blackbox` line of a system file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlackBoxDecl {
    pub name: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub implementation: Option<String>,
}

/// The syntax of a system file, before any referenced file is loaded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemFile {
    pub gluer: String,
    pub blackboxes: Vec<BlackBoxDecl>,
}

impl FromStr for SystemFile {
    type Err = SystemError;

    /// ```text
    /// gluer gluer.unit
    /// blackbox Timer inputs pause resume outputs fire impl timer.unit
    /// ```
    fn from_str(text: &str) -> Result<Self> {
        let mut gluer = None;
        let mut blackboxes = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let tokens = tokenize(line);
            let Some((head, rest)) = tokens.split_first() else {
                continue;
            };
            let err = |column: usize, msg: String| {
                SystemError::Parse(ParseError::new(line_no, column, msg))
            };
            match head.text {
                "gluer" => match rest {
                    [path] if gluer.is_none() => gluer = Some(path.text.to_string()),
                    [_] => return Err(err(head.column, "duplicate gluer declaration".into())),
                    _ => return Err(err(head.column, "gluer takes one path".into())),
                },
                "blackbox" => {
                    let Some((name, rest)) = rest.split_first() else {
                        return Err(err(head.column, "blackbox needs a name".into()));
                    };
                    let mut decl = BlackBoxDecl {
                        name: name.text.to_string(),
                        inputs: Vec::new(),
                        outputs: Vec::new(),
                        implementation: None,
                    };
                    let mut section: Option<&str> = None;
                    let mut iter = rest.iter();
                    while let Some(t) = iter.next() {
                        match t.text {
                            "inputs" | "outputs" => section = Some(t.text),
                            "impl" => {
                                let path = iter
                                    .next()
                                    .ok_or_else(|| err(t.column, "impl takes a path".into()))?;
                                if decl.implementation.is_some() {
                                    return Err(err(t.column, "duplicate impl".into()));
                                }
                                decl.implementation = Some(path.text.to_string());
                                section = None;
                            }
                            action => {
                                Symbol::new(action).map_err(|e| err(t.column, e.to_string()))?;
                                match section {
                                    Some("inputs") => decl.inputs.push(action.to_string()),
                                    Some(_) => decl.outputs.push(action.to_string()),
                                    None => return Err(err(
                                        t.column,
                                        format!(
                                            "expected inputs, outputs or impl, found {action:?}"
                                        ),
                                    )),
                                }
                            }
                        }
                    }
                    blackboxes.push(decl);
                }
                other => return Err(err(head.column, format!("unknown declaration {other:?}"))),
            }
        }
        let gluer = gluer.ok_or_else(|| {
            SystemError::Parse(ParseError::new(1, 1, "missing gluer declaration"))
        })?;
        Ok(SystemFile { gluer, blackboxes })
    }
}

impl fmt::Display for SystemFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "gluer {}", self.gluer)?;
        for b in &self.blackboxes {
            write!(f, "blackbox {} inputs", b.name)?;
            for a in &b.inputs {
                write!(f, " {a}")?;
            }
            write!(f, " outputs")?;
            for a in &b.outputs {
                write!(f, " {a}")?;
            }
            if let Some(p) = &b.implementation {
                write!(f, " impl {p}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl SystemFile {
    /// Resolves referenced unit files through `load`, which maps a path as
    /// written in the file to its contents.
    pub fn load_with(
        &self,
        mut load: impl FnMut(&str) -> Result<String>,
    ) -> Result<SystemDescription> {
        let mut unit = |path: &str| -> Result<Unit> {
            let text = load(path)?;
            lts::parse_unit(&text).map_err(|e| SystemError::InFile {
                path: PathBuf::from(path),
                source: Box::new(e.into()),
            })
        };
        let gluer = unit(&self.gluer)?;
        let mut boxes = Vec::new();
        for d in &self.blackboxes {
            let interface = Interface::from_names(&d.inputs, &d.outputs)?;
            let b = match &d.implementation {
                Some(path) => {
                    let u = unit(path)?;
                    if u.interface() != &interface {
                        return Err(SystemError::InterfaceMismatch {
                            name: d.name.clone(),
                            declared: describe(&interface),
                            found: describe(u.interface()),
                        });
                    }
                    BlackBox::simulated(d.name.clone(), u)
                }
                None => BlackBox::opaque(d.name.clone(), interface),
            };
            boxes.push(b);
        }
        SystemDescription::new(gluer, boxes)
    }
}

/// Reads a system file; unit paths are relative to the file's directory.
pub fn load_system(path: &Path) -> Result<SystemDescription> {
    let in_file = |e: SystemError| SystemError::InFile {
        path: path.to_path_buf(),
        source: Box::new(e),
    };
    let text = read(path)?;
    let file: SystemFile = text.parse().map_err(in_file)?;
    let base = path.parent().unwrap_or(Path::new("."));
    file.load_with(|p| read(&base.join(p)))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| SystemError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}
