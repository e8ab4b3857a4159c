//! Reference systems and oracles.
//!
//! The data-acquisition system (a gluer hosting Timer, Sensor and Comm) with
//! its four bad-behavior cases is bundled, as is a seeded random-system
//! generator and an integration-testing oracle that composes every
//! implementation and checks bad behaviors directly.
//!
//! The transition graphs of the data-acquisition units are reconstructions:
//! they satisfy every example sequence known for the system, but the counts
//! they produce are not expected to match published tables exactly.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::automata::{self, project_word, Alphabet, Nfa, Symbol, Word};
use crate::badspec::{self, BadPattern, BadSpec, Regex};
use crate::engine::{self, Answer, Run, TerminationCause, Verdict};
use crate::lts::{self, Interface, Unit};
use crate::system::{self, BlackBox, SystemDescription, SystemError, SystemFile};
use crate::Error;

pub const GLUER_UNIT: &str = include_str!("../data/das/gluer.unit");
pub const TIMER_UNIT: &str = include_str!("../data/das/timer.unit");
pub const SENSOR_UNIT: &str = include_str!("../data/das/sensor.unit");
pub const COMM_UNIT: &str = include_str!("../data/das/comm.unit");
pub const SYSTEM_FILE: &str = include_str!("../data/das/system.sys");
pub const CASE1_BAD: &str = include_str!("../data/bad/case1.bad");
pub const CASE2_BAD: &str = include_str!("../data/bad/case2.bad");
pub const CASE3_BAD: &str = include_str!("../data/bad/case3.bad");
pub const CASE4_BAD: &str = include_str!("../data/bad/case4.bad");
/// Expected verdicts at maxlen 10, with published per-step counts for reference.
pub const EXPECTED_MAXLEN10: &str = include_str!("../data/expected_maxlen10.json");

/// Testing order used by the experiments.
pub const EXPERIMENT_ORDER: [&str; 3] = ["Timer", "Sensor", "Comm"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Variant {
    #[default]
    Baseline,
    /// Comm stays in its post-send state after reporting `cerr`.
    CommFixed,
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "baseline" => Ok(Variant::Baseline),
            "commFixed" => Ok(Variant::CommFixed),
            other => Err(format!("unknown variant {other:?} (baseline or commFixed)")),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Baseline => "baseline",
            Variant::CommFixed => "commFixed",
        })
    }
}

/// The bundled unit file for a name, as written in the system file.
pub fn bundled_file(path: &str) -> Option<&'static str> {
    match path {
        "gluer.unit" => Some(GLUER_UNIT),
        "timer.unit" => Some(TIMER_UNIT),
        "sensor.unit" => Some(SENSOR_UNIT),
        "comm.unit" => Some(COMM_UNIT),
        _ => None,
    }
}

/// Comm with its `cerr` edge redirected back to its source.
pub fn fixed_comm(comm: &Unit) -> Result<Unit, Error> {
    let cerr = Symbol::new("cerr")?;
    Ok(comm.map_transitions(|t| {
        let mut t = t.clone();
        if t.action.as_ref() == Some(&cerr) {
            t.dst = t.src;
        }
        t
    })?)
}

pub fn build_data_acquisition_system(variant: Variant) -> Result<SystemDescription, Error> {
    let file: SystemFile = SYSTEM_FILE.parse()?;
    let sys = file.load_with(|p| {
        bundled_file(p)
            .map(str::to_string)
            .ok_or_else(|| SystemError::Io {
                path: p.into(),
                message: "not bundled".into(),
            })
    })?;
    match variant {
        Variant::Baseline => Ok(sys),
        Variant::CommFixed => {
            let comm = sys.blackboxes()[sys.blackbox_index("Comm").unwrap()]
                .implementation
                .clone()
                .expect("bundled Comm has an implementation");
            Ok(sys.with_implementation("Comm", fixed_comm(&comm)?)?)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case {
    Case1,
    Case2,
    Case3,
    Case4,
}

impl Case {
    pub const ALL: [Case; 4] = [Case::Case1, Case::Case2, Case::Case3, Case::Case4];

    pub fn bad_file(self) -> &'static str {
        match self {
            Case::Case1 => CASE1_BAD,
            Case::Case2 => CASE2_BAD,
            Case::Case3 => CASE3_BAD,
            Case::Case4 => CASE4_BAD,
        }
    }

    pub fn default_variant(self) -> Variant {
        match self {
            Case::Case3 => Variant::CommFixed,
            _ => Variant::Baseline,
        }
    }
}

impl FromStr for Case {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "case1" => Ok(Case::Case1),
            "case2" => Ok(Case::Case2),
            "case3" => Ok(Case::Case3),
            "case4" => Ok(Case::Case4),
            _ => Err(format!("unknown case {s:?} (case1 to case4)")),
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = Case::ALL.iter().position(|c| c == self).unwrap() + 1;
        write!(f, "case{n}")
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentCase {
    pub case: Case,
    pub bad_spec: BadSpec,
    pub maxlen: usize,
    pub variant: Variant,
}

impl ExperimentCase {
    /// The case's bad spec with its length window capped at `maxlen`.
    pub fn new(case: Case, maxlen: usize) -> Result<Self, Error> {
        let sys = build_data_acquisition_system(Variant::Baseline)?;
        let spec = badspec::parse_badspec(case.bad_file(), sys.alphabet())?;
        Ok(ExperimentCase {
            case,
            bad_spec: spec.with_window(0, maxlen),
            maxlen,
            variant: case.default_variant(),
        })
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }
}

pub fn run_experiment(case: &ExperimentCase) -> Result<Run, Error> {
    run_experiment_with(case, 1)
}

pub fn run_experiment_with(case: &ExperimentCase, jobs: usize) -> Result<Run, Error> {
    let sys = build_data_acquisition_system(case.variant)?;
    let m_bad = case.bad_spec.compile()?;
    let order = sys.resolve_order(&system::OrderSpec::Names(
        EXPERIMENT_ORDER.iter().map(|s| s.to_string()).collect(),
    ))?;
    Ok(engine::run_pushin_traced(&sys, &m_bad, &order, jobs)?)
}

/// Integration testing: the shortlex-least bad word the composed
/// implementations exhibit, if any.
pub fn brute_force_verdict(sys: &SystemDescription, m_bad: &Nfa) -> Result<Verdict, Error> {
    let composed = sys.compose_implementations()?;
    let both = automata::intersect(&lts::lts_to_nfa(&composed), m_bad)?;
    let witness = automata::enumerate(&both)?.next();
    Ok(Verdict {
        answer: if witness.is_some() { Answer::No } else { Answer::Yes },
        witness,
        cause: TerminationCause::Exhaustive,
        reports: Vec::new(),
    })
}

/// Words up to `max_len` on which the two sides of the decomposition theorem
/// disagree: "a behavior of the composed system and bad" versus "accepted by
/// `M_global` with every black-box projection passing its test".
pub fn decomposition_counterexamples(
    sys: &SystemDescription,
    m_bad: &Nfa,
    max_len: usize,
) -> Result<Vec<Word>, Error> {
    let composed = lts::lts_to_nfa(&sys.compose_implementations()?);
    let m_global = system::build_m_global(sys, m_bad)?;
    let all = Nfa::length_window(sys.alphabet().clone(), 0, max_len);
    let mut out = Vec::new();
    for w in automata::enumerate(&all)? {
        let lhs = automata::accepts(&composed, &w)? && automata::accepts(m_bad, &w)?;
        let mut rhs = automata::accepts(&m_global, &w)?;
        for b in sys.blackboxes() {
            if !rhs {
                break;
            }
            let unit = b.implementation.as_ref().expect("known implementation");
            rhs = lts::bbtest(unit, &project_word(&w, b.alphabet()))?;
        }
        if lhs != rhs {
            out.push(w);
        }
    }
    Ok(out)
}

/// A witness is sound when it is bad and the composed system exhibits it.
pub fn witness_is_sound(sys: &SystemDescription, m_bad: &Nfa, witness: &[Symbol]) -> Result<bool, Error> {
    let composed = sys.compose_implementations()?;
    Ok(automata::accepts(m_bad, witness)? && lts::bbtest(&composed, witness)?)
}

// ---------------------------------------------------------------------------
// Random systems

#[derive(Debug, Clone, PartialEq)]
pub struct RandomSystemParams {
    pub seed: u64,
    pub k: usize,
    pub max_states_per_unit: usize,
    pub actions_per_unit: usize,
    /// Chance that an action slot reuses an action of an earlier unit.
    pub sharing_density: f64,
    pub bad_max_len: usize,
}

impl Default for RandomSystemParams {
    fn default() -> Self {
        RandomSystemParams {
            seed: 0,
            k: 3,
            max_states_per_unit: 5,
            actions_per_unit: 4,
            sharing_density: 0.5,
            bad_max_len: 8,
        }
    }
}

fn random_unit(rng: &mut ChaCha8Rng, name: &str, actions: &[Symbol], max_states: usize) -> Result<Unit, Error> {
    let mut inputs = Vec::new();
    let mut outputs = Vec::new();
    for a in actions {
        if rng.gen_bool(0.5) {
            inputs.push(a.clone());
        } else {
            outputs.push(a.clone());
        }
    }
    let interface = Interface::new(Alphabet::new(inputs), Alphabet::new(outputs))?;
    let n = rng.gen_range(1..=max_states.max(1));
    let states: Vec<String> = (0..n).map(|i| format!("q{i}")).collect();
    let mut b = Unit::builder(name, interface);
    b.initial(&states[0]);
    let label = |rng: &mut ChaCha8Rng| -> Option<String> {
        if actions.is_empty() || rng.gen_bool(0.1) {
            None
        } else {
            Some(actions.choose(rng).unwrap().to_string())
        }
    };
    for s in 1..n {
        let src = rng.gen_range(0..s);
        let l = label(rng);
        b.transition(&states[src], l.as_deref(), &states[s])?;
    }
    for s in 0..n {
        for _ in 0..rng.gen_range(0..=2) {
            let dst = rng.gen_range(0..n);
            let l = label(rng);
            b.transition(&states[s], l.as_deref(), &states[dst])?;
        }
    }
    Ok(b.build()?)
}

/// A seeded random system in which every black-box has an implementation.
pub fn generate_random_system(params: &RandomSystemParams) -> Result<SystemDescription, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut fresh = 0usize;
    let mut pool: Vec<Symbol> = Vec::new();
    let mut next_fresh = |pool: &mut Vec<Symbol>| -> Symbol {
        let s = Symbol::new(&format!("x{fresh}")).unwrap();
        fresh += 1;
        pool.push(s.clone());
        s
    };
    let mut box_actions: Vec<Vec<Symbol>> = Vec::new();
    for _ in 0..params.k.max(1) {
        let n = rng.gen_range(1..=params.actions_per_unit.max(1));
        let mut mine: Vec<Symbol> = Vec::new();
        for _ in 0..n {
            let reusable: Vec<&Symbol> = pool.iter().filter(|s| !mine.contains(s)).collect();
            if !reusable.is_empty() && rng.gen_bool(params.sharing_density) {
                mine.push((*reusable.choose(&mut rng).unwrap()).clone());
            } else {
                mine.push(next_fresh(&mut pool));
            }
        }
        box_actions.push(mine);
    }
    let mut gluer_actions: Vec<Symbol> = pool
        .iter()
        .filter(|_| rng.gen_bool(0.5))
        .take(params.actions_per_unit.max(1))
        .cloned()
        .collect();
    if rng.gen_bool(0.5) {
        gluer_actions.push(next_fresh(&mut pool));
    }
    let gluer = random_unit(&mut rng, "G", &gluer_actions, params.max_states_per_unit)?;
    let mut boxes = Vec::new();
    for (i, actions) in box_actions.iter().enumerate() {
        let name = format!("B{}", i + 1);
        let unit = random_unit(&mut rng, &name, actions, params.max_states_per_unit)?;
        boxes.push(BlackBox::simulated(name, unit));
    }
    Ok(SystemDescription::new(gluer, boxes)?)
}

fn random_regex(rng: &mut ChaCha8Rng, alphabet: &Alphabet, depth: usize) -> Regex {
    let atom = |rng: &mut ChaCha8Rng| -> Regex {
        match rng.gen_range(0..6) {
            0 => Regex::Any,
            1 if alphabet.len() > 1 => {
                Regex::AnyExcept(vec![alphabet.symbol(rng.gen_range(0..alphabet.len())).clone()])
            }
            _ => Regex::Atom(alphabet.symbol(rng.gen_range(0..alphabet.len())).clone()),
        }
    };
    if depth == 0 {
        return atom(rng);
    }
    match rng.gen_range(0..5) {
        0 => atom(rng),
        1 => Regex::Star(Box::new(random_regex(rng, alphabet, depth - 1))),
        2 => Regex::Alt((0..2).map(|_| random_regex(rng, alphabet, depth - 1)).collect()),
        _ => Regex::Concat(
            (0..rng.gen_range(2..=3))
                .map(|_| random_regex(rng, alphabet, depth - 1))
                .collect(),
        ),
    }
}

/// A seeded random bad spec over `alphabet`: usually a regex, sometimes a list.
pub fn generate_random_badspec(seed: u64, alphabet: &Alphabet, max_len: usize) -> BadSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let maxlen = rng.gen_range(1..=max_len.max(1));
    let pattern = if rng.gen_bool(0.2) {
        let words = (0..rng.gen_range(0..=4))
            .map(|_| {
                (0..rng.gen_range(0..=maxlen))
                    .map(|_| alphabet.symbol(rng.gen_range(0..alphabet.len())).clone())
                    .collect()
            })
            .collect();
        BadPattern::List(words)
    } else {
        let core = random_regex(&mut rng, alphabet, 3);
        if rng.gen_bool(0.5) {
            let any = Regex::Star(Box::new(Regex::Any));
            BadPattern::Regex(Regex::Concat(vec![any.clone(), core, any]))
        } else {
            BadPattern::Regex(core)
        }
    };
    BadSpec {
        pattern,
        alphabet: alphabet.clone(),
        minlen: 0,
        maxlen,
    }
}
