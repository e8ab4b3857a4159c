//! The push-in procedure.
//!
//! Black-boxes are unit-tested one at a time. Step `i` projects the current
//! auxiliary automaton `A_i` onto the box's interface, runs the resulting test
//! sequences `U_i` layer by layer (a length-`j` prefix is tried only if its
//! length-`j-1` prefix passed), and filters `A_i` by the survivors to get
//! `A_{i+1}` over the boxes not yet tested.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::automata::{self, format_word, Alphabet, AutomataError, Nfa, Symbol, Word, WordCount};
use crate::lts::BlackBoxOracle;
use crate::system::{self, SystemDescription, SystemError};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("oracle for {blackbox} failed on [{word}]: {message}")]
    Oracle {
        blackbox: String,
        word: String,
        message: String,
    },
    #[error("black-box {0} has no oracle")]
    MissingOracle(String),
    #[error("order must be a permutation of 0..{0}")]
    BadOrder(usize),
    #[error("witness reconstruction failed at step {0}")]
    Inconsistent(usize),
    #[error(transparent)]
    Automata(#[from] AutomataError),
    #[error(transparent)]
    System(#[from] SystemError),
}

pub type Result<T, E = EngineError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Answer {
    Yes,
    No,
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Answer::Yes => "yes",
            Answer::No => "no",
        })
    }
}

/// Why the procedure stopped. Steps are numbered from 1 in testing order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminationCause {
    /// No bad behavior survives even with every black-box unconstrained.
    GlobalEmpty,
    SurvivorsEmpty {
        step: usize,
    },
    AuxAcceptsEmpty {
        step: usize,
    },
    LastStepNonEmpty,
    /// Decided by integration testing of the composed implementations.
    Exhaustive,
}

impl fmt::Display for TerminationCause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TerminationCause::GlobalEmpty => write!(f, "GlobalEmpty"),
            TerminationCause::SurvivorsEmpty { step } => write!(f, "SurvivorsEmpty({step})"),
            TerminationCause::AuxAcceptsEmpty { step } => write!(f, "AuxAcceptsEmpty({step})"),
            TerminationCause::LastStepNonEmpty => write!(f, "LastStepNonEmpty"),
            TerminationCause::Exhaustive => write!(f, "Exhaustive"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepReport {
    pub i: usize,
    pub blackbox: String,
    pub count_a: WordCount,
    pub count_u: WordCount,
    pub count_suv: WordCount,
    pub tests_run: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub answer: Answer,
    /// A global bad behavior, present exactly when the answer is no.
    pub witness: Option<Word>,
    pub cause: TerminationCause,
    pub reports: Vec<StepReport>,
}

/// Everything one step computed.
#[derive(Debug, Clone)]
pub struct StepState {
    /// 1-based position in the testing order.
    pub i: usize,
    /// Index into the system's black-boxes.
    pub blackbox: usize,
    /// `Σ_i`.
    pub sigma: Alphabet,
    /// `Σ_i ∪ … ∪ Σ_k`.
    pub rest: Alphabet,
    pub aux: Nfa,
    pub unit: Option<Nfa>,
    pub survivors: Option<Nfa>,
    pub tests_run: u64,
    pub layers: Vec<Nfa>,
}

/// A finished run with the intermediate automata kept for inspection.
#[derive(Debug, Clone)]
pub struct Run {
    pub verdict: Verdict,
    pub m_global: Nfa,
    pub steps: Vec<StepState>,
}

/// `A_1`: `M_global` projected onto the black-box actions.
pub fn initial_auxiliary(m_global: &Nfa, blackbox_alphabets: &[Alphabet]) -> Result<Nfa> {
    let keep = blackbox_alphabets
        .iter()
        .fold(Alphabet::empty(), |acc, a| acc.union(a));
    Ok(automata::normalize(&automata::project(m_global, &keep)?))
}

/// `U_i`: the test sequences for box `i`.
pub fn unit_tsa(aux: &Nfa, sigma_i: &Alphabet) -> Result<Nfa> {
    Ok(automata::normalize(&automata::project(aux, sigma_i)?))
}

/// `A_i` from `A_{i-1}`: keep the words whose projection survived, then drop
/// the actions of the box just tested.
pub fn next_auxiliary(prev: &Nfa, survivors: &Nfa, rest: &Alphabet) -> Result<Nfa> {
    let filtered = automata::lift_intersect(prev, survivors)?;
    Ok(automata::normalize(&automata::project(&filtered, rest)?))
}

pub fn check_empty_word_shortcut(aux: &Nfa) -> Result<bool> {
    Ok(automata::accepts(aux, &[])?)
}

#[derive(Debug, Clone)]
pub struct SurvivingSet {
    pub survivors: Nfa,
    pub tests_run: u64,
    /// `Θ_0, Θ_1, …` up to the last job that ran.
    pub layers: Vec<Nfa>,
}

/// Runs the layered jobs for one black-box.
///
/// `jobs` bounds the number of concurrent queries within a layer; results are
/// merged in shortlex order, so the outcome does not depend on it.
pub fn surviving_set(
    name: &str,
    oracle: &dyn BlackBoxOracle,
    unit: &Nfa,
    jobs: usize,
) -> Result<SurvivingSet> {
    let sigma = unit.alphabet().clone();
    let lambda = Nfa::empty_word(sigma.clone());
    let mut layers = vec![lambda];
    let mut passed: Vec<Word> = vec![Vec::new()];
    let mut tests_run = 0u64;
    if !automata::is_empty_language(unit) {
        let m = automata::max_word_length(unit)?;
        for j in 1..=m {
            let p = automata::prefixes_of_length(unit, j)?;
            let extend = automata::append_any_symbol(layers.last().unwrap());
            let p_hat = automata::normalize(&automata::intersect(&p, &extend)?);
            let candidates: Vec<Word> = automata::enumerate(&p_hat)?.collect();
            tests_run += candidates.len() as u64;
            let answers = query_all(name, oracle, &candidates, jobs)?;
            let theta: Vec<Word> = candidates
                .into_iter()
                .zip(answers)
                .filter_map(|(w, ok)| ok.then_some(w))
                .collect();
            layers.push(automata::from_word_set(&theta, &sigma)?);
            if theta.is_empty() {
                break;
            }
            passed.extend(theta);
        }
    }
    let passed = automata::from_word_set(&passed, &sigma)?;
    let survivors = automata::normalize(&automata::intersect(unit, &passed)?);
    Ok(SurvivingSet {
        survivors,
        tests_run,
        layers,
    })
}

fn query_all(
    name: &str,
    oracle: &dyn BlackBoxOracle,
    words: &[Word],
    jobs: usize,
) -> Result<Vec<bool>> {
    let ask = |w: &Word| {
        oracle.query(w).map_err(|e| EngineError::Oracle {
            blackbox: name.to_string(),
            word: format_word(w),
            message: e.message,
        })
    };
    if jobs <= 1 || words.len() < 2 {
        return words.iter().map(ask).collect();
    }
    let chunk = words.len().div_ceil(jobs);
    std::thread::scope(|scope| {
        let handles: Vec<_> = words
            .chunks(chunk)
            .map(|part| scope.spawn(move || part.iter().map(ask).collect::<Result<Vec<_>>>()))
            .collect();
        let mut out = Vec::with_capacity(words.len());
        for h in handles {
            out.extend(h.join().expect("oracle thread panicked")?);
        }
        Ok(out)
    })
}

/// Runs the procedure and returns only the verdict.
pub fn run_pushin(
    sys: &SystemDescription,
    m_bad: &Nfa,
    order: &[usize],
    jobs: usize,
) -> Result<Verdict> {
    Ok(run_pushin_traced(sys, m_bad, order, jobs)?.verdict)
}

/// Runs the procedure over the black-boxes in `order` (indices into
/// `sys.blackboxes()`).
pub fn run_pushin_traced(
    sys: &SystemDescription,
    m_bad: &Nfa,
    order: &[usize],
    jobs: usize,
) -> Result<Run> {
    let k = sys.k();
    let mut seen = vec![false; k];
    if order.len() != k
        || order
            .iter()
            .any(|&b| b >= k || std::mem::replace(&mut seen[b], true))
    {
        return Err(EngineError::BadOrder(k));
    }
    let m_global = system::build_m_global(sys, m_bad)?;
    let sigmas: Vec<Alphabet> = order
        .iter()
        .map(|&b| sys.blackboxes()[b].alphabet().clone())
        .collect();
    let rests: Vec<Alphabet> = (0..k)
        .map(|i| {
            sigmas[i..]
                .iter()
                .fold(Alphabet::empty(), |acc, a| acc.union(a))
        })
        .collect();
    let mut run = Run {
        verdict: Verdict {
            answer: Answer::Yes,
            witness: None,
            cause: TerminationCause::GlobalEmpty,
            reports: Vec::new(),
        },
        m_global,
        steps: Vec::new(),
    };
    if automata::is_empty_language(&run.m_global) {
        return Ok(run);
    }

    let mut aux = initial_auxiliary(&run.m_global, &sigmas)?;
    for (pos, &b) in order.iter().enumerate() {
        let i = pos + 1;
        let blackbox = &sys.blackboxes()[b];
        let mut state = StepState {
            i,
            blackbox: b,
            sigma: sigmas[pos].clone(),
            rest: rests[pos].clone(),
            aux: aux.clone(),
            unit: None,
            survivors: None,
            tests_run: 0,
            layers: Vec::new(),
        };
        let count_a = automata::count_words(&aux)?;

        if check_empty_word_shortcut(&aux)? {
            run.verdict.reports.push(StepReport {
                i,
                blackbox: blackbox.name.clone(),
                count_a,
                count_u: WordCount::default(),
                count_suv: WordCount::default(),
                tests_run: 0,
            });
            run.steps.push(state);
            let witness = bad_gen(i, &[], &run.steps, &run.m_global)?;
            run.verdict.answer = Answer::No;
            run.verdict.witness = Some(witness);
            run.verdict.cause = TerminationCause::AuxAcceptsEmpty { step: i };
            return Ok(run);
        }

        let unit = unit_tsa(&aux, &sigmas[pos])?;
        let oracle = blackbox
            .oracle
            .as_deref()
            .ok_or_else(|| EngineError::MissingOracle(blackbox.name.clone()))?;
        let suv = surviving_set(&blackbox.name, oracle, &unit, jobs)?;
        run.verdict.reports.push(StepReport {
            i,
            blackbox: blackbox.name.clone(),
            count_a,
            count_u: automata::count_words(&unit)?,
            count_suv: automata::count_words(&suv.survivors)?,
            tests_run: suv.tests_run,
        });
        let empty = automata::is_empty_language(&suv.survivors);
        state.unit = Some(unit);
        state.tests_run = suv.tests_run;
        state.layers = suv.layers;
        state.survivors = Some(suv.survivors);
        run.steps.push(state);

        if empty {
            run.verdict.cause = TerminationCause::SurvivorsEmpty { step: i };
            return Ok(run);
        }
        let survivors = run.steps[pos].survivors.as_ref().unwrap();
        if i == k {
            let first = automata::enumerate(survivors)?
                .next()
                .ok_or(EngineError::Inconsistent(i))?;
            let witness = bad_gen(i, &first, &run.steps, &run.m_global)?;
            run.verdict.answer = Answer::No;
            run.verdict.witness = Some(witness);
            run.verdict.cause = TerminationCause::LastStepNonEmpty;
            return Ok(run);
        }
        aux = next_auxiliary(&aux, survivors, &rests[pos + 1])?;
    }
    unreachable!("the last step always terminates")
}

/// Words over `alphabet` whose projection onto `word`'s alphabet is `word`.
fn inverse_projection(alphabet: &Alphabet, sub: &Alphabet, word: &[Symbol]) -> Result<Nfa> {
    let exact = Nfa::word(sub.clone(), word)?;
    Ok(automata::lift_intersect(
        &Nfa::universal(alphabet.clone()),
        &exact,
    )?)
}

fn first_word(nfa: &Nfa, step: usize) -> Result<Word> {
    automata::enumerate(nfa)?
        .next()
        .ok_or(EngineError::Inconsistent(step))
}

/// Lifts a step-`j` sequence to step `j-1`: the shortlex-least word of
/// `A_{j-1}` whose projection onto `Σ_{j-1}` survived and whose projection
/// onto the later boxes is `alpha_j`. Step 1 returns `alpha_j` unchanged.
pub fn select_step(
    j: usize,
    alpha_j: &[Symbol],
    steps: &[StepState],
    _m_global: &Nfa,
) -> Result<Word> {
    if j <= 1 {
        return Ok(alpha_j.to_vec());
    }
    let prev = &steps[j - 2];
    let cur_rest = &steps[j - 1].rest;
    let survivors = prev
        .survivors
        .as_ref()
        .ok_or(EngineError::Inconsistent(j))?;
    let candidates = automata::intersect(
        &prev.aux,
        &inverse_projection(&prev.rest, cur_rest, alpha_j)?,
    )?;
    let candidates = automata::lift_intersect(&candidates, survivors)?;
    first_word(&automata::normalize(&candidates), j)
}

/// Lifts a step-`j` sequence all the way to a word of `M_global`.
pub fn bad_gen(j: usize, alpha_j: &[Symbol], steps: &[StepState], m_global: &Nfa) -> Result<Word> {
    let mut alpha = alpha_j.to_vec();
    for step in (2..=j).rev() {
        alpha = select_step(step, &alpha, steps, m_global)?;
    }
    let rest_1 = &steps[0].rest;
    let candidates = automata::intersect(
        m_global,
        &inverse_projection(m_global.alphabet(), rest_1, &alpha)?,
    )?;
    first_word(&automata::normalize(&candidates), 1)
}

// ---------------------------------------------------------------------------
// JSON report

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepJson {
    pub i: usize,
    pub blackbox: String,
    #[serde(rename = "countA")]
    pub count_a: String,
    #[serde(rename = "countU")]
    pub count_u: String,
    #[serde(rename = "countSUV")]
    pub count_suv: String,
    #[serde(rename = "testsRun")]
    pub tests_run: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReportJson {
    pub mode: String,
    pub verdict: Answer,
    pub cause: String,
    pub witness: Option<Vec<String>>,
    pub steps: Vec<StepJson>,
}

impl Verdict {
    pub fn to_report(&self, mode: &str) -> ReportJson {
        ReportJson {
            mode: mode.to_string(),
            verdict: self.answer,
            cause: self.cause.to_string(),
            witness: self
                .witness
                .as_ref()
                .map(|w| w.iter().map(|s| s.to_string()).collect()),
            steps: self
                .reports
                .iter()
                .map(|r| StepJson {
                    i: r.i,
                    blackbox: r.blackbox.clone(),
                    count_a: r.count_a.to_string(),
                    count_u: r.count_u.to_string(),
                    count_suv: r.count_suv.to_string(),
                    tests_run: r.tests_run.to_string(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self, mode: &str) -> String {
        serde_json::to_string_pretty(&self.to_report(mode)).expect("plain data serializes")
    }
}
