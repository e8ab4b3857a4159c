//! Line-oriented text form of an [`Nfa`].
//!
//! ```text
//! alphabet a b c
//! states 4
//! initial 0
//! accepting 1 3
//! trans 0 a 1
//! trans 1 eps 2
//! ```

use std::fmt;
use std::str::FromStr;

use super::{Alphabet, AutomataError, Label, Nfa, Result, StateId, Symbol, EPS_TOKEN};

impl fmt::Display for Nfa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "alphabet")?;
        for s in self.alphabet.iter() {
            write!(f, " {s}")?;
        }
        writeln!(f)?;
        writeln!(f, "states {}", self.num_states())?;
        writeln!(f, "initial {}", self.initial)?;
        write!(f, "accepting")?;
        for s in self.accepting_states() {
            write!(f, " {s}")?;
        }
        writeln!(f)?;
        for (src, row) in self.edges.iter().enumerate() {
            for &(label, dst) in row {
                match label {
                    Label::Eps => writeln!(f, "trans {src} {EPS_TOKEN} {dst}")?,
                    Label::Sym(c) => {
                        writeln!(f, "trans {src} {} {dst}", self.alphabet.symbol(c as usize))?
                    }
                }
            }
        }
        Ok(())
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> AutomataError {
    AutomataError::Parse {
        line,
        message: message.into(),
    }
}

fn state(token: &str, line: usize) -> Result<StateId> {
    token
        .parse()
        .map_err(|_| parse_err(line, format!("expected a state number, found {token:?}")))
}

impl FromStr for Nfa {
    type Err = AutomataError;

    fn from_str(text: &str) -> Result<Nfa> {
        let mut alphabet = None;
        let mut nfa: Option<Nfa> = None;
        let mut initial = 0;
        let mut accepting: Vec<(usize, StateId)> = Vec::new();
        let mut transitions: Vec<(usize, StateId, Option<Symbol>, StateId)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("");
            let mut tokens = content.split_whitespace();
            let Some(keyword) = tokens.next() else {
                continue;
            };
            let rest: Vec<&str> = tokens.collect();
            match keyword {
                "alphabet" => {
                    let symbols = rest
                        .iter()
                        .map(|t| Symbol::new(t).map_err(|e| parse_err(line, e.to_string())))
                        .collect::<Result<Vec<_>>>()?;
                    alphabet = Some(Alphabet::new(symbols));
                }
                "states" => {
                    let [n] = rest[..] else {
                        return Err(parse_err(line, "states takes one count"));
                    };
                    let n = state(n, line)?;
                    if n == 0 {
                        return Err(parse_err(line, "an automaton needs at least one state"));
                    }
                    let alphabet = alphabet
                        .clone()
                        .ok_or_else(|| parse_err(line, "alphabet must precede states"))?;
                    let mut a = Nfa::new(alphabet);
                    for _ in 1..n {
                        a.add_state();
                    }
                    nfa = Some(a);
                }
                "initial" => {
                    let [s] = rest[..] else {
                        return Err(parse_err(line, "initial takes one state"));
                    };
                    initial = state(s, line)?;
                }
                "accepting" => {
                    for t in rest {
                        accepting.push((line, state(t, line)?));
                    }
                }
                "trans" => {
                    let [src, label, dst] = rest[..] else {
                        return Err(parse_err(line, "trans takes <src> <action|eps> <dst>"));
                    };
                    let symbol = if label == EPS_TOKEN {
                        None
                    } else {
                        Some(Symbol::new(label).map_err(|e| parse_err(line, e.to_string()))?)
                    };
                    transitions.push((line, state(src, line)?, symbol, state(dst, line)?));
                }
                other => return Err(parse_err(line, format!("unknown declaration {other:?}"))),
            }
        }
        let mut nfa = nfa.ok_or_else(|| parse_err(0, "missing states declaration"))?;
        nfa.set_initial(initial)
            .map_err(|e| parse_err(0, e.to_string()))?;
        for (line, s) in accepting {
            nfa.set_accepting(s, true)
                .map_err(|e| parse_err(line, e.to_string()))?;
        }
        for (line, src, symbol, dst) in transitions {
            nfa.add_transition(src, symbol.as_ref(), dst)
                .map_err(|e| parse_err(line, e.to_string()))?;
        }
        Ok(nfa)
    }
}
