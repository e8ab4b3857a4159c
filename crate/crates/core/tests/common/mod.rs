#![allow(dead_code)]

use std::collections::BTreeSet;

use proptest::prelude::*;
use pushin::automata::{Alphabet, Nfa, Symbol, Word};
use pushin::badspec::Regex;

pub const NAMES: [&str; 3] = ["a", "b", "c"];

/// Plain-data automaton with its own membership test, independent of the library.
#[derive(Debug, Clone)]
pub struct Raw {
    pub letters: usize,
    pub states: usize,
    pub accepting: Vec<bool>,
    /// `(src, None = ε | Some(letter), dst)`
    pub edges: Vec<(usize, Option<usize>, usize)>,
}

impl Raw {
    pub fn alphabet(&self) -> Alphabet {
        Alphabet::from_names(&NAMES[..self.letters]).unwrap()
    }

    pub fn to_nfa(&self) -> Nfa {
        let alphabet = self.alphabet();
        let mut nfa = Nfa::new(alphabet.clone());
        for _ in 1..self.states {
            nfa.add_state();
        }
        for (s, &acc) in self.accepting.iter().enumerate() {
            nfa.set_accepting(s, acc).unwrap();
        }
        for &(s, l, t) in &self.edges {
            let sym = l.map(|c| alphabet.symbol(c).clone());
            nfa.add_transition(s, sym.as_ref(), t).unwrap();
        }
        nfa
    }

    fn closure(&self, mut set: BTreeSet<usize>) -> BTreeSet<usize> {
        loop {
            let more: Vec<usize> = self
                .edges
                .iter()
                .filter(|(s, l, t)| l.is_none() && set.contains(s) && !set.contains(t))
                .map(|&(_, _, t)| t)
                .collect();
            if more.is_empty() {
                return set;
            }
            set.extend(more);
        }
    }

    pub fn accepts(&self, word: &[usize]) -> bool {
        let mut cur = self.closure(BTreeSet::from([0]));
        for &c in word {
            let next: BTreeSet<usize> = self
                .edges
                .iter()
                .filter(|(s, l, _)| *l == Some(c) && cur.contains(s))
                .map(|&(_, _, t)| t)
                .collect();
            cur = self.closure(next);
        }
        cur.iter().any(|&s| self.accepting[s])
    }
}

pub fn raw_strategy(letters: usize, max_states: usize) -> impl Strategy<Value = Raw> {
    (1..=max_states).prop_flat_map(move |n| {
        let edge = (0..n, proptest::option::weighted(0.8, 0..letters), 0..n);
        (
            proptest::collection::vec(any::<bool>(), n),
            proptest::collection::vec(edge, 0..=n * 3),
        )
            .prop_map(move |(accepting, edges)| Raw {
                letters,
                states: n,
                accepting,
                edges,
            })
    })
}

/// Every word over `0..letters` of length at most `max_len`, shortlex.
pub fn all_words(letters: usize, max_len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    let mut layer = vec![vec![]];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for c in 0..letters {
                let mut v: Vec<usize> = w.clone();
                v.push(c);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

pub fn to_word(alphabet: &Alphabet, codes: &[usize]) -> Word {
    codes.iter().map(|&c| alphabet.symbol(c).clone()).collect()
}

pub fn sym(name: &str) -> Symbol {
    Symbol::new(name).unwrap()
}

/// Backtracking regex matcher over the AST, sharing nothing with compilation.
pub fn regex_matches(regex: &Regex, word: &[Symbol]) -> bool {
    ends(regex, word, 0).contains(&word.len())
}

fn ends(regex: &Regex, word: &[Symbol], at: usize) -> BTreeSet<usize> {
    match regex {
        Regex::Atom(s) => (word.get(at) == Some(s)).then_some(at + 1).into_iter().collect(),
        Regex::Any => (at < word.len()).then_some(at + 1).into_iter().collect(),
        Regex::AnyExcept(xs) => word
            .get(at)
            .filter(|s| !xs.contains(s))
            .map(|_| at + 1)
            .into_iter()
            .collect(),
        Regex::Concat(parts) => {
            let mut cur = BTreeSet::from([at]);
            for p in parts {
                cur = cur.iter().flat_map(|&i| ends(p, word, i)).collect();
            }
            cur
        }
        Regex::Alt(parts) => parts.iter().flat_map(|p| ends(p, word, at)).collect(),
        Regex::Star(inner) => {
            let mut seen = BTreeSet::from([at]);
            let mut frontier = vec![at];
            while let Some(i) = frontier.pop() {
                for j in ends(inner, word, i) {
                    if seen.insert(j) {
                        frontier.push(j);
                    }
                }
            }
            seen
        }
    }
}
