use std::collections::{BTreeMap, HashMap, VecDeque};

use super::{normalize, Alphabet, Label, Nfa, Result, StateId, Symbol, Word};

/// Builds the reachable part of a product automaton.
///
/// `step` receives a pair of component states and pushes `(label, pair)`
/// successors; acceptance is decided per pair by `accept`.
fn product(
    alphabet: Alphabet,
    start: (StateId, StateId),
    accept: impl Fn(StateId, StateId) -> bool,
    mut step: impl FnMut(StateId, StateId, &mut Vec<(Label, (StateId, StateId))>),
) -> Nfa {
    let mut index: HashMap<(StateId, StateId), StateId> = HashMap::new();
    let mut queue = VecDeque::new();
    let mut nfa = Nfa::new(alphabet);
    index.insert(start, 0);
    nfa.accepting[0] = accept(start.0, start.1);
    queue.push_back(start);
    let mut succ = Vec::new();
    while let Some((p, q)) = queue.pop_front() {
        let src = index[&(p, q)];
        succ.clear();
        step(p, q, &mut succ);
        for &(label, pair) in &succ {
            let dst = match index.get(&pair) {
                Some(&d) => d,
                None => {
                    let d = nfa.add_state();
                    nfa.accepting[d] = accept(pair.0, pair.1);
                    index.insert(pair, d);
                    queue.push_back(pair);
                    d
                }
            };
            nfa.edges[src].push((label, dst));
        }
    }
    nfa
}

/// Cartesian product: accepts `L(a) ∩ L(b)`.
pub fn intersect(a: &Nfa, b: &Nfa) -> Result<Nfa> {
    a.require_same_alphabet(b)?;
    Ok(product(
        a.alphabet.clone(),
        (a.initial, b.initial),
        |p, q| a.accepting[p] && b.accepting[q],
        |p, q, out| {
            for &(la, pa) in &a.edges[p] {
                match la {
                    Label::Eps => out.push((Label::Eps, (pa, q))),
                    Label::Sym(_) => {
                        for &(lb, qb) in &b.edges[q] {
                            if lb == la {
                                out.push((la, (pa, qb)));
                            }
                        }
                    }
                }
            }
            for &(lb, qb) in &b.edges[q] {
                if lb == Label::Eps {
                    out.push((Label::Eps, (p, qb)));
                }
            }
        },
    ))
}

/// Product in which `b` skips every symbol outside its own alphabet.
///
/// Accepts `{α ∈ L(a) : α↓Σb ∈ L(b)}` over `a`'s alphabet.
pub fn lift_intersect(a: &Nfa, b: &Nfa) -> Result<Nfa> {
    b.alphabet.require_subset_of(&a.alphabet)?;
    let remap = a.alphabet.remap_into(&b.alphabet);
    Ok(product(
        a.alphabet.clone(),
        (a.initial, b.initial),
        |p, q| a.accepting[p] && b.accepting[q],
        |p, q, out| {
            for &(la, pa) in &a.edges[p] {
                match la {
                    Label::Eps => out.push((Label::Eps, (pa, q))),
                    Label::Sym(c) => match remap[c as usize] {
                        None => out.push((la, (pa, q))),
                        Some(cb) => {
                            for &(lb, qb) in &b.edges[q] {
                                if lb == Label::Sym(cb) {
                                    out.push((la, (pa, qb)));
                                }
                            }
                        }
                    },
                }
            }
            for &(lb, qb) in &b.edges[q] {
                if lb == Label::Eps {
                    out.push((Label::Eps, (p, qb)));
                }
            }
        },
    ))
}

/// Homomorphic projection onto `keep`: dropped actions become ε-moves.
pub fn project(a: &Nfa, keep: &Alphabet) -> Result<Nfa> {
    keep.require_subset_of(&a.alphabet)?;
    let remap = a.alphabet.remap_into(keep);
    let edges = a
        .edges
        .iter()
        .map(|row| {
            row.iter()
                .map(|&(label, t)| match label {
                    Label::Sym(c) => match remap[c as usize] {
                        Some(k) => (Label::Sym(k), t),
                        None => (Label::Eps, t),
                    },
                    Label::Eps => (Label::Eps, t),
                })
                .collect()
        })
        .collect();
    Ok(Nfa {
        alphabet: keep.clone(),
        initial: a.initial,
        accepting: a.accepting.clone(),
        edges,
        canonical: false,
    })
}

/// Union via a fresh initial state with ε-moves into both operands.
pub fn union(a: &Nfa, b: &Nfa) -> Result<Nfa> {
    a.require_same_alphabet(b)?;
    let mut out = Nfa::new(a.alphabet.clone());
    for src in [a, b] {
        let shift = out.num_states();
        for s in 0..src.num_states() {
            let id = out.add_state();
            out.accepting[id] = src.accepting[s];
        }
        for (s, row) in src.edges.iter().enumerate() {
            out.edges[shift + s].extend(row.iter().map(|&(l, t)| (l, shift + t)));
        }
        out.edges[0].push((Label::Eps, shift + src.initial));
    }
    Ok(out)
}

/// Concatenates exactly one arbitrary symbol: accepts `L(a)·Σ`.
pub fn append_any_symbol(a: &Nfa) -> Nfa {
    let mut out = a.clone();
    out.canonical = false;
    let fin = out.add_state();
    for s in 0..a.num_states() {
        out.accepting[s] = false;
        if a.accepting[s] {
            for c in 0..a.alphabet.len() as u32 {
                out.edges[s].push((Label::Sym(c), fin));
            }
        }
    }
    out.accepting[fin] = true;
    out
}

/// Membership with ε-closure.
pub fn accepts(a: &Nfa, word: &[Symbol]) -> Result<bool> {
    let codes = a.alphabet.encode(word)?;
    let mut current = a.eps_closure([a.initial]);
    for c in codes {
        let label = Label::Sym(c);
        let next: Vec<StateId> = current
            .iter()
            .flat_map(|&s| a.edges[s].iter())
            .filter(|(l, _)| *l == label)
            .map(|&(_, t)| t)
            .collect();
        if next.is_empty() {
            return Ok(false);
        }
        current = a.eps_closure(next);
    }
    Ok(current.iter().any(|&s| a.accepting[s]))
}

/// True iff no accepting state is reachable.
pub fn is_empty_language(a: &Nfa) -> bool {
    let mut seen = vec![false; a.num_states()];
    let mut stack = vec![a.initial];
    seen[a.initial] = true;
    while let Some(s) = stack.pop() {
        if a.accepting[s] {
            return false;
        }
        for &(_, t) in &a.edges[s] {
            if !seen[t] {
                seen[t] = true;
                stack.push(t);
            }
        }
    }
    true
}

/// Canonical automaton of an explicit finite word set, built through a trie.
pub fn from_word_set<'w>(
    words: impl IntoIterator<Item = &'w Word>,
    alphabet: &Alphabet,
) -> Result<Nfa> {
    let mut trie = Nfa::new(alphabet.clone());
    let mut children: Vec<BTreeMap<u32, StateId>> = vec![BTreeMap::new()];
    for word in words {
        let codes = alphabet.encode(word)?;
        let mut cur = 0;
        for c in codes {
            cur = match children[cur].get(&c) {
                Some(&next) => next,
                None => {
                    let next = trie.add_state();
                    children.push(BTreeMap::new());
                    children[cur].insert(c, next);
                    trie.edges[cur].push((Label::Sym(c), next));
                    next
                }
            };
        }
        trie.accepting[cur] = true;
    }
    Ok(normalize(&trie))
}
