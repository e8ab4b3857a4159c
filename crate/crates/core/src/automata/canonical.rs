//! Canonical deterministic form and the finite-language queries built on it.

use std::collections::{HashMap, VecDeque};

use num_traits::{One, Zero};

use super::{intersect, Alphabet, AutomataError, Label, Nfa, Result, Word, WordCount};

const NONE: u32 = u32::MAX;

/// Dense deterministic automaton; `next[s][c] == NONE` means no move.
#[derive(Debug, Clone)]
pub(crate) struct Dfa {
    pub alphabet: Alphabet,
    pub initial: usize,
    pub accepting: Vec<bool>,
    pub next: Vec<Vec<u32>>,
}

impl Dfa {
    fn num_states(&self) -> usize {
        self.next.len()
    }

    fn successors(&self, s: usize) -> impl Iterator<Item = (u32, usize)> + '_ {
        self.next[s]
            .iter()
            .enumerate()
            .filter(|(_, &t)| t != NONE)
            .map(|(c, &t)| (c as u32, t as usize))
    }

    fn from_canonical(nfa: &Nfa) -> Dfa {
        debug_assert!(nfa.canonical);
        let k = nfa.alphabet.len();
        let next = nfa
            .edges
            .iter()
            .map(|row| {
                let mut out = vec![NONE; k];
                for &(label, t) in row {
                    if let Label::Sym(c) = label {
                        out[c as usize] = t as u32;
                    }
                }
                out
            })
            .collect();
        Dfa {
            alphabet: nfa.alphabet.clone(),
            initial: nfa.initial,
            accepting: nfa.accepting.clone(),
            next,
        }
    }

    pub(crate) fn of(nfa: &Nfa) -> Dfa {
        if nfa.canonical {
            Dfa::from_canonical(nfa)
        } else {
            Dfa::from_canonical(&normalize(nfa))
        }
    }

    /// States in topological order, or `InfiniteLanguage` when a cycle exists.
    ///
    /// Only meaningful on trim automata, where every cycle is productive.
    fn topological_order(&self) -> Result<Vec<usize>> {
        let n = self.num_states();
        let mut indegree = vec![0usize; n];
        for s in 0..n {
            for (_, t) in self.successors(s) {
                indegree[t] += 1;
            }
        }
        let mut queue: VecDeque<usize> = (0..n).filter(|&s| indegree[s] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(s) = queue.pop_front() {
            order.push(s);
            for (_, t) in self.successors(s) {
                indegree[t] -= 1;
                if indegree[t] == 0 {
                    queue.push_back(t);
                }
            }
        }
        if order.len() == n {
            Ok(order)
        } else {
            Err(AutomataError::InfiniteLanguage)
        }
    }

    fn is_empty(&self) -> bool {
        !self.accepting.iter().any(|&a| a)
    }
}

/// Subset construction over ε-closures, reachable part only.
fn determinize(nfa: &Nfa) -> Dfa {
    let k = nfa.alphabet.len();
    let start = nfa.eps_closure([nfa.initial]);
    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut subsets = vec![start.clone()];
    index.insert(start, 0);
    let mut next: Vec<Vec<u32>> = Vec::new();
    let mut accepting = Vec::new();
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut i = 0;
    while i < subsets.len() {
        buckets.iter_mut().for_each(Vec::clear);
        for &s in &subsets[i] {
            for &(label, t) in &nfa.edges[s] {
                if let Label::Sym(c) = label {
                    buckets[c as usize].push(t);
                }
            }
        }
        accepting.push(subsets[i].iter().any(|&s| nfa.accepting[s]));
        let mut row = vec![NONE; k];
        for (c, targets) in buckets.iter().enumerate() {
            if targets.is_empty() {
                continue;
            }
            let closure = nfa.eps_closure(targets.iter().copied());
            let id = match index.get(&closure) {
                Some(&id) => id,
                None => {
                    let id = subsets.len();
                    index.insert(closure.clone(), id);
                    subsets.push(closure);
                    id
                }
            };
            row[c] = id as u32;
        }
        next.push(row);
        i += 1;
    }
    Dfa {
        alphabet: nfa.alphabet.clone(),
        initial: 0,
        accepting,
        next,
    }
}

/// Removes states that cannot reach acceptance. `None` when nothing survives.
fn trim(dfa: Dfa) -> Option<Dfa> {
    let n = dfa.num_states();
    let mut reverse: Vec<Vec<usize>> = vec![Vec::new(); n];
    for s in 0..n {
        for (_, t) in dfa.successors(s) {
            reverse[t].push(s);
        }
    }
    let mut live = dfa.accepting.clone();
    let mut stack: Vec<usize> = (0..n).filter(|&s| live[s]).collect();
    while let Some(s) = stack.pop() {
        for &p in &reverse[s] {
            if !live[p] {
                live[p] = true;
                stack.push(p);
            }
        }
    }
    if !live[dfa.initial] {
        return None;
    }
    let mut renumber = vec![NONE; n];
    let mut count = 0u32;
    for s in 0..n {
        if live[s] {
            renumber[s] = count;
            count += 1;
        }
    }
    let next = (0..n)
        .filter(|&s| live[s])
        .map(|s| {
            dfa.next[s]
                .iter()
                .map(|&t| {
                    if t == NONE {
                        NONE
                    } else {
                        renumber[t as usize]
                    }
                })
                .collect()
        })
        .collect();
    let accepting = (0..n)
        .filter(|&s| live[s])
        .map(|s| dfa.accepting[s])
        .collect();
    Some(Dfa {
        initial: renumber[dfa.initial] as usize,
        alphabet: dfa.alphabet,
        accepting,
        next,
    })
}

/// Moore-style partition refinement; returns the class of every state.
fn refine(dfa: &Dfa) -> Vec<u32> {
    let n = dfa.num_states();
    let mut class: Vec<u32> = dfa.accepting.iter().map(|&a| a as u32).collect();
    let mut classes = if class.iter().all(|&c| c == class[0]) {
        1
    } else {
        2
    };
    loop {
        let mut ids: HashMap<Vec<u32>, u32> = HashMap::new();
        let mut refined = Vec::with_capacity(n);
        for s in 0..n {
            let mut sig = Vec::with_capacity(dfa.alphabet.len() + 1);
            sig.push(class[s]);
            sig.extend(dfa.next[s].iter().map(
                |&t| {
                    if t == NONE {
                        NONE
                    } else {
                        class[t as usize]
                    }
                },
            ));
            let fresh = ids.len() as u32;
            refined.push(*ids.entry(sig).or_insert(fresh));
        }
        class = refined;
        if ids.len() == classes {
            return class;
        }
        classes = ids.len();
    }
}

/// Quotient by `class`, numbered breadth-first from the initial state.
fn quotient(dfa: &Dfa, class: &[u32]) -> Nfa {
    let classes = class.iter().max().map_or(0, |&m| m as usize + 1);
    let mut representative = vec![usize::MAX; classes];
    for (s, &c) in class.iter().enumerate() {
        if representative[c as usize] == usize::MAX {
            representative[c as usize] = s;
        }
    }
    let mut order = vec![NONE; classes];
    let mut queue = VecDeque::new();
    let start = class[dfa.initial];
    order[start as usize] = 0;
    queue.push_back(start);
    let mut visited = vec![start];
    while let Some(c) = queue.pop_front() {
        let rep = representative[c as usize];
        for (_, t) in dfa.successors(rep) {
            let tc = class[t];
            if order[tc as usize] == NONE {
                order[tc as usize] = visited.len() as u32;
                visited.push(tc);
                queue.push_back(tc);
            }
        }
    }
    let edges = visited
        .iter()
        .map(|&c| {
            dfa.successors(representative[c as usize])
                .map(|(sym, t)| (Label::Sym(sym), order[class[t] as usize] as usize))
                .collect()
        })
        .collect();
    let accepting = visited
        .iter()
        .map(|&c| dfa.accepting[representative[c as usize]])
        .collect();
    Nfa {
        alphabet: dfa.alphabet.clone(),
        initial: 0,
        accepting,
        edges,
        canonical: true,
    }
}

/// ε-free, deterministic, trim and minimal automaton with the same language.
///
/// State numbering is breadth-first in alphabet order, so equal languages give
/// identical automata. The empty language is one non-accepting state.
pub fn normalize(a: &Nfa) -> Nfa {
    if a.canonical {
        return a.clone();
    }
    match trim(determinize(a)) {
        None => Nfa::empty_language(a.alphabet.clone()),
        Some(dfa) => {
            let class = refine(&dfa);
            quotient(&dfa, &class)
        }
    }
}

/// Language equality of two automata over the same alphabet.
pub fn same_language(a: &Nfa, b: &Nfa) -> Result<bool> {
    a.require_same_alphabet(b)?;
    Ok(normalize(a) == normalize(b))
}

/// Exact number of words in a finite language.
pub fn count_words(a: &Nfa) -> Result<WordCount> {
    let dfa = Dfa::of(a);
    let order = dfa.topological_order()?;
    let mut count = vec![WordCount::zero(); dfa.num_states()];
    for &s in order.iter().rev() {
        let mut total = if dfa.accepting[s] {
            WordCount::one()
        } else {
            WordCount::zero()
        };
        for (_, t) in dfa.successors(s) {
            total += &count[t];
        }
        count[s] = total;
    }
    Ok(std::mem::take(&mut count[dfa.initial]))
}

/// Length of the longest word of a finite, nonempty language.
pub fn max_word_length(a: &Nfa) -> Result<usize> {
    let dfa = Dfa::of(a);
    let order = dfa.topological_order()?;
    if dfa.is_empty() {
        return Err(AutomataError::EmptyLanguage);
    }
    Ok(longest_paths(&dfa, &order)[dfa.initial])
}

fn longest_paths(dfa: &Dfa, order: &[usize]) -> Vec<usize> {
    let mut longest = vec![0usize; dfa.num_states()];
    for &s in order.iter().rev() {
        longest[s] = dfa
            .successors(s)
            .map(|(_, t)| longest[t] + 1)
            .max()
            .unwrap_or(0);
    }
    longest
}

/// The length-`len` prefixes of the words of a finite language.
pub fn prefixes_of_length(a: &Nfa, len: usize) -> Result<Nfa> {
    let canonical = normalize(a);
    Dfa::from_canonical(&canonical).topological_order()?;
    if super::is_empty_language(&canonical) {
        return Ok(canonical);
    }
    // Trim means every state is live, so marking all accepting gives the prefixes.
    let prefixes = canonical.all_accepting();
    let layer = Nfa::exact_length(a.alphabet.clone(), len);
    Ok(normalize(&intersect(&prefixes, &layer)?))
}

/// Words of a finite language in shortlex order, produced lazily.
pub fn enumerate(a: &Nfa) -> Result<Words> {
    Words::new(Dfa::of(a))
}

/// Shortlex iterator over a finite language.
///
/// Each length is explored depth-first in alphabet order, guided by a table of
/// the accepting-path lengths available from every state, so only prefixes of
/// actual words are visited.
pub struct Words {
    dfa: Dfa,
    lengths: Vec<Vec<bool>>,
    max_len: Option<usize>,
    target: usize,
    stack: Vec<(usize, usize)>,
    word: Vec<u32>,
    active: bool,
}

impl Words {
    fn new(dfa: Dfa) -> Result<Self> {
        let order = dfa.topological_order()?;
        let max_len = if dfa.is_empty() {
            None
        } else {
            Some(longest_paths(&dfa, &order)[dfa.initial])
        };
        let width = max_len.map_or(1, |m| m + 1);
        let mut lengths = vec![vec![false; width]; dfa.num_states()];
        for &s in order.iter().rev() {
            lengths[s][0] = dfa.accepting[s];
            for (_, t) in dfa.successors(s) {
                for r in 1..width {
                    if lengths[t][r - 1] {
                        lengths[s][r] = true;
                    }
                }
            }
        }
        Ok(Words {
            dfa,
            lengths,
            max_len,
            target: 0,
            stack: Vec::new(),
            word: Vec::new(),
            active: false,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.dfa.alphabet
    }
}

impl Iterator for Words {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        let max_len = self.max_len?;
        loop {
            if !self.active {
                if self.target > max_len {
                    return None;
                }
                let init = self.dfa.initial;
                if !self.lengths[init][self.target] {
                    self.target += 1;
                    continue;
                }
                if self.target == 0 {
                    self.target = 1;
                    return Some(Vec::new());
                }
                self.active = true;
                self.stack.clear();
                self.word.clear();
                self.stack.push((init, 0));
            }
            let depth = self.stack.len() - 1;
            let remaining = self.target - depth;
            let Some((state, cursor)) = self.stack.last_mut() else {
                unreachable!()
            };
            let state = *state;
            let mut descended = false;
            while *cursor < self.dfa.alphabet.len() {
                let c = *cursor;
                *cursor += 1;
                let t = self.dfa.next[state][c];
                if t == NONE || !self.lengths[t as usize][remaining - 1] {
                    continue;
                }
                if remaining == 1 {
                    let mut out = self.dfa.alphabet.decode(&self.word);
                    out.push(self.dfa.alphabet.symbol(c).clone());
                    return Some(out);
                }
                self.word.push(c as u32);
                self.stack.push((t as usize, 0));
                descended = true;
                break;
            }
            if descended {
                continue;
            }
            self.stack.pop();
            if self.stack.is_empty() {
                self.active = false;
                self.target += 1;
            } else {
                self.word.pop();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{format_word, from_word_set, parse_word, Symbol};

    fn ab() -> Alphabet {
        Alphabet::from_names(["a", "b"]).unwrap()
    }

    fn lang(words: &[&str], alphabet: &Alphabet) -> Nfa {
        let ws: Vec<Word> = words.iter().map(|w| parse_word(w).unwrap()).collect();
        from_word_set(&ws, alphabet).unwrap()
    }

    fn words_of(a: &Nfa) -> Vec<String> {
        enumerate(a).unwrap().map(|w| format_word(&w)).collect()
    }

    #[test]
    fn distinct_automata_for_same_language_normalize_identically() {
        let mut x = Nfa::new(ab());
        let a = Symbol::new("a").unwrap();
        let b = Symbol::new("b").unwrap();
        let s1 = x.add_state();
        let s2 = x.add_state();
        x.add_transition(0, Some(&a), s1).unwrap();
        x.add_transition(s1, Some(&b), s2).unwrap();
        x.set_accepting(s2, true).unwrap();

        let mut y = Nfa::new(ab());
        let t: Vec<_> = (0..4).map(|_| y.add_state()).collect();
        y.add_transition(0, None, t[0]).unwrap();
        y.add_transition(t[0], Some(&a), t[1]).unwrap();
        y.add_transition(0, Some(&a), t[2]).unwrap();
        y.add_transition(t[1], Some(&b), t[3]).unwrap();
        y.add_transition(t[2], Some(&b), t[3]).unwrap();
        y.set_accepting(t[3], true).unwrap();

        assert_eq!(normalize(&x), normalize(&y));
        assert_eq!(normalize(&x).num_states(), 3);
    }

    #[test]
    fn empty_language_is_one_rejecting_state() {
        let mut x = Nfa::new(ab());
        let s = x.add_state();
        x.add_transition(0, Some(&Symbol::new("a").unwrap()), s)
            .unwrap();
        let n = normalize(&x);
        assert_eq!(n.num_states(), 1);
        assert!(!n.is_accepting(0));
        assert_eq!(n, Nfa::empty_language(ab()));
    }

    #[test]
    fn eps_laden_a_star_window_becomes_three_state_chain() {
        // Thompson-style a* (4 states) followed by an ε into a counter, capped at length 2.
        let a_only = Alphabet::from_names(["a"]).unwrap();
        let a = Symbol::new("a").unwrap();
        let mut star = Nfa::new(a_only.clone());
        let s: Vec<_> = (0..4).map(|_| star.add_state()).collect();
        star.add_transition(0, None, s[0]).unwrap();
        star.add_transition(s[0], Some(&a), s[1]).unwrap();
        star.add_transition(s[1], None, s[0]).unwrap();
        star.add_transition(s[1], None, s[2]).unwrap();
        star.add_transition(0, None, s[2]).unwrap();
        star.add_transition(s[2], None, s[3]).unwrap();
        star.set_accepting(s[3], true).unwrap();
        assert_eq!(star.num_states(), 5);
        let capped = intersect(&star, &Nfa::length_window(a_only, 0, 2)).unwrap();
        let n = normalize(&capped);
        assert_eq!(n.num_states(), 3);
        assert_eq!(words_of(&n), ["", "a", "a a"]);
    }

    #[test]
    fn normalize_is_idempotent() {
        let x = lang(&["a b", "b", "b a a"], &ab());
        assert_eq!(normalize(&x), normalize(&normalize(&x)));
    }

    #[test]
    fn counting() {
        assert_eq!(count_words(&lang(&["a", "b"], &ab())).unwrap(), 2u32.into());
        assert_eq!(
            count_words(&Nfa::empty_language(ab())).unwrap(),
            0u32.into()
        );
        assert_eq!(
            count_words(&Nfa::universal(ab())),
            Err(AutomataError::InfiniteLanguage)
        );
    }

    #[test]
    fn longest_word() {
        assert_eq!(max_word_length(&Nfa::empty_word(ab())).unwrap(), 0);
        assert_eq!(max_word_length(&lang(&["a", "a b b"], &ab())).unwrap(), 3);
        assert_eq!(
            max_word_length(&Nfa::empty_language(ab())),
            Err(AutomataError::EmptyLanguage)
        );
        assert_eq!(
            max_word_length(&Nfa::universal(ab())),
            Err(AutomataError::InfiniteLanguage)
        );
    }

    #[test]
    fn prefixes() {
        let x = lang(&["a b", "b a", "b"], &ab());
        assert_eq!(words_of(&prefixes_of_length(&x, 1).unwrap()), ["a", "b"]);
        assert_eq!(
            words_of(&prefixes_of_length(&x, 2).unwrap()),
            ["a b", "b a"]
        );
        let abc = Alphabet::from_names(["a", "b", "c"]).unwrap();
        assert!(words_of(&prefixes_of_length(&lang(&["a b c"], &abc), 4).unwrap()).is_empty());
        assert!(prefixes_of_length(&Nfa::universal(ab()), 1).is_err());
        assert!(words_of(&prefixes_of_length(&Nfa::empty_language(ab()), 1).unwrap()).is_empty());
    }

    #[test]
    fn shortlex_enumeration() {
        assert_eq!(
            words_of(&lang(&["b", "a b", "a a"], &ab())),
            ["b", "a a", "a b"]
        );
        assert!(words_of(&Nfa::empty_language(ab())).is_empty());
        let x = lang(&["a b", "a", "b"], &ab());
        assert_eq!(words_of(&x), ["a", "b", "a b"]);
        assert_eq!(words_of(&Nfa::empty_word(ab())), [""]);
        assert!(enumerate(&Nfa::universal(ab())).is_err());
    }
}
