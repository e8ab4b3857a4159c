mod common;

use std::collections::BTreeSet;

use common::{all_words, raw_strategy, to_word, Raw};
use proptest::prelude::*;
use pushin::automata::{self, Alphabet, Nfa, Word};

/// Restrict to words of length ≤ 4 so every language is finite.
fn bounded(raw: &Raw) -> Nfa {
    let nfa = raw.to_nfa();
    let window = Nfa::length_window(nfa.alphabet().clone(), 0, 4);
    automata::intersect(&nfa, &window).unwrap()
}

fn brute(raw: &Raw, max_len: usize) -> BTreeSet<Vec<usize>> {
    all_words(raw.letters, max_len)
        .into_iter()
        .filter(|w| raw.accepts(w))
        .collect()
}

fn lang(nfa: &Nfa) -> Vec<Word> {
    automata::enumerate(nfa).unwrap().collect()
}

proptest! {
    #[test]
    fn intersection_is_conjunction(a in raw_strategy(3, 4), b in raw_strategy(3, 4)) {
        let prod = automata::intersect(&a.to_nfa(), &b.to_nfa()).unwrap();
        let alphabet = a.alphabet();
        for w in all_words(3, 6) {
            let word = to_word(&alphabet, &w);
            prop_assert_eq!(
                automata::accepts(&prod, &word).unwrap(),
                a.accepts(&w) && b.accepts(&w)
            );
        }
    }

    #[test]
    fn membership_matches_naive_simulation(a in raw_strategy(2, 4)) {
        let nfa = a.to_nfa();
        for w in all_words(2, 6) {
            prop_assert_eq!(automata::accepts(&nfa, &to_word(&a.alphabet(), &w)).unwrap(), a.accepts(&w));
        }
    }

    #[test]
    fn projection_composes(a in raw_strategy(3, 4)) {
        let nfa = bounded(&a);
        let ab = Alphabet::from_names(["a", "b"]).unwrap();
        let only_a = Alphabet::from_names(["a"]).unwrap();
        let twice = automata::project(&automata::project(&nfa, &ab).unwrap(), &only_a).unwrap();
        let once = automata::project(&nfa, &only_a).unwrap();
        prop_assert_eq!(automata::normalize(&twice), automata::normalize(&once));
    }

    #[test]
    fn projection_is_image_of_drop(a in raw_strategy(3, 4)) {
        let nfa = bounded(&a);
        let keep = Alphabet::from_names(["a", "c"]).unwrap();
        let expected: BTreeSet<Word> = lang(&nfa)
            .iter()
            .map(|w| automata::project_word(w, &keep))
            .collect();
        let got: BTreeSet<Word> = lang(&automata::project(&nfa, &keep).unwrap()).into_iter().collect();
        prop_assert_eq!(got, expected);
    }

    #[test]
    fn lift_intersect_filters_by_projection(a in raw_strategy(3, 4), b in raw_strategy(2, 3)) {
        let big = bounded(&a);
        let small = b.to_nfa();
        let sub = small.alphabet().clone();
        let lifted = automata::lift_intersect(&big, &small).unwrap();
        let expected: Vec<Word> = lang(&big)
            .into_iter()
            .filter(|w| automata::accepts(&small, &automata::project_word(w, &sub)).unwrap())
            .collect();
        prop_assert_eq!(lang(&lifted), expected);
    }

    #[test]
    fn normalize_is_idempotent_and_faithful(a in raw_strategy(2, 5)) {
        let nfa = a.to_nfa();
        let once = automata::normalize(&nfa);
        prop_assert_eq!(automata::normalize(&once).clone(), once.clone());
        for w in all_words(2, 6) {
            let word = to_word(&a.alphabet(), &w);
            prop_assert_eq!(automata::accepts(&once, &word).unwrap(), a.accepts(&w));
        }
    }

    #[test]
    fn counting_agrees_with_enumeration(a in raw_strategy(3, 4)) {
        let nfa = bounded(&a);
        let words = lang(&nfa);
        let expected: BTreeSet<Vec<usize>> = brute(&a, 4);
        prop_assert_eq!(words.len(), expected.len());
        prop_assert_eq!(automata::count_words(&nfa).unwrap(), words.len().into());
        match words.last() {
            Some(last) => prop_assert_eq!(automata::max_word_length(&nfa).unwrap(), last.len()),
            None => prop_assert!(automata::max_word_length(&nfa).is_err()),
        }
        let mut sorted = words.clone();
        sorted.sort_by(|x, y| x.len().cmp(&y.len()).then(x.cmp(y)));
        prop_assert_eq!(sorted, words);
    }

    #[test]
    fn prefixes_match_brute_force(a in raw_strategy(2, 4), j in 1usize..5) {
        let nfa = bounded(&a);
        let expected: BTreeSet<Word> = lang(&nfa)
            .into_iter()
            .filter(|w| w.len() >= j)
            .map(|w| w[..j].to_vec())
            .collect();
        let got: BTreeSet<Word> = lang(&automata::prefixes_of_length(&nfa, j).unwrap()).into_iter().collect();
        prop_assert_eq!(got, expected);
    }

    #[test]
    fn word_sets_round_trip(words in proptest::collection::btree_set(proptest::collection::vec(0usize..2, 0..4), 0..6)) {
        let alphabet = Alphabet::from_names(["a", "b"]).unwrap();
        let ws: Vec<Word> = words.iter().map(|w| to_word(&alphabet, w)).collect();
        let nfa = automata::from_word_set(&ws, &alphabet).unwrap();
        let got: BTreeSet<Word> = lang(&nfa).into_iter().collect();
        prop_assert_eq!(got, ws.into_iter().collect::<BTreeSet<_>>());
    }

    #[test]
    fn text_form_round_trips(a in raw_strategy(3, 4)) {
        let nfa = a.to_nfa();
        let parsed: Nfa = nfa.to_string().parse().unwrap();
        prop_assert_eq!(parsed, nfa);
    }
}

#[test]
fn infinite_languages_are_refused() {
    let u = Nfa::universal(Alphabet::from_names(["a"]).unwrap());
    assert!(automata::count_words(&u).is_err());
    assert!(automata::max_word_length(&u).is_err());
    assert!(automata::enumerate(&u).is_err());
    assert!(automata::prefixes_of_length(&u, 2).is_err());
}
