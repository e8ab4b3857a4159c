//! Acceptance suite: one PASS/FAIL line per criterion.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use common::{all_words, to_word, Raw};
use num_bigint::BigUint;
use pushin::automata::{self, parse_word, Alphabet, Nfa, Word};
use pushin::badspec::parse_badspec;
use pushin::engine::{self, Answer, StepReport};
use pushin::harness::{self, Case, ExperimentCase, RandomSystemParams, Variant};
use pushin::lts::{bbtest, parse_unit};
use pushin::system::{self, SystemDescription};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// Witnesses collected for the soundness criterion.
type Witnesses = Vec<(String, SystemDescription, Nfa, Word)>;

fn random_params(seed: u64, max_actions: usize) -> RandomSystemParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x2545_f491_4f6c_dd1d));
    RandomSystemParams {
        seed,
        k: rng.gen_range(1..=3),
        max_states_per_unit: rng.gen_range(1..=5),
        actions_per_unit: rng.gen_range(1..=max_actions),
        sharing_density: rng.gen_range(0.2..0.8),
        bad_max_len: rng.gen_range(1..=8),
    }
}

fn random_case(seed: u64, max_actions: usize) -> (SystemDescription, Nfa) {
    let params = random_params(seed, max_actions);
    let sys = harness::generate_random_system(&params).unwrap();
    let spec = harness::generate_random_badspec(seed, sys.alphabet(), params.bad_max_len);
    (sys, spec.compile().unwrap())
}

fn criterion1(witnesses: &mut Witnesses) -> Outcome {
    let start = Instant::now();
    let (mut agree, mut yes, mut no) = (0, 0, 0);
    let mut mismatches = Vec::new();
    for seed in 0..100u64 {
        let (sys, bad) = random_case(seed, 4);
        let order: Vec<usize> = (0..sys.k()).collect();
        let v = engine::run_pushin(&sys, &bad, &order, 1).unwrap();
        let reference = harness::brute_force_verdict(&sys, &bad).unwrap();
        if v.answer == reference.answer {
            agree += 1;
        } else {
            mismatches.push(seed);
        }
        match v.answer {
            Answer::Yes => yes += 1,
            Answer::No => no += 1,
        }
        if let Some(w) = v.witness {
            witnesses.push((format!("random seed {seed}"), sys, bad, w));
        }
    }
    let elapsed = start.elapsed();
    outcome(
        agree == 100 && elapsed < Duration::from_secs(300),
        format!("{agree}/100 verdicts agree ({yes} yes, {no} no), {:.1}s, mismatches {mismatches:?}", elapsed.as_secs_f64()),
    )
}

fn criterion2(witnesses: &mut Witnesses) -> Outcome {
    let mut bad_words = 0;
    let mut checked = 0u64;
    for seed in 1000..1020u64 {
        let (sys, bad) = random_case(seed, 2);
        let counter = harness::decomposition_counterexamples(&sys, &bad, 6).unwrap();
        bad_words += counter.len();
        let n = sys.alphabet().len() as u64;
        checked += (0..=6).map(|i| n.pow(i)).sum::<u64>();
        let order: Vec<usize> = (0..sys.k()).collect();
        if let Some(w) = engine::run_pushin(&sys, &bad, &order, 1).unwrap().witness {
            witnesses.push((format!("small seed {seed}"), sys, bad, w));
        }
    }
    outcome(bad_words == 0, format!("{checked} words over 20 systems, {bad_words} counterexamples"))
}

fn criterion3(witnesses: &Witnesses) -> Outcome {
    let unsound: Vec<&str> = witnesses
        .iter()
        .filter(|(_, sys, bad, w)| !harness::witness_is_sound(sys, bad, w).unwrap())
        .map(|(name, ..)| name.as_str())
        .collect();
    outcome(
        unsound.is_empty() && !witnesses.is_empty(),
        format!("{}/{} witnesses sound, unsound: {unsound:?}", witnesses.len() - unsound.len(), witnesses.len()),
    )
}

fn fmt_counts(r: &StepReport) -> String {
    format!("{}/{}/{}/{}", r.count_a, r.count_u, r.count_suv, r.tests_run)
}

fn criterion4(witnesses: &mut Witnesses) -> Outcome {
    let expected: Value = serde_json::from_str(harness::EXPECTED_MAXLEN10).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for case in Case::ALL {
        let exp = ExperimentCase::new(case, 10).unwrap();
        let start = Instant::now();
        let run = harness::run_experiment(&exp).unwrap();
        let secs = start.elapsed().as_secs_f64();
        let entry = &expected["cases"][case.to_string()];
        let ok = entry["verdict"] == run.verdict.answer.to_string() && secs < 60.0;
        pass &= ok;
        parts.push(format!("{case} {} in {secs:.2}s", run.verdict.answer));
        println!("    {case} ({}) verdict {} cause {}", exp.variant, run.verdict.answer, run.verdict.cause);
        for (i, r) in run.verdict.reports.iter().enumerate() {
            let reference = &entry["reference"][i];
            let reference = if reference.is_null() {
                "-".to_string()
            } else {
                format!("{}/{}/{}/{}", reference["countA"], reference["countU"], reference["countSUV"], reference["testsRun"])
                    .replace('"', "")
            };
            println!("      step {} {:<6} #A/#U/#SUV/TC ours {:<24} reference {reference}", r.i, r.blackbox, fmt_counts(r));
        }
        if let Some(w) = run.verdict.witness {
            let sys = harness::build_data_acquisition_system(exp.variant).unwrap();
            let bad = exp.bad_spec.compile().unwrap();
            witnesses.push((case.to_string(), sys, bad, w));
        }
    }
    outcome(pass, format!("{} (counts are a soft check, listed above)", parts.join(", ")))
}

fn criterion5() -> Outcome {
    let comm = parse_unit(harness::COMM_UNIT).unwrap();
    let sys = harness::build_data_acquisition_system(Variant::Baseline).unwrap();
    let composed = sys.compose_implementations().unwrap();
    let test = |u, w: &str| bbtest(u, &parse_word(w).unwrap()).unwrap();
    let checks = [
        test(&comm, "send msg ack"),
        !test(&comm, "send msg fail"),
        test(&composed, "fire fire serr pause data send msg ack ok resume fire"),
        !test(&composed, "fire fire serr data pause send"),
    ];
    let ok = checks.iter().filter(|&&c| c).count();
    outcome(ok == checks.len(), format!("{ok}/{} sequences as expected", checks.len()))
}

fn criterion6() -> Outcome {
    let mut equal = 0;
    let mut within = 0;
    let mut instances = 0;
    let mut seed = 2000u64;
    while instances < 50 {
        seed += 1;
        let (sys, bad) = random_case(seed, 4);
        let m_global = system::build_m_global(&sys, &bad).unwrap();
        let sigmas: Vec<Alphabet> = sys.blackboxes().iter().map(|b| b.alphabet().clone()).collect();
        let aux = engine::initial_auxiliary(&m_global, &sigmas).unwrap();
        let b = &sys.blackboxes()[(seed as usize) % sys.k()];
        let u = engine::unit_tsa(&aux, b.alphabet()).unwrap();
        if automata::is_empty_language(&u) {
            continue;
        }
        instances += 1;
        let implementation = b.implementation.as_ref().unwrap();
        let naive: Vec<Word> = automata::enumerate(&u)
            .unwrap()
            .filter(|w| bbtest(implementation, w).unwrap())
            .collect();
        let suv = engine::surviving_set(&b.name, implementation, &u, 1).unwrap();
        let got: Vec<Word> = automata::enumerate(&suv.survivors).unwrap().collect();
        equal += (got == naive) as usize;
        within += (suv.tests_run <= prefix_count(&u)) as usize;
    }
    outcome(
        equal == 50 && within == 50,
        format!("{equal}/50 survivor sets equal, {within}/50 within the naive test count"),
    )
}

/// `|P_1| + … + |P_m|`: the jobs with no pruning by earlier layers.
fn prefix_count(u: &Nfa) -> u64 {
    let mut seen = BTreeSet::new();
    for w in automata::enumerate(u).unwrap() {
        for j in 1..=w.len() {
            seen.insert(w[..j].to_vec());
        }
    }
    seen.len() as u64
}

/// Every ε-free NFA over {a, b} with at most 3 states whose transition
/// relation is a partial function, plus every NFA (ε included) with at most
/// 2 states.
fn automaton_family() -> Vec<Raw> {
    let mut out = Vec::new();
    for n in 1..=2usize {
        let slots: Vec<(usize, Option<usize>, usize)> = (0..n)
            .flat_map(|s| [None, Some(0), Some(1)].into_iter().flat_map(move |l| (0..n).map(move |t| (s, l, t))))
            .collect();
        for mask in 0u32..(1 << slots.len()) {
            for acc in 0u32..(1 << n) {
                out.push(Raw {
                    letters: 2,
                    states: n,
                    accepting: (0..n).map(|s| acc >> s & 1 == 1).collect(),
                    edges: slots.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e).collect(),
                });
            }
        }
    }
    let n = 3usize;
    for code in 0..4usize.pow(6) {
        let mut edges = Vec::new();
        let mut c = code;
        for s in 0..n {
            for l in 0..2 {
                let target = c % 4;
                c /= 4;
                if target > 0 {
                    edges.push((s, Some(l), target - 1));
                }
            }
        }
        for acc in 0u32..8 {
            out.push(Raw {
                letters: 2,
                states: n,
                accepting: (0..n).map(|s| acc >> s & 1 == 1).collect(),
                edges: edges.clone(),
            });
        }
    }
    out
}

fn criterion7() -> Outcome {
    let family = automaton_family();
    let ab = Alphabet::from_names(["a", "b"]).unwrap();
    let only_a = Alphabet::from_names(["a"]).unwrap();
    let window = Nfa::length_window(ab.clone(), 0, 5);
    type Filter = (Nfa, fn(usize) -> bool);
    let filters: Vec<Filter> = vec![
        (Nfa::length_window(only_a.clone(), 0, 1), |n| n <= 1),
        (automata::from_word_set(&[vec![], parse_word("a a").unwrap()], &only_a).unwrap(), |n| n == 0 || n == 2),
    ];
    let words = all_words(2, 5);
    let mut mismatches = 0usize;
    for (idx, raw) in family.iter().enumerate() {
        let nfa = automata::intersect(&raw.to_nfa(), &window).unwrap();
        let lang: Vec<&Vec<usize>> = words.iter().filter(|w| raw.accepts(w)).collect();

        mismatches += (automata::count_words(&nfa).unwrap() != BigUint::from(lang.len())) as usize;
        let longest = lang.iter().map(|w| w.len()).max();
        mismatches += match (longest, automata::max_word_length(&nfa)) {
            (Some(m), Ok(got)) => (m != got) as usize,
            (None, Err(_)) => 0,
            _ => 1,
        };
        for j in 1..=5 {
            let expected: BTreeSet<Word> =
                lang.iter().filter(|w| w.len() >= j).map(|w| to_word(&ab, &w[..j])).collect();
            let got: BTreeSet<Word> = automata::enumerate(&automata::prefixes_of_length(&nfa, j).unwrap()).unwrap().collect();
            mismatches += (got != expected) as usize;
        }
        let expected: BTreeSet<usize> = lang.iter().map(|w| w.iter().filter(|&&c| c == 0).count()).collect();
        let got: BTreeSet<usize> = automata::enumerate(&automata::project(&nfa, &only_a).unwrap())
            .unwrap()
            .map(|w| w.len())
            .collect();
        mismatches += (got != expected) as usize;

        let (filter, keeps) = &filters[idx % filters.len()];
        let expected: Vec<Word> = lang
            .iter()
            .filter(|w| keeps(w.iter().filter(|&&c| c == 0).count()))
            .map(|w| to_word(&ab, w))
            .collect();
        let got: Vec<Word> = automata::enumerate(&automata::lift_intersect(&nfa, filter).unwrap()).unwrap().collect();
        mismatches += (got != expected) as usize;
    }
    outcome(mismatches == 0, format!("{} automata, words to length 5, {mismatches} mismatches", family.len()))
}

fn criterion8() -> Outcome {
    let sys = harness::build_data_acquisition_system(Variant::Baseline).unwrap();
    let m = parse_badspec("regex: <ANY>*\nmaxlen: 22", sys.alphabet()).unwrap().compile().unwrap();
    let got = automata::count_words(&m).unwrap();
    let expected: BigUint = (0..=22u32).map(|i| BigUint::from(12u32).pow(i)).sum();
    outcome(got == expected && sys.alphabet().len() == 12, format!("count {got}, closed form {expected}"))
}

fn main() {
    let mut witnesses = Witnesses::new();
    let results = [
        ("1 random systems agree with integration testing", criterion1(&mut witnesses)),
        ("2 decomposition biconditional, words to length 6", criterion2(&mut witnesses)),
        ("4 data-acquisition verdicts at maxlength 10", criterion4(&mut witnesses)),
        ("3 witness soundness", criterion3(&witnesses)),
        ("5 prose sequences", criterion5()),
        ("6 layered jobs equal naive testing", criterion6()),
        ("7 automata layer exhaustive checks", criterion7()),
        ("8 big counts", criterion8()),
    ];
    let mut sorted: Vec<_> = results.iter().collect();
    sorted.sort_by_key(|(name, _)| *name);
    let mut failed = 0;
    for (name, o) in sorted {
        println!("criterion {name}: {} ({})", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += (!o.pass) as usize;
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
