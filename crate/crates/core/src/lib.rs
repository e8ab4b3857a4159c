//! Decompositional black-box testing of concurrent systems.
//!
//! A system is a fully known *gluer* hosting black-boxes that can only be
//! tested. Given a finite set of bad behaviors, [`engine::run_pushin`] decides
//! whether the system exhibits any of them by unit-testing each black-box in
//! turn, never testing the system as a whole.
//!
//! ```
//! use pushin::harness::{self, Case, ExperimentCase};
//!
//! let case = ExperimentCase::new(Case::Case1, 6).unwrap();
//! let run = harness::run_experiment(&case).unwrap();
//! assert_eq!(run.verdict.answer, pushin::engine::Answer::No);
//! ```

pub mod automata;
pub mod badspec;
pub mod cli;
pub mod engine;
pub mod harness;
pub mod lts;
pub mod parse;
pub mod system;

use thiserror::Error;

/// Any failure surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Automata(#[from] automata::AutomataError),
    #[error(transparent)]
    Lts(#[from] lts::LtsError),
    #[error(transparent)]
    BadSpec(#[from] badspec::BadSpecError),
    #[error(transparent)]
    System(#[from] system::SystemError),
    #[error(transparent)]
    Engine(#[from] engine::EngineError),
}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/automata.md")]
    mod automata {}
    #[doc = include_str!("../../../book/src/units.md")]
    mod units {}
    #[doc = include_str!("../../../book/src/bad-behaviors.md")]
    mod bad_behaviors {}
    #[doc = include_str!("../../../book/src/push-in.md")]
    mod push_in {}
    #[doc = include_str!("../../../book/src/data-acquisition.md")]
    mod data_acquisition {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
