//! The `pushin` command line.
//!
//! Exit status: 0 when no bad behavior exists, 1 when one was found, 2 on
//! usage, file or parse errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::automata::{format_word, Nfa};
use crate::badspec::{self, BadSpec};
use crate::engine::{self, Answer, Verdict};
use crate::harness::{self, Case, ExperimentCase, RandomSystemParams, Variant};
use crate::lts;
use crate::system::{self, OrderSpec, SystemDescription, SystemFile};

pub const EXIT_YES: i32 = 0;
pub const EXIT_NO: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "pushin", version, about = "Decompositional testing of systems of black-boxes")]
pub struct Cli {
    /// Print per-step details.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the push-in procedure on a system and a bad-behavior spec.
    Check {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        bad: PathBuf,
        /// `auto` or a comma-separated list of black-box names.
        #[arg(long, default_value = "auto")]
        order: String,
        /// Write the JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Concurrent oracle queries per layer.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Integration-test the composed implementations instead.
    Oracle {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        bad: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run one of the bundled data-acquisition experiments.
    Experiment {
        /// case1, case2, case3 or case4.
        case: String,
        #[arg(long, default_value_t = 10)]
        maxlen: usize,
        /// baseline or commFixed; defaults to the case's own variant.
        #[arg(long)]
        variant: Option<String>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Write a random system with implementations and a bad spec to a
    /// directory. The seed comes from `PUSHIN_SEED` unless given.
    GenRandom {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 5)]
        states: usize,
        #[arg(long, default_value_t = 4)]
        actions: usize,
        #[arg(long, default_value_t = 0.5)]
        density: f64,
        #[arg(long, default_value_t = 8)]
        maxlen: usize,
    },
    /// Print a unit, system, bad-spec or automaton file in canonical form.
    Fmt {
        path: PathBuf,
        /// System whose alphabet a bad spec is read against.
        #[arg(long)]
        system: Option<PathBuf>,
    },
}

#[derive(Debug)]
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

fn in_file(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure(format!("{}: {e}", path.display()))
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| in_file(path, e))
}

fn load_bad(path: &Path, sys: &SystemDescription) -> Result<(BadSpec, Nfa), Failure> {
    let spec = badspec::parse_badspec(&read(path)?, sys.alphabet()).map_err(|e| in_file(path, e))?;
    let m_bad = spec.compile()?;
    Ok((spec, m_bad))
}

fn write_report(path: Option<&Path>, verdict: &Verdict, mode: &str) -> Result<(), Failure> {
    if let Some(p) = path {
        fs::write(p, verdict.to_json(mode) + "\n").map_err(|e| in_file(p, e))?;
    }
    Ok(())
}

fn print_verdict(out: &mut dyn Write, verdict: &Verdict, verbose: u8) -> std::io::Result<()> {
    writeln!(out, "verdict: {}", verdict.answer)?;
    if let Some(w) = &verdict.witness {
        writeln!(out, "witness: {}", format_word(w))?;
    }
    if verbose > 0 {
        writeln!(out, "cause: {}", verdict.cause)?;
    }
    Ok(())
}

fn print_steps(out: &mut dyn Write, verdict: &Verdict) -> std::io::Result<()> {
    writeln!(
        out,
        "{:<5} {:<10} {:>28} {:>28} {:>12} {:>10}",
        "step", "blackbox", "#A", "#U", "#SUV", "TC"
    )?;
    for r in &verdict.reports {
        writeln!(
            out,
            "{:<5} {:<10} {:>28} {:>28} {:>12} {:>10}",
            r.i, r.blackbox, r.count_a, r.count_u, r.count_suv, r.tests_run
        )?;
    }
    Ok(())
}

fn exit_code(answer: Answer) -> i32 {
    match answer {
        Answer::Yes => EXIT_YES,
        Answer::No => EXIT_NO,
    }
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<i32, Failure> {
    let verbose = cli.verbose;
    match cli.command {
        Command::Check {
            system,
            bad,
            order,
            report,
            jobs,
        } => {
            let sys = system::load_system(&system)?;
            let (_, m_bad) = load_bad(&bad, &sys)?;
            let order: OrderSpec = order.parse()?;
            let order = sys.resolve_order(&order)?;
            let verdict = engine::run_pushin(&sys, &m_bad, &order, jobs.max(1))?;
            if verbose > 0 {
                print_steps(out, &verdict)?;
            }
            print_verdict(out, &verdict, verbose)?;
            write_report(report.as_deref(), &verdict, "push-in")?;
            Ok(exit_code(verdict.answer))
        }
        Command::Oracle {
            system,
            bad,
            report,
        } => {
            let sys = system::load_system(&system)?;
            let (_, m_bad) = load_bad(&bad, &sys)?;
            let verdict = harness::brute_force_verdict(&sys, &m_bad)?;
            writeln!(out, "mode: brute-force")?;
            print_verdict(out, &verdict, verbose)?;
            write_report(report.as_deref(), &verdict, "brute-force")?;
            Ok(exit_code(verdict.answer))
        }
        Command::Experiment {
            case,
            maxlen,
            variant,
            jobs,
            report,
        } => {
            let case: Case = case.parse().map_err(Failure)?;
            if maxlen == 0 {
                return Err(Failure("maxlen must be positive".into()));
            }
            let mut exp = ExperimentCase::new(case, maxlen)?;
            if let Some(v) = variant {
                exp = exp.with_variant(v.parse::<Variant>().map_err(Failure)?);
            }
            let run = harness::run_experiment_with(&exp, jobs.max(1))?;
            writeln!(out, "{} maxlen={} variant={}", exp.case, maxlen, exp.variant)?;
            print_steps(out, &run.verdict)?;
            print_verdict(out, &run.verdict, verbose)?;
            writeln!(out, "{}", run.verdict.to_json("push-in"))?;
            write_report(report.as_deref(), &run.verdict, "push-in")?;
            Ok(exit_code(run.verdict.answer))
        }
        Command::GenRandom {
            out: dir,
            seed,
            k,
            states,
            actions,
            density,
            maxlen,
        } => {
            let seed = match seed {
                Some(s) => s,
                None => match std::env::var("PUSHIN_SEED") {
                    Ok(v) => v
                        .trim()
                        .parse()
                        .map_err(|_| Failure(format!("PUSHIN_SEED is not a number: {v:?}")))?,
                    Err(_) => 0,
                },
            };
            if !(0.0..=1.0).contains(&density) || k == 0 {
                return Err(Failure("need k >= 1 and density in [0, 1]".into()));
            }
            let params = RandomSystemParams {
                seed,
                k,
                max_states_per_unit: states,
                actions_per_unit: actions,
                sharing_density: density,
                bad_max_len: maxlen,
            };
            let sys = harness::generate_random_system(&params)?;
            let spec = harness::generate_random_badspec(seed, sys.alphabet(), maxlen);
            fs::create_dir_all(&dir).map_err(|e| in_file(&dir, e))?;
            let put = |name: &str, text: String| -> Result<(), Failure> {
                let p = dir.join(name);
                fs::write(&p, text).map_err(|e| in_file(&p, e))
            };
            let gluer_file = "gluer.unit".to_string();
            put(&gluer_file, sys.gluer().to_string())?;
            let mut decls = Vec::new();
            for b in sys.blackboxes() {
                let file = format!("{}.unit", b.name.to_lowercase());
                put(&file, b.implementation.as_ref().unwrap().to_string())?;
                decls.push(system::BlackBoxDecl {
                    name: b.name.clone(),
                    inputs: b.interface.inputs().iter().map(|s| s.to_string()).collect(),
                    outputs: b.interface.outputs().iter().map(|s| s.to_string()).collect(),
                    implementation: Some(file),
                });
            }
            let sys_file = SystemFile {
                gluer: gluer_file,
                blackboxes: decls,
            };
            put("system.sys", sys_file.to_string())?;
            put("bad.bad", spec.to_string())?;
            writeln!(out, "seed {seed}: wrote {}", dir.display())?;
            Ok(EXIT_YES)
        }
        Command::Fmt { path, system } => {
            let text = read(&path)?;
            let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
            let formatted = match ext {
                "unit" => lts::parse_unit(&text).map_err(|e| in_file(&path, e))?.to_string(),
                "sys" => text
                    .parse::<SystemFile>()
                    .map_err(|e| in_file(&path, e))?
                    .to_string(),
                "nfa" => text.parse::<Nfa>().map_err(|e| in_file(&path, e))?.to_string(),
                "bad" => {
                    let sys = system
                        .ok_or_else(|| Failure("formatting a bad spec needs --system".into()))?;
                    let sys = system::load_system(&sys)?;
                    load_bad(&path, &sys)?.0.to_string()
                }
                _ => return Err(Failure(format!("{}: unknown file kind", path.display()))),
            };
            write!(out, "{formatted}")?;
            Ok(EXIT_YES)
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_YES
                }
                _ => EXIT_ERROR,
            };
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(Failure(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_ERROR
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("pushin").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run_args(&["check"]).0, EXIT_ERROR);
        assert_eq!(run_args(&["bogus"]).0, EXIT_ERROR);
        let (code, _, err) = run_args(&["experiment", "case9"]);
        assert_eq!(code, EXIT_ERROR);
        assert!(err.contains("unknown case"), "{err}");
    }

    #[test]
    fn small_experiment() {
        let (code, out, _) = run_args(&["experiment", "case1", "--maxlen", "6"]);
        assert_eq!(code, EXIT_NO, "{out}");
        assert!(out.contains("verdict: no"));
        assert!(out.contains("\"countSUV\""));
    }
}
