//! Command-line front end.
//!
//! Exit codes: 0 when every check passes or a theorem is confirmed (or its
//! refutation matches the file's `expect` key), 1 when a property is refuted, 2 when the budget is too
//! small to decide, 3 on usage or parse errors.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::actions::{action_bornological_check, classify, group_bornological_check, ActionRule};
use crate::associated::{
    orbit_pair_relation, verify_theorem_main, verify_theorem_transitive, verify_theorem_weak, TheoremStatus,
};
use crate::bornology::{bornology_axiom_check, mask_of};
use crate::coarse::{close_finite_base, CoarseStructureSpec};
use crate::error::Error;
use crate::instance::{read_instance, serialize_instance, Expectation, InstanceFile};
use crate::oracle::{cross_check, random_instance, Primitive, Profile};
use crate::report::{self, Format};
use crate::{Budget, Truth};

pub const EXIT_OK: i32 = 0;
pub const EXIT_REFUTED: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "borncoarse", version, about = "Bornological actions and their coarse structures")]
pub struct Cli {
    /// Window radius for searches and oracle enumeration.
    #[arg(long, global = true, default_value_t = 64)]
    pub window: i64,
    /// Largest chain index examined.
    #[arg(long, global = true, default_value_t = 8)]
    pub max_index: u32,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Text)]
    pub format: FormatArg,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Text,
    Machine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TheoremArg {
    Weak,
    Main,
    Transitive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProfileArg {
    Finite,
    #[value(name = "lattice-k1")]
    LatticeK1,
    #[value(name = "lattice-k2")]
    LatticeK2,
}

impl From<ProfileArg> for Profile {
    fn from(p: ProfileArg) -> Self {
        match p {
            ProfileArg::Finite => Profile::Finite,
            ProfileArg::LatticeK1 => Profile::LatticeK1,
            ProfileArg::LatticeK2 => Profile::LatticeK2,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bornology axioms and bornological structure maps.
    Axioms { file: PathBuf },
    /// B-properness, weak B-properness and bounded isotropy.
    Classify { file: PathBuf },
    /// Consistency check of one characterization theorem.
    Theorem {
        #[arg(value_enum)]
        which: TheoremArg,
        file: PathBuf,
    },
    /// Coarse structure generated by the orbit-pair relations of a finite
    /// instance, as DOT.
    Closure {
        file: PathBuf,
        #[arg(long)]
        dot: PathBuf,
    },
    /// Symbolic engine against the brute-force oracle.
    Crosscheck {
        files: Vec<PathBuf>,
        /// Also check seeds 1..=N of the random profile.
        #[arg(long, default_value_t = 0)]
        random: u64,
        #[arg(long, value_enum, default_value_t = ProfileArg::LatticeK1)]
        profile: ProfileArg,
        /// Restrict to these primitives.
        #[arg(long = "primitive")]
        primitives: Vec<String>,
    },
    /// Prints a reproducible random instance.
    Random {
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum)]
        profile: ProfileArg,
    },
}

fn error_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } | Error::Io(_) | Error::Invalid(_) | Error::DimensionMismatch { .. } | Error::EmptyBox => {
            EXIT_USAGE
        }
        Error::Inconclusive(_) | Error::Unsupported(_) | Error::TooLarge(_) => EXIT_INCONCLUSIVE,
        Error::NotSurjective(_) | Error::BaseRefuted(_) => EXIT_REFUTED,
    }
}

fn truth_code(t: Truth) -> i32 {
    match t {
        Truth::Yes => EXIT_OK,
        Truth::No => EXIT_REFUTED,
        Truth::Unknown => EXIT_INCONCLUSIVE,
    }
}

/// Exit code of a theorem status given the file's declared expectation.
pub fn theorem_code(status: TheoremStatus, expect: Option<Expectation>) -> i32 {
    match (status, expect) {
        (TheoremStatus::Confirmed, _) => EXIT_OK,
        (TheoremStatus::RefutedWithWitness, Some(Expectation::Refuted)) => EXIT_OK,
        (TheoremStatus::NotApplicable, Some(Expectation::NotApplicable)) => EXIT_OK,
        (TheoremStatus::InconclusiveAtScale, _) => EXIT_INCONCLUSIVE,
        _ => EXIT_REFUTED,
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code; reports go to `out`, diagnostics to `err`.
pub fn run_command<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    match run(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            error_code(&e)
        }
    }
}

fn run(cli: &Cli, out: &mut dyn Write) -> crate::error::Result<i32> {
    if cli.window <= 0 {
        return Err(Error::Invalid(format!("window {} must be positive", cli.window)));
    }
    let budget = Budget::new(cli.window, cli.max_index);
    let format = match cli.format {
        FormatArg::Text => Format::Text,
        FormatArg::Machine => Format::Machine,
    };
    let mut emit = |r: &report::Report| -> crate::error::Result<()> {
        out.write_all(r.render(format).as_bytes())?;
        Ok(())
    };
    match &cli.command {
        Command::Axioms { file } => {
            let f = read_instance(file)?;
            let a = &f.instance;
            let space = bornology_axiom_check(&a.bornology);
            let group = bornology_axiom_check(&a.group.bornology);
            let maps = group_bornological_check(&a.group, &budget)?;
            let action = action_bornological_check(a, &budget)?;
            emit(&report::axioms_report(a, &space, &group, &maps, &action))?;
            let axioms = Truth::from_bool(space.passed() && group.passed());
            Ok(truth_code(axioms.and(maps.passed()).and(action.passed())))
        }
        Command::Classify { file } => {
            let f = read_instance(file)?;
            let c = classify(&f.instance, &budget)?;
            emit(&report::classification_report(&f.instance, &c))?;
            Ok(EXIT_OK)
        }
        Command::Theorem { which, file } => {
            let f = read_instance(file)?;
            let t = match which {
                TheoremArg::Weak => verify_theorem_weak(&f.instance, &budget)?,
                TheoremArg::Main => {
                    let cands: Vec<CoarseStructureSpec> = f.candidates.iter().map(|(_, c)| c.clone()).collect();
                    verify_theorem_main(&f.instance, &cands, &budget)?
                }
                TheoremArg::Transitive => {
                    let cs = transitive_structure(&f)?;
                    verify_theorem_transitive(&f.instance, &cs, &budget)?
                }
            };
            emit(&report::theorem_report(&t))?;
            Ok(theorem_code(t.status, f.expect))
        }
        Command::Closure { file, dot } => {
            let f = read_instance(file)?;
            let a = &f.instance;
            let (ActionRule::Permutation(perms), Some(n)) = (&a.rule, a.space.size()) else {
                return Err(Error::Invalid("closure needs a finite instance".into()));
            };
            let rels = a
                .space_levels(&budget)?
                .iter()
                .map(|b| Ok(orbit_pair_relation(perms, n, mask_of(n, b)?)))
                .collect::<crate::error::Result<Vec<_>>>()?;
            let c = close_finite_base(&a.space, &rels)?;
            std::fs::write(dot, report::closure_dot(&a.name, &c))?;
            let mut r = report::Report::new(format!("closure {}", a.name));
            r.push("maximal", c.maximal.len());
            r.push("pairs", c.maximal.iter().map(|m| m.count()).sum::<u32>());
            r.push("dot", dot.display());
            emit(&r)?;
            Ok(EXIT_OK)
        }
        Command::Crosscheck { files, random, profile, primitives } => {
            let mut instances = Vec::new();
            for p in files {
                instances.push(read_instance(p)?.instance);
            }
            for seed in 1..=*random {
                instances.push(random_instance(seed, (*profile).into())?);
            }
            if instances.is_empty() {
                return Err(Error::Invalid("nothing to check".into()));
            }
            let selected: Vec<Primitive> = if primitives.is_empty() {
                Primitive::ALL.to_vec()
            } else {
                primitives.iter().map(|p| p.parse()).collect::<crate::error::Result<_>>()?
            };
            let reports = cross_check(&instances, &selected, cli.window)?;
            emit(&report::crosscheck_report(&reports))?;
            Ok(if reports.iter().all(|r| r.passed()) { EXIT_OK } else { EXIT_REFUTED })
        }
        Command::Random { seed, profile } => {
            let a = random_instance(*seed, (*profile).into())?;
            let f = InstanceFile { instance: a, candidates: Vec::new(), expect: None };
            out.write_all(serialize_instance(&f).as_bytes())?;
            Ok(EXIT_OK)
        }
    }
}

/// The structure compared by the transitive theorem: the first candidate,
/// or the ℓ∞ metric balls.
pub fn transitive_structure(f: &InstanceFile) -> crate::error::Result<CoarseStructureSpec> {
    if let Some((_, c)) = f.candidates.first() {
        return Ok(c.clone());
    }
    if !f.instance.space.is_lattice() {
        return Err(Error::Invalid("the transitive theorem needs a lattice space or a candidate".into()));
    }
    Ok(CoarseStructureSpec::metric_balls(f.instance.dim()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run_command(args.iter().copied(), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors_exit_3() {
        assert_eq!(run_args(&["borncoarse", "frobnicate"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["borncoarse", "theorem", "main", "/nonexistent/missing.instance"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["borncoarse", "--help"]).0, EXIT_OK);
    }

    #[test]
    fn random_prints_an_instance() {
        let (code, out, _) = run_args(&["borncoarse", "random", "--seed", "0", "--profile", "lattice-k1"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("[bornology.X]"));
        assert_eq!(crate::instance::parse_instance(&out).unwrap().instance, random_instance(0, Profile::LatticeK1).unwrap());
    }

    #[test]
    fn theorem_codes() {
        assert_eq!(theorem_code(TheoremStatus::Confirmed, None), EXIT_OK);
        assert_eq!(theorem_code(TheoremStatus::RefutedWithWitness, None), EXIT_REFUTED);
        assert_eq!(theorem_code(TheoremStatus::RefutedWithWitness, Some(Expectation::Refuted)), EXIT_OK);
        assert_eq!(theorem_code(TheoremStatus::Confirmed, Some(Expectation::Refuted)), EXIT_OK);
        assert_eq!(theorem_code(TheoremStatus::NotApplicable, None), EXIT_REFUTED);
        assert_eq!(theorem_code(TheoremStatus::InconclusiveAtScale, None), EXIT_INCONCLUSIVE);
        assert_eq!(theorem_code(TheoremStatus::Inconsistent, Some(Expectation::Refuted)), EXIT_REFUTED);
    }
}
