//! Commands behind the `altsum` binary.
//!
//! Exit codes: 0 for YES/success, 1 for NO or a round-trip mismatch, 2 for
//! errors, 3 for ARAM bound violations.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::altss::{parse_instance, solve, AltssError};
use crate::aram::{
    alt3_membership_program, audit, encode_altss_input, evaluate, membership_bounds, parse_program, parse_registers,
    AramError, RunBounds, RunReport,
};
use crate::generate::{random_case, CaseCaps};
use crate::logic::{model_check, parse_formula, parse_structure, LogicError, PrefixFormula, RelationalStructure};
use crate::reduction::{reduce, ReductionError};
use crate::Instance;

pub const EXIT_YES: i32 = 0;
pub const EXIT_NO: i32 = 1;
pub const EXIT_ERROR: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Logic { path: PathBuf, source: LogicError },
    #[error("{path}: {source}")]
    Instance { path: PathBuf, source: AltssError },
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error(transparent)]
    Aram(#[from] AramError),
    #[error("{0}")]
    Usage(String),
    #[error("output: {0}")]
    Output(#[from] std::io::Error),
}

#[derive(Debug, Parser)]
#[command(name = "altsum", version, about = "Alternating subset-sum workbench")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Model-check a simple prefix formula on a structure.
    Mc {
        structure: PathBuf,
        formula: PathBuf,
        /// Print the principal line of play.
        #[arg(long)]
        witness: bool,
    },
    /// Solve an alternating subset-sum instance.
    Solve {
        instance: PathBuf,
        #[arg(long)]
        witness: bool,
    },
    /// Compile a model-checking question into a subset-sum instance.
    Reduce {
        structure: PathBuf,
        formula: PathBuf,
        /// Instance output file (default: standard output).
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Side-car report file.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Check model checking against solving reduced instances on random cases.
    Roundtrip(CaseArgs),
    /// Write random (structure, formula) pairs to a directory.
    Generate {
        #[command(flatten)]
        cases: CaseArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run or audit an ARAM program.
    #[command(subcommand)]
    Aram(AramCommand),
}

#[derive(Debug, Clone, Args)]
pub struct CaseArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 30)]
    pub count: usize,
    #[arg(long, default_value_t = 2)]
    pub max_universe: usize,
    #[arg(long, default_value_t = 3)]
    pub max_vars: usize,
    #[arg(long)]
    pub exact_vars: bool,
    #[arg(long, default_value_t = 2)]
    pub max_atoms: usize,
    /// Number of quantifier blocks.
    #[arg(long, default_value_t = 3)]
    pub ell: usize,
}

impl CaseArgs {
    fn caps(&self) -> Result<CaseCaps, CliError> {
        if self.max_universe == 0 || self.ell == 0 {
            return Err(CliError::Usage("--max-universe and --ell must be at least 1".into()));
        }
        Ok(CaseCaps {
            max_universe: self.max_universe,
            max_vars: self.max_vars,
            exact_vars: self.exact_vars,
            max_atoms: self.max_atoms,
            level: self.ell,
            relations: 1,
        })
    }
}

#[derive(Debug, Subcommand)]
pub enum AramCommand {
    /// Evaluate and report the verdict with the audit table.
    Run(AramArgs),
    /// Evaluate and report only bound violations.
    Audit(AramArgs),
    /// Print the built-in three-set membership program.
    Program,
}

#[derive(Debug, Clone, Args)]
pub struct AramArgs {
    /// Program file (default: the built-in membership program).
    #[arg(long)]
    pub program: Option<PathBuf>,
    /// Register image file.
    #[arg(long, conflicts_with = "instance")]
    pub input: Option<PathBuf>,
    /// Three-set instance to encode as the register image.
    #[arg(long)]
    pub instance: Option<PathBuf>,
    #[arg(long)]
    pub max_steps: Option<usize>,
    #[arg(long)]
    pub max_guess_steps: Option<usize>,
    #[arg(long)]
    pub max_register: Option<usize>,
    #[arg(long)]
    pub max_value: Option<BigUint>,
    #[arg(long)]
    pub tail_window: Option<usize>,
    #[arg(long)]
    pub max_alternations: Option<usize>,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load_structure(path: &Path) -> Result<RelationalStructure, CliError> {
    parse_structure(&read(path)?).map_err(|source| CliError::Logic {
        path: path.to_path_buf(),
        source,
    })
}

fn load_formula(path: &Path) -> Result<PrefixFormula, CliError> {
    parse_formula(&read(path)?).map_err(|source| CliError::Logic {
        path: path.to_path_buf(),
        source,
    })
}

fn load_instance(path: &Path) -> Result<Instance, CliError> {
    parse_instance(&read(path)?).map_err(|source| CliError::Instance {
        path: path.to_path_buf(),
        source,
    })
}

fn yes_no(v: bool) -> &'static str {
    if v {
        "YES"
    } else {
        "NO"
    }
}

fn verdict_code(v: bool) -> i32 {
    if v {
        EXIT_YES
    } else {
        EXIT_NO
    }
}

/// Run a parsed command line, writing results to `out`; returns the exit code.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    match cli.command {
        Command::Mc {
            structure,
            formula,
            witness,
        } => {
            let s = load_structure(&structure)?;
            let f = load_formula(&formula)?;
            let v = model_check(&s, &f).map_err(|source| CliError::Logic {
                path: formula.clone(),
                source,
            })?;
            writeln!(out, "{}", yes_no(v.holds))?;
            if witness {
                let line: Vec<String> = v
                    .variation
                    .iter()
                    .enumerate()
                    .map(|(j, &e)| format!("x{}={}", j + 1, s.elements()[e]))
                    .collect();
                writeln!(out, "variation {}", line.join(" "))?;
            }
            Ok(verdict_code(v.holds))
        }
        Command::Solve { instance, witness } => {
            let x = load_instance(&instance)?;
            let sol = solve(&x);
            writeln!(out, "{}", yes_no(sol.verdict))?;
            if witness {
                for (i, chosen) in sol.line.iter().enumerate() {
                    let items: Vec<String> = chosen.iter().map(ToString::to_string).collect();
                    writeln!(out, "set {} {{{}}}", i + 1, items.join(","))?;
                }
                if let Some(b) = sol.blocked {
                    writeln!(out, "set {} has no legal choice", b + 1)?;
                }
            }
            Ok(verdict_code(sol.verdict))
        }
        Command::Reduce {
            structure,
            formula,
            out: target,
            report,
        } => {
            let s = load_structure(&structure)?;
            let f = load_formula(&formula)?;
            let r = reduce(&s, &f)?;
            let text = r.instance.to_string();
            match target {
                Some(p) => write_file(&p, &text)?,
                None => write!(out, "{text}")?,
            }
            let side = r.report.to_string();
            match report {
                Some(p) => write_file(&p, &side)?,
                None if r.report.complement => writeln!(out, "# complement: the formula holds iff this instance is NO")?,
                None => {}
            }
            Ok(EXIT_YES)
        }
        Command::Roundtrip(args) => roundtrip(&args, out),
        Command::Generate { cases, out: dir } => {
            let caps = cases.caps()?;
            fs::create_dir_all(&dir).map_err(|source| CliError::Io {
                path: dir.clone(),
                source,
            })?;
            let mut rng = ChaCha8Rng::seed_from_u64(cases.seed);
            for i in 0..cases.count {
                let (s, f) = random_case(&mut rng, &caps);
                write_file(&dir.join(format!("case{i:04}.structure")), &s.to_string())?;
                write_file(&dir.join(format!("case{i:04}.formula")), &f.to_string())?;
            }
            writeln!(out, "wrote {} cases to {}", cases.count, dir.display())?;
            Ok(EXIT_YES)
        }
        Command::Aram(AramCommand::Program) => {
            write!(out, "{}", alt3_membership_program())?;
            Ok(EXIT_YES)
        }
        Command::Aram(AramCommand::Run(args)) => aram(&args, false, out),
        Command::Aram(AramCommand::Audit(args)) => aram(&args, true, out),
    }
}

fn roundtrip(args: &CaseArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let caps = args.caps()?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut passed = 0;
    writeln!(out, "case  ell  q  n  |A|  mc   reduced  result")?;
    for i in 0..args.count {
        let (s, f) = random_case(&mut rng, &caps);
        let mc = model_check(&s, &f).map_err(|source| CliError::Logic {
            path: PathBuf::from(format!("case {i}")),
            source,
        })?;
        let r = reduce(&s, &f)?;
        let via = r.verdict(solve(&r.instance).verdict);
        let ok = via == mc.holds;
        passed += usize::from(ok);
        writeln!(
            out,
            "{i:>4}  {:>3}  {}  {}  {:>3}  {:<3}  {:<7}  {}",
            f.blocks.len(),
            f.var_count(),
            f.atoms.len(),
            s.size(),
            yes_no(mc.holds),
            yes_no(via),
            if ok { "PASS" } else { "FAIL" }
        )?;
        if !ok {
            writeln!(out, "--- counterexample structure\n{s}--- formula\n{f}---")?;
        }
    }
    writeln!(out, "passed {passed}/{}", args.count)?;
    Ok(if passed == args.count { EXIT_YES } else { EXIT_NO })
}

fn aram(args: &AramArgs, audit_only: bool, out: &mut dyn Write) -> Result<i32, CliError> {
    let program = match &args.program {
        Some(p) => parse_program(&read(p)?)?,
        None => alt3_membership_program(),
    };
    let (image, mut bounds): (Vec<BigUint>, RunBounds) = match (&args.input, &args.instance) {
        (Some(p), _) => (parse_registers(&read(p)?)?, RunBounds::generous()),
        (None, Some(p)) => {
            let x = load_instance(p)?;
            (encode_altss_input(&x)?, membership_bounds(&x))
        }
        (None, None) => return Err(CliError::Usage("give --input or --instance".into())),
    };
    macro_rules! apply {
        ($($field:ident),*) => {
            $(if let Some(v) = args.$field.clone() { bounds.$field = v; })*
        };
    }
    apply!(max_steps, max_guess_steps, max_register, max_value, tail_window, max_alternations);
    let report = evaluate(&program, &image, &bounds)?;
    if !audit_only {
        writeln!(out, "{}", yes_no(report.verdict))?;
        print_table(&report, &bounds, out)?;
    }
    let violations = audit(&report, &bounds);
    let all: Vec<String> = report
        .violations
        .iter()
        .filter(|v| !violations.contains(v))
        .chain(&violations)
        .map(ToString::to_string)
        .collect();
    if all.is_empty() {
        writeln!(out, "violations none")?;
    }
    for v in &all {
        writeln!(out, "violation {v}")?;
    }
    Ok(if !all.is_empty() {
        EXIT_VIOLATION
    } else if audit_only {
        EXIT_YES
    } else {
        verdict_code(report.verdict)
    })
}

fn print_table(report: &RunReport<BigUint>, bounds: &RunBounds, out: &mut dyn Write) -> Result<(), CliError> {
    let guesses = report.paths.iter().map(|p| p.guess_steps).max().unwrap_or(0);
    let alternations = report.paths.iter().map(|p| p.alternations()).max().unwrap_or(0);
    let tail = report.max_tail();
    writeln!(out, "paths {}", report.paths.len())?;
    writeln!(out, "steps {} (bound {})", report.max_steps(), bounds.max_steps)?;
    writeln!(out, "guesses {guesses}")?;
    let slack = bounds.tail_window.checked_sub(tail).map_or("exceeded".to_string(), |s| s.to_string());
    writeln!(out, "tail {tail} (slack {slack})")?;
    writeln!(out, "alternations {alternations}")?;
    Ok(())
}
