//! Game-tree evaluation and resource auditing.

use std::fmt;

use num_bigint::BigUint;
use num_traits::One;

use super::{AramError, AramProgram, Instr};
use crate::{Natural, Quantifier};

/// Resource limits; `evaluate` enforces the first four while running and
/// `audit` checks all of them on the finished paths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunBounds {
    pub max_steps: usize,
    pub max_guess_steps: usize,
    pub max_register: usize,
    pub max_value: BigUint,
    /// Every guess must fall within the last `tail_window` steps of its path.
    pub tail_window: usize,
    pub max_alternations: usize,
}

impl RunBounds {
    /// Bounds that only stop runaway programs.
    pub fn generous() -> Self {
        RunBounds {
            max_steps: 1 << 20,
            max_guess_steps: usize::MAX,
            max_register: 1 << 20,
            max_value: BigUint::one() << 4096u32,
            tail_window: usize::MAX,
            max_alternations: usize::MAX,
        }
    }
}

/// Statistics of one root-to-leaf path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathStats<T> {
    pub steps: usize,
    pub guess_steps: usize,
    pub max_register: usize,
    pub max_value: T,
    /// 1-based step index of the first guess.
    pub first_guess: Option<usize>,
    pub first_kind: Option<Quantifier>,
    /// Maximal runs of equal guess kinds.
    pub runs: usize,
    pub accepted: bool,
}

impl<T> PathStats<T> {
    /// Runs counted as if the path had to start existentially.
    pub fn alternations(&self) -> usize {
        self.runs + usize::from(self.first_kind == Some(Quantifier::Forall))
    }

    fn note_guess(&mut self, kind: Quantifier, last: &mut Option<Quantifier>) {
        self.guess_steps += 1;
        self.first_guess.get_or_insert(self.steps);
        self.first_kind.get_or_insert(kind);
        if *last != Some(kind) {
            self.runs += 1;
            *last = Some(kind);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    StepLimit { path: usize },
    NoHalt { path: usize, pc: usize },
    GuessRange { path: usize },
    GuessSteps { path: usize, count: usize },
    Register { path: usize, index: usize },
    Value { path: usize },
    Tail { path: usize, first_guess: usize, length: usize },
    Alternations { path: usize, runs: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::StepLimit { path } => write!(f, "path {path}: step limit reached"),
            Violation::NoHalt { path, pc } => write!(f, "path {path}: ran off the program at {pc}"),
            Violation::GuessRange { path } => write!(f, "path {path}: guess range too large to branch"),
            Violation::GuessSteps { path, count } => write!(f, "path {path}: {count} guess steps"),
            Violation::Register { path, index } => write!(f, "path {path}: register R{index} above bound"),
            Violation::Value { path } => write!(f, "path {path}: value above bound"),
            Violation::Tail {
                path,
                first_guess,
                length,
            } => write!(f, "path {path}: guess at step {first_guess} of {length} is outside the tail"),
            Violation::Alternations { path, runs } => write!(f, "path {path}: {runs} alternation runs"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunReport<T> {
    pub verdict: bool,
    pub paths: Vec<PathStats<T>>,
    pub violations: Vec<Violation>,
}

impl<T> RunReport<T> {
    pub fn max_steps(&self) -> usize {
        self.paths.iter().map(|p| p.steps).max().unwrap_or(0)
    }

    /// Longest stretch from a path's first guess to its end.
    pub fn max_tail(&self) -> usize {
        self.paths
            .iter()
            .filter_map(|p| p.first_guess.map(|g| p.steps + 1 - g))
            .max()
            .unwrap_or(0)
    }
}

/// A program with fixed bounds.
#[derive(Debug, Clone)]
pub struct Machine<T> {
    pub program: AramProgram,
    pub bounds: RunBounds,
    _scalar: std::marker::PhantomData<T>,
}

impl<T: Natural> Machine<T> {
    pub fn new(program: AramProgram, bounds: RunBounds) -> Self {
        Machine {
            program,
            bounds,
            _scalar: std::marker::PhantomData,
        }
    }

    pub fn run(&self, input: &[T]) -> Result<RunReport<T>, AramError> {
        evaluate(&self.program, input, &self.bounds)
    }
}

/// Explore the whole computation tree on `input` (loaded into `R1..Rn`).
pub fn evaluate<T: Natural>(program: &AramProgram, input: &[T], bounds: &RunBounds) -> Result<RunReport<T>, AramError> {
    let needed = input.len() + 1;
    if needed > bounds.max_register {
        return Err(AramError::InputTooLarge {
            needed,
            bound: bounds.max_register,
        });
    }
    let mut regs = Vec::with_capacity(needed);
    regs.push(T::from_usize(needed).expect("register count fits the scalar"));
    regs.extend_from_slice(input);
    let start = PathStats {
        steps: 0,
        guess_steps: 0,
        max_register: input.len(),
        max_value: regs.iter().max().cloned().unwrap_or_else(T::zero),
        first_guess: None,
        first_kind: None,
        runs: 0,
        accepted: false,
    };
    let mut ex = Explorer {
        program,
        bounds,
        value_cap: T::from_biguint(&bounds.max_value),
        paths: Vec::new(),
        violations: Vec::new(),
    };
    let verdict = ex.explore(regs, 1, start, None);
    let mut violations = ex.violations;
    let mut report = RunReport {
        verdict,
        paths: ex.paths,
        violations: Vec::new(),
    };
    violations.extend(audit(&report, bounds));
    report.violations = violations;
    Ok(report)
}

/// Check finished paths against `bounds`.
pub fn audit<T: Natural>(report: &RunReport<T>, bounds: &RunBounds) -> Vec<Violation> {
    let cap = T::from_biguint(&bounds.max_value);
    let mut out = Vec::new();
    for (path, p) in report.paths.iter().enumerate() {
        if p.steps > bounds.max_steps {
            out.push(Violation::StepLimit { path });
        }
        if p.guess_steps > bounds.max_guess_steps {
            out.push(Violation::GuessSteps {
                path,
                count: p.guess_steps,
            });
        }
        if p.max_register > bounds.max_register {
            out.push(Violation::Register {
                path,
                index: p.max_register,
            });
        }
        if cap.as_ref().is_some_and(|c| p.max_value > *c) {
            out.push(Violation::Value { path });
        }
        if let Some(g) = p.first_guess {
            if g.saturating_add(bounds.tail_window) <= p.steps {
                out.push(Violation::Tail {
                    path,
                    first_guess: g,
                    length: p.steps,
                });
            }
        }
        if p.alternations() > bounds.max_alternations {
            out.push(Violation::Alternations {
                path,
                runs: p.alternations(),
            });
        }
    }
    out
}

struct Explorer<'a, T> {
    program: &'a AramProgram,
    bounds: &'a RunBounds,
    /// `None` when the bound exceeds every value of `T`.
    value_cap: Option<T>,
    paths: Vec<PathStats<T>>,
    violations: Vec<Violation>,
}

/// Why a path stopped early.
enum Cut {
    /// Visible in the path statistics; `audit` reports it.
    Audited,
    /// Fixed-width arithmetic overflowed.
    Overflow,
}

impl<T: Natural> Explorer<'_, T> {
    fn finish(&mut self, mut st: PathStats<T>, accepted: bool, violation: Option<Violation>) -> bool {
        st.accepted = accepted;
        self.violations.extend(violation);
        self.paths.push(st);
        accepted
    }

    fn read(&self, regs: &[T], r: usize, st: &mut PathStats<T>) -> Result<T, Cut> {
        st.max_register = st.max_register.max(r);
        if r > self.bounds.max_register {
            return Err(Cut::Audited);
        }
        Ok(regs.get(r).cloned().unwrap_or_else(T::zero))
    }

    fn write(&self, regs: &mut Vec<T>, r: usize, v: T, st: &mut PathStats<T>) -> Result<(), Cut> {
        st.max_register = st.max_register.max(r);
        if r > self.bounds.max_register {
            return Err(Cut::Audited);
        }
        if v > st.max_value {
            st.max_value = v.clone();
        }
        if self.value_cap.as_ref().is_some_and(|c| v > *c) {
            return Err(Cut::Audited);
        }
        if regs.len() <= r {
            regs.resize(r + 1, T::zero());
        }
        regs[r] = v;
        Ok(())
    }

    fn index(&self, v: &T, st: &mut PathStats<T>) -> Result<usize, Cut> {
        match v.to_usize() {
            Some(i) => Ok(i),
            None => {
                st.max_register = usize::MAX;
                Err(Cut::Audited)
            }
        }
    }

    fn explore(&mut self, mut regs: Vec<T>, mut pc: usize, mut st: PathStats<T>, mut last: Option<Quantifier>) -> bool {
        loop {
            if st.steps >= self.bounds.max_steps {
                let path = self.paths.len();
                return self.finish(st, false, Some(Violation::StepLimit { path }));
            }
            let Some(ins) = self.program.at(pc) else {
                let path = self.paths.len();
                return self.finish(st, false, Some(Violation::NoHalt { path, pc }));
            };
            st.steps += 1;
            let kind = match ins {
                Instr::Exists => Quantifier::Exists,
                Instr::Forall => Quantifier::Forall,
                Instr::Halt => {
                    let accepted = regs[0].is_one();
                    return self.finish(st, accepted, None);
                }
                _ => match self.exec(ins, &mut regs, &mut pc, &mut st) {
                    Ok(()) => continue,
                    Err(Cut::Audited) => return self.finish(st, false, None),
                    Err(Cut::Overflow) => {
                        let path = self.paths.len();
                        return self.finish(st, false, Some(Violation::Value { path }));
                    }
                },
            };
            let Some(bound) = regs[0].to_u64() else {
                let path = self.paths.len();
                return self.finish(st, false, Some(Violation::GuessRange { path }));
            };
            st.note_guess(kind, &mut last);
            let mut any = false;
            let mut all = true;
            for g in 0..=bound {
                let mut child = regs.clone();
                child[0] = T::from_u64(g).expect("guess below accumulator");
                let ok = self.explore(child, pc + 1, st.clone(), last);
                any |= ok;
                all &= ok;
            }
            return if kind == Quantifier::Exists { any } else { all };
        }
    }

    fn exec(&self, ins: Instr, regs: &mut Vec<T>, pc: &mut usize, st: &mut PathStats<T>) -> Result<(), Cut> {
        let acc = regs[0].clone();
        let mut next = *pc + 1;
        match ins {
            Instr::LoadI(c) => {
                let v = T::from_u64(c).ok_or(Cut::Audited)?;
                self.write(regs, 0, v, st)?;
            }
            Instr::Load(r) => {
                let v = self.read(regs, r, st)?;
                self.write(regs, 0, v, st)?;
            }
            Instr::Store(r) => self.write(regs, r, acc, st)?,
            Instr::LoadInd(r) => {
                let p = self.read(regs, r, st)?;
                let p = self.index(&p, st)?;
                let v = self.read(regs, p, st)?;
                self.write(regs, 0, v, st)?;
            }
            Instr::StoreInd(r) => {
                let p = self.read(regs, r, st)?;
                let p = self.index(&p, st)?;
                self.write(regs, p, acc, st)?;
            }
            Instr::Add(r) => {
                let v = self.read(regs, r, st)?;
                let sum = acc.checked_add(&v).ok_or(Cut::Overflow)?;
                self.write(regs, 0, sum, st)?;
            }
            Instr::Sub(r) => {
                let v = self.read(regs, r, st)?;
                self.write(regs, 0, acc.monus(&v), st)?;
            }
            Instr::Div2 => self.write(regs, 0, acc.half(), st)?,
            Instr::Swap(r) => {
                let v = self.read(regs, r, st)?;
                self.write(regs, r, acc, st)?;
                self.write(regs, 0, v, st)?;
            }
            Instr::Jump(i) => next = i,
            Instr::JZero(i) => {
                if acc.is_zero() {
                    next = i;
                }
            }
            Instr::JEq(r, i) => {
                if acc == self.read(regs, r, st)? {
                    next = i;
                }
            }
            Instr::Exists | Instr::Forall | Instr::Halt => unreachable!("handled by the explorer"),
        }
        *pc = next;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aram::parse_program;

    fn run(text: &str, input: &[u64]) -> RunReport<u64> {
        evaluate(&parse_program(text).unwrap(), input, &RunBounds::generous()).unwrap()
    }

    /// Guess g ≤ 2, accept iff g = 1.
    const GUESS_ONE: &str = "LOADI 1\nSTORE 5\nLOADI 2\n{Q}\nJEQ 5 8\nLOADI 0\nHALT\nLOADI 1\nHALT\n";

    #[test]
    fn trivial_accept() {
        let r = run("LOADI 1\nHALT\n", &[4, 5]);
        assert!(r.verdict);
        assert_eq!(r.paths.len(), 1);
        assert_eq!(r.paths[0].steps, 2);
        assert!(r.violations.is_empty());
        assert!(!run("LOADI 0\nHALT\n", &[]).verdict);
    }

    #[test]
    fn guesses_branch_over_accumulator_range() {
        let ex = run(&GUESS_ONE.replace("{Q}", "EXISTS"), &[]);
        assert!(ex.verdict);
        assert_eq!(ex.paths.len(), 3);
        let fa = run(&GUESS_ONE.replace("{Q}", "FORALL"), &[]);
        assert!(!fa.verdict);
        assert_eq!(fa.paths.len(), 3);
    }

    #[test]
    fn accumulator_starts_at_first_free_register() {
        // R0 = 3 with two inputs; accept iff R0 - R2 = 1.
        let r = run("SUB 2\nHALT\n", &[7, 2]);
        assert!(r.verdict);
        let r = run("SWAP 1\nSUB 1\nJZERO 5\nHALT\nLOADI 1\nHALT\n", &[2]);
        assert!(r.verdict);
    }

    #[test]
    fn arithmetic_semantics() {
        // 5 - 9 floors at 0; DIV2 of 3 is 1.
        let r = run("LOADI 9\nSTORE 1\nLOADI 5\nSUB 1\nJZERO 7\nHALT\nLOADI 3\nDIV2\nHALT\n", &[]);
        assert!(r.verdict);
        let r = run("LOADI 4\nSTORE 9\nLOADI 9\nSTORE 1\nLOADIND 1\nDIV2\nDIV2\nHALT\n", &[]);
        assert!(r.verdict);
    }

    #[test]
    fn step_limit_rejects_and_reports() {
        let bounds = RunBounds {
            max_steps: 50,
            ..RunBounds::generous()
        };
        let r = evaluate::<u64>(&parse_program("JUMP 1\n").unwrap(), &[], &bounds).unwrap();
        assert!(!r.verdict);
        assert_eq!(r.violations, vec![Violation::StepLimit { path: 0 }]);
    }

    #[test]
    fn register_and_value_bounds() {
        let bounds = RunBounds {
            max_register: 4,
            max_value: BigUint::from(10u8),
            ..RunBounds::generous()
        };
        let p = parse_program("LOADI 1\nSTORE 7\nHALT\n").unwrap();
        let r = evaluate::<u64>(&p, &[], &bounds).unwrap();
        assert!(!r.verdict);
        assert!(matches!(r.violations[..], [Violation::Register { index: 7, .. }]));
        let p = parse_program("LOADI 11\nHALT\n").unwrap();
        let r = evaluate::<u64>(&p, &[], &bounds).unwrap();
        assert!(matches!(r.violations[..], [Violation::Value { .. }]));
        assert!(evaluate::<u64>(&p, &[1, 2, 3, 4], &bounds).is_err());
    }

    #[test]
    fn tail_and_alternation_audit() {
        let p = GUESS_ONE.replace("{Q}", "EXISTS");
        let r = run(&p, &[]);
        let tight = RunBounds {
            tail_window: 0,
            ..RunBounds::generous()
        };
        assert_eq!(audit(&r, &tight).len(), 3);
        // E A E A: four runs.
        let r = run("LOADI 0\nEXISTS\nFORALL\nEXISTS\nFORALL\nLOADI 1\nHALT\n", &[]);
        let three = RunBounds {
            max_alternations: 3,
            ..RunBounds::generous()
        };
        assert!(matches!(audit(&r, &three)[..], [Violation::Alternations { runs: 4, .. }]));
        // A leading FORALL costs an extra run.
        let r = run("LOADI 0\nFORALL\nEXISTS\nFORALL\nLOADI 1\nHALT\n", &[]);
        assert!(matches!(audit(&r, &three)[..], [Violation::Alternations { runs: 4, .. }]));
    }

    #[test]
    fn big_registers() {
        let p = parse_program("LOAD 1\nADD 1\nSTORE 1\nLOAD 1\nSUB 2\nJZERO 8\nHALT\nLOADI 1\nHALT\n").unwrap();
        let x = BigUint::one() << 200u32;
        let r = evaluate(&p, &[x.clone(), x * 2u8], &RunBounds::generous()).unwrap();
        assert!(r.verdict);
    }
}
