//! Alternating random access machine.
//!
//! Registers `R0, R1, …` hold naturals; `R0` is the accumulator. A program is
//! a list of instructions addressed from 1. Input occupies `R1..Rn` and `R0`
//! starts at `n + 1`, the first free register. `HALT` accepts iff `R0 = 1`.
//! `EXISTS`/`FORALL` replace `R0` by a guess `g ∈ [0, R0]`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

mod membership;
mod vm;

pub use membership::{alt3_membership_program, encode_altss_input, membership_bounds, TAIL_PER_GUESS};
pub use vm::{audit, evaluate, Machine, PathStats, RunBounds, RunReport, Violation};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AramError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("input needs registers up to R{needed} but the bound is R{bound}")]
    InputTooLarge { needed: usize, bound: usize },
    #[error("cannot encode: {0}")]
    Encode(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Instr {
    LoadI(u64),
    Load(usize),
    Store(usize),
    LoadInd(usize),
    StoreInd(usize),
    Add(usize),
    /// Cut off at zero.
    Sub(usize),
    Div2,
    /// Exchange `R0` and `Rr`.
    Swap(usize),
    Jump(usize),
    JZero(usize),
    /// Jump when `R0 = Rr`.
    JEq(usize, usize),
    Exists,
    Forall,
    Halt,
}

impl Instr {
    fn target(&self) -> Option<usize> {
        match *self {
            Instr::Jump(i) | Instr::JZero(i) | Instr::JEq(_, i) => Some(i),
            _ => None,
        }
    }
}

impl fmt::Display for Instr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instr::LoadI(c) => write!(f, "LOADI {c}"),
            Instr::Load(r) => write!(f, "LOAD {r}"),
            Instr::Store(r) => write!(f, "STORE {r}"),
            Instr::LoadInd(r) => write!(f, "LOADIND {r}"),
            Instr::StoreInd(r) => write!(f, "STOREIND {r}"),
            Instr::Add(r) => write!(f, "ADD {r}"),
            Instr::Sub(r) => write!(f, "SUB {r}"),
            Instr::Div2 => f.write_str("DIV2"),
            Instr::Swap(r) => write!(f, "SWAP {r}"),
            Instr::Jump(i) => write!(f, "JUMP {i}"),
            Instr::JZero(i) => write!(f, "JZERO {i}"),
            Instr::JEq(r, i) => write!(f, "JEQ {r} {i}"),
            Instr::Exists => f.write_str("EXISTS"),
            Instr::Forall => f.write_str("FORALL"),
            Instr::Halt => f.write_str("HALT"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AramProgram {
    instructions: Vec<Instr>,
}

impl AramProgram {
    pub fn new(instructions: Vec<Instr>) -> Result<Self, AramError> {
        let len = instructions.len();
        for (i, ins) in instructions.iter().enumerate() {
            if let Some(t) = ins.target() {
                if t == 0 || t > len {
                    return Err(AramError::Parse {
                        line: i + 1,
                        message: format!("jump target {t} outside 1..={len}"),
                    });
                }
            }
        }
        Ok(AramProgram { instructions })
    }

    pub fn instructions(&self) -> &[Instr] {
        &self.instructions
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    /// Instruction at 1-based address `pc`.
    pub fn at(&self, pc: usize) -> Option<Instr> {
        pc.checked_sub(1).and_then(|i| self.instructions.get(i)).copied()
    }
}

impl fmt::Display for AramProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for ins in &self.instructions {
            writeln!(f, "{ins}")?;
        }
        Ok(())
    }
}

impl FromStr for AramProgram {
    type Err = AramError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_program(s)
    }
}

pub fn parse_program(text: &str) -> Result<AramProgram, AramError> {
    let mut out = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| AramError::Parse { line: no + 1, message };
        let mut words = line.split_whitespace();
        let op = words.next().unwrap_or_default().to_ascii_uppercase();
        let args: Vec<&str> = words.collect();
        let num = |i: usize| -> Result<u64, AramError> {
            let w = args.get(i).ok_or_else(|| err(format!("{op} needs an operand")))?;
            w.parse::<u64>().map_err(|_| err(format!("bad operand `{w}`")))
        };
        let reg = |i: usize| num(i).map(|v| v as usize);
        let arity = match op.as_str() {
            "DIV2" | "EXISTS" | "FORALL" | "HALT" => 0,
            "JEQ" => 2,
            _ => 1,
        };
        if args.len() != arity {
            return Err(err(format!("{op} takes {arity} operand(s), got {}", args.len())));
        }
        let ins = match op.as_str() {
            "LOADI" => Instr::LoadI(num(0)?),
            "LOAD" => Instr::Load(reg(0)?),
            "STORE" => Instr::Store(reg(0)?),
            "LOADIND" => Instr::LoadInd(reg(0)?),
            "STOREIND" => Instr::StoreInd(reg(0)?),
            "ADD" => Instr::Add(reg(0)?),
            "SUB" => Instr::Sub(reg(0)?),
            "DIV2" => Instr::Div2,
            "SWAP" => Instr::Swap(reg(0)?),
            "JUMP" => Instr::Jump(reg(0)?),
            "JZERO" => Instr::JZero(reg(0)?),
            "JEQ" => Instr::JEq(reg(0)?, reg(1)?),
            "EXISTS" => Instr::Exists,
            "FORALL" => Instr::Forall,
            "HALT" => Instr::Halt,
            other => return Err(err(format!("unknown opcode `{other}`"))),
        };
        out.push(ins);
    }
    AramProgram::new(out)
}

/// Register image as whitespace- or comma-separated decimals.
pub fn parse_registers<T: crate::Natural>(text: &str) -> Result<Vec<T>, AramError> {
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|w| !w.is_empty())
        .map(|w| {
            w.parse::<T>().map_err(|_| AramError::Parse {
                line: 0,
                message: format!("bad register value `{w}`"),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_prints() {
        let p = parse_program("LOADI 1\nHALT\n").unwrap();
        assert_eq!(p.instructions(), &[Instr::LoadI(1), Instr::Halt]);
        assert_eq!(p.to_string(), "LOADI 1\nHALT\n");
        let q = parse_program("  loadi 2 # guess bound\n\nexists\njeq 3 1\nhalt").unwrap();
        assert_eq!(q.len(), 4);
        assert_eq!(parse_program(&q.to_string()).unwrap(), q);
    }

    #[test]
    fn rejects_bad_programs() {
        assert!(matches!(
            parse_program("JUMP 99\nHALT\n"),
            Err(AramError::Parse { line: 1, .. })
        ));
        assert!(parse_program("JUMP 0\n").is_err());
        assert!(parse_program("FROB 1\n").is_err());
        assert!(parse_program("LOAD -1\n").is_err());
        assert!(parse_program("HALT 3\n").is_err());
    }

    #[test]
    fn register_images() {
        let r: Vec<u64> = parse_registers("1, 2 3\n4").unwrap();
        assert_eq!(r, vec![1, 2, 3, 4]);
        assert!(parse_registers::<u64>("1 x").is_err());
    }
}
