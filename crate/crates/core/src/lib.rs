//! Alternating subset-sum workbench.
//!
//! * [`altss`]: alternating subset-sum instances and an exact game-tree solver.
//! * [`logic`]: binary relational structures, alternating prefix formulas and
//!   a brute-force model checker.
//! * [`numerals`] and [`reduction`]: the gadget-number compiler from model
//!   checking of simple prefix formulas to alternating subset-sum.
//! * [`aram`]: an alternating RAM with a resource auditor and a built-in
//!   membership program for the three-set problem.
//! * [`cli`]: the command implementations behind the `altsum` binary.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;

pub mod altss;
pub mod aram;
pub mod cli;
pub mod generate;
pub mod logic;
pub mod numerals;
pub mod reduction;
pub mod scalar;

pub use scalar::Natural;

/// Instance over arbitrary-precision naturals (what the reduction emits).
pub type Instance = altss::AltssInstance<BigUint>;
/// Instance over machine words, for small hand-written or random instances.
pub type SmallInstance = altss::AltssInstance<u64>;
pub type Solution = altss::Solution<BigUint>;
/// Alternating RAM over arbitrary-precision registers.
pub type Machine = aram::Machine<BigUint>;
pub type SmallMachine = aram::Machine<u64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Quantifier {
    Exists,
    Forall,
}

impl Quantifier {
    pub fn flip(self) -> Self {
        match self {
            Quantifier::Exists => Quantifier::Forall,
            Quantifier::Forall => Quantifier::Exists,
        }
    }
}

impl fmt::Display for Quantifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quantifier::Exists => "exists",
            Quantifier::Forall => "forall",
        })
    }
}

impl FromStr for Quantifier {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exists" => Ok(Quantifier::Exists),
            "forall" => Ok(Quantifier::Forall),
            other => Err(format!("unknown quantifier `{other}`")),
        }
    }
}
