#![allow(dead_code)]

use std::path::PathBuf;

use altsum::altss::{AltssInstance, Comparison};
use altsum::logic::{parse_formula, parse_structure, PrefixFormula, RelationalStructure};
use altsum::Quantifier;

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

pub fn read_data(name: &str) -> String {
    std::fs::read_to_string(data(name)).unwrap()
}

pub fn fixture1() -> (RelationalStructure, PrefixFormula) {
    (
        parse_structure(&read_data("fixture1.structure")).unwrap(),
        parse_formula(&read_data("fixture1.formula")).unwrap(),
    )
}

/// All `k`-subsets of `0..n` as bitmasks, via plain counting.
pub fn subsets(n: usize, k: usize) -> Vec<u32> {
    (0u32..1 << n).filter(|m| m.count_ones() as usize == k).collect()
}

/// Game value by enumerating every subset at every level.
pub fn naive_solve(x: &AltssInstance<u64>) -> bool {
    fn go(x: &AltssInstance<u64>, level: usize, sum: u128) -> bool {
        if level == x.levels() {
            let t = *x.target() as u128;
            return match x.comparison() {
                Comparison::Equal => sum == t,
                Comparison::NotEqual => sum != t,
            };
        }
        let set = &x.sets()[level];
        let moves = subsets(set.len(), x.choose()[level]);
        let value = |m: &u32| {
            let s: u128 = (0..set.len()).filter(|i| m >> i & 1 == 1).map(|i| set[i] as u128).sum();
            go(x, level + 1, sum + s)
        };
        match x.quantifier(level) {
            Quantifier::Exists => moves.iter().any(value),
            Quantifier::Forall => moves.iter().all(value),
        }
    }
    go(x, 0, 0)
}
