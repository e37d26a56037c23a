//! Seeded random structures, simple formulas and subset-sum instances.
//!
//! Callers own the RNG, so a fixed seed gives a fixed corpus.

use rand::seq::index::sample;
use rand::Rng;

use crate::altss::{AltssInstance, Comparison};
use crate::logic::{Atom, Connective, PrefixFormula, RelationalStructure};
use crate::{Quantifier, SmallInstance};

/// Size caps for random (structure, formula) pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseCaps {
    pub max_universe: usize,
    pub max_vars: usize,
    /// Use exactly `max_vars` variables instead of at most.
    pub exact_vars: bool,
    pub max_atoms: usize,
    /// Number of quantifier blocks.
    pub level: usize,
    pub relations: usize,
}

impl Default for CaseCaps {
    fn default() -> Self {
        CaseCaps {
            max_universe: 2,
            max_vars: 3,
            exact_vars: false,
            max_atoms: 2,
            level: 3,
            relations: 1,
        }
    }
}

pub fn relation_name(i: usize) -> String {
    if i == 0 {
        "E".to_string()
    } else {
        format!("E{i}")
    }
}

/// Universe `e1 … en` with `1 ≤ n ≤ max_universe`; every pair lies in each
/// relation with probability ½.
pub fn random_structure<R: Rng>(rng: &mut R, max_universe: usize, relations: usize) -> RelationalStructure {
    let n = rng.gen_range(1..=max_universe.max(1));
    let names = (1..=n).map(|i| format!("e{i}")).collect();
    let mut s = RelationalStructure::new(names).expect("distinct non-empty universe");
    for r in 0..relations {
        let tuples: Vec<(usize, usize)> = (0..n)
            .flat_map(|a| (0..n).map(move |b| (a, b)))
            .filter(|_| rng.gen_bool(0.5))
            .collect();
        s.add_relation(&relation_name(r), tuples).expect("elements in range");
    }
    s
}

/// Simple formula: alternating blocks starting with `exists`, positive
/// atoms on distinct variable pairs, `and` for odd and `or` for even depth.
pub fn random_simple_formula<R: Rng>(rng: &mut R, caps: &CaseCaps) -> PrefixFormula {
    let level = caps.level.max(1);
    let q = if caps.exact_vars {
        caps.max_vars
    } else {
        rng.gen_range(0..=caps.max_vars)
    };
    let mut sizes = vec![0usize; level];
    for _ in 0..q {
        sizes[rng.gen_range(0..level)] += 1;
    }
    let blocks = sizes
        .into_iter()
        .enumerate()
        .map(|(i, k)| {
            let quant = if i % 2 == 0 {
                Quantifier::Exists
            } else {
                Quantifier::Forall
            };
            (quant, k)
        })
        .collect();
    let n = if q >= 2 { rng.gen_range(0..=caps.max_atoms) } else { 0 };
    let atoms = (0..n)
        .map(|_| {
            let left = rng.gen_range(1..=q);
            let mut right = rng.gen_range(1..q);
            if right >= left {
                right += 1;
            }
            Atom::new(&relation_name(rng.gen_range(0..caps.relations.max(1))), left, right, true)
        })
        .collect();
    PrefixFormula {
        blocks,
        connective: if level % 2 == 1 {
            Connective::And
        } else {
            Connective::Or
        },
        atoms,
    }
}

pub fn random_case<R: Rng>(rng: &mut R, caps: &CaseCaps) -> (RelationalStructure, PrefixFormula) {
    let s = random_structure(rng, caps.max_universe, caps.relations.max(1));
    let f = random_simple_formula(rng, caps);
    (s, f)
}

/// Size caps for random subset-sum instances.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceCaps {
    pub levels: usize,
    pub max_set: usize,
    pub max_value: u64,
    /// Cap on `Π C(|A_i|, k_i)`.
    pub max_plays: u64,
    /// Chance that a level asks for more elements than its set has.
    pub illegal_rate: f64,
}

impl Default for InstanceCaps {
    fn default() -> Self {
        InstanceCaps {
            levels: 3,
            max_set: 5,
            max_value: 12,
            max_plays: 10_000,
            illegal_rate: 0.05,
        }
    }
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// Random instance within `caps`; the play count uses `max(1, C(n, k))` per level.
pub fn random_instance<R: Rng>(
    rng: &mut R,
    caps: &InstanceCaps,
    first: Quantifier,
    comparison: Comparison,
) -> SmallInstance {
    loop {
        let mut sets = Vec::with_capacity(caps.levels);
        let mut choose = Vec::with_capacity(caps.levels);
        let mut plays = 1u64;
        for _ in 0..caps.levels {
            let size = rng.gen_range(0..=caps.max_set.min(caps.max_value as usize + 1));
            let mut set: Vec<u64> = sample(rng, caps.max_value as usize + 1, size)
                .into_iter()
                .map(|v| v as u64)
                .collect();
            set.sort_unstable();
            let k = if rng.gen_bool(caps.illegal_rate) {
                size + 1
            } else {
                rng.gen_range(0..=size)
            };
            plays = plays.saturating_mul(binomial(size, k).max(1));
            sets.push(set);
            choose.push(k);
        }
        if plays > caps.max_plays {
            continue;
        }
        let reach: u64 = sets
            .iter()
            .zip(&choose)
            .map(|(s, &k)| s.iter().rev().take(k).sum::<u64>())
            .sum();
        let target = rng.gen_range(0..=reach + 2);
        return AltssInstance::new(sets, choose, target, first, comparison).expect("distinct small values");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{validate_simple, PolarityMode};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn formulas_are_simple() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for level in 1..=5 {
            let caps = CaseCaps {
                level,
                max_vars: 4,
                max_atoms: 3,
                ..CaseCaps::default()
            };
            for _ in 0..50 {
                let f = random_simple_formula(&mut rng, &caps);
                assert!(validate_simple(&f, level, PolarityMode::Positive).is_empty(), "{f}");
                assert!(f.atoms.iter().all(|a| a.left != a.right));
            }
        }
    }

    #[test]
    fn exact_vars_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let caps = CaseCaps {
            exact_vars: true,
            ..CaseCaps::default()
        };
        for _ in 0..20 {
            assert_eq!(random_simple_formula(&mut rng, &caps).var_count(), 3);
        }
    }

    #[test]
    fn same_seed_same_corpus() {
        let caps = CaseCaps::default();
        let a: Vec<String> = {
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            (0..5).map(|_| format!("{:?}", random_case(&mut rng, &caps))).collect()
        };
        let b: Vec<String> = {
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            (0..5).map(|_| format!("{:?}", random_case(&mut rng, &caps))).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn instances_respect_caps() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let caps = InstanceCaps::default();
        for _ in 0..100 {
            let x = random_instance(&mut rng, &caps, Quantifier::Exists, Comparison::Equal);
            let plays: u64 = x
                .sets()
                .iter()
                .zip(x.choose())
                .map(|(s, &k)| binomial(s.len(), k).max(1))
                .product();
            assert!(plays <= caps.max_plays);
        }
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(2, 3), 0);
    }
}
