mod common;

use std::sync::Arc;

use num_bigint::BigUint;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use altsum::altss::{solve, AltssInstance, Comparison};
use altsum::aram::{evaluate, parse_program, RunBounds};
use altsum::generate::{random_case, random_instance, CaseCaps, InstanceCaps};
use altsum::logic::{model_check, RelationalStructure};
use altsum::numerals::{add_all, from_natural, make_layout, to_natural, BaseDNumeral, DigitLayout};
use altsum::reduction::GadgetContext;
use altsum::{Instance, Quantifier};

use common::naive_solve;

fn flavour() -> impl Strategy<Value = (Quantifier, Comparison)> {
    (
        prop_oneof![Just(Quantifier::Exists), Just(Quantifier::Forall)],
        prop_oneof![Just(Comparison::Equal), Just(Comparison::NotEqual)],
    )
}

fn small_instance() -> impl Strategy<Value = AltssInstance<u64>> {
    (any::<u64>(), 1usize..=4, flavour()).prop_map(|(seed, levels, (first, cmp))| {
        let caps = InstanceCaps {
            levels,
            max_set: 4,
            max_value: 15,
            max_plays: 2_000,
            illegal_rate: 0.1,
        };
        random_instance(&mut ChaCha8Rng::seed_from_u64(seed), &caps, first, cmp)
    })
}

fn layout() -> impl Strategy<Value = Arc<DigitLayout>> {
    (prop::collection::vec(0usize..3, 1..4), 0usize..3, 1u64..4, any::<bool>())
        .prop_filter("non-empty", |(sizes, ..)| sizes.iter().sum::<usize>() > 0)
        .prop_map(|(sizes, atoms, universe, wait)| Arc::new(make_layout(&sizes, atoms, universe, wait).unwrap()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn numeral_round_trips_through_naturals(l in layout(), seed in any::<u64>()) {
        let digits: Vec<u64> = (0..l.total_digits())
            .map(|i| (seed.rotate_left(i as u32 * 7)) % l.base)
            .collect();
        let n = BaseDNumeral::from_digits(&l, digits).unwrap();
        prop_assert_eq!(from_natural(&l, &to_natural(&n)).unwrap(), n);
    }

    #[test]
    fn column_sum_matches_big_integer_sum(l in layout(), seeds in prop::collection::vec(any::<u64>(), 1..6)) {
        let numerals: Vec<BaseDNumeral> = seeds
            .iter()
            .map(|s| {
                let digits = (0..l.total_digits()).map(|i| s.rotate_left(i as u32 * 5) % l.base).collect();
                BaseDNumeral::from_digits(&l, digits).unwrap()
            })
            .collect();
        let refs: Vec<&BaseDNumeral> = numerals.iter().collect();
        let (sum, carry) = add_all(&l, &refs).unwrap();
        let exact: BigUint = numerals.iter().map(to_natural).sum();
        let columns_fit = (0..l.total_digits())
            .all(|i| numerals.iter().map(|n| n.digit(i)).sum::<u64>() < l.base);
        prop_assert_eq!(carry, !columns_fit);
        if !carry {
            prop_assert_eq!(to_natural(&sum), exact);
        }
    }

    #[test]
    fn solver_matches_enumeration(x in small_instance()) {
        prop_assert_eq!(solve(&x).verdict, naive_solve(&x));
    }

    #[test]
    fn flipping_both_flavours_negates(x in small_instance()) {
        let dual = x.with_flavour(x.first_quantifier().flip(), x.comparison().flip());
        prop_assert_eq!(solve(&dual).verdict, !solve(&x).verdict);
    }

    #[test]
    fn big_and_small_scalars_agree(x in small_instance()) {
        let big = Instance::new(
            x.sets().iter().map(|s| s.iter().map(|&v| BigUint::from(v)).collect()).collect(),
            x.choose().to_vec(),
            BigUint::from(*x.target()),
            x.first_quantifier(),
            x.comparison(),
        )
        .unwrap();
        let (small, large) = (solve(&x), solve(&big));
        prop_assert_eq!(small.verdict, large.verdict);
        let converted: Vec<Vec<BigUint>> =
            small.line.iter().map(|s| s.iter().map(|&v| BigUint::from(v)).collect()).collect();
        prop_assert_eq!(converted, large.line);
    }

    #[test]
    fn winning_line_is_accepted(x in small_instance()) {
        let sol = solve(&x);
        if sol.verdict && x.first_quantifier() == Quantifier::Exists && x.levels() == 1 {
            prop_assert!(x.accepts(&sol.line));
        }
    }

    #[test]
    fn renaming_elements_keeps_the_verdict(seed in any::<u64>(), level in 1usize..=4, shift in 0usize..3) {
        let caps = CaseCaps { max_universe: 3, max_vars: 3, level, ..CaseCaps::default() };
        let (s, f) = random_case(&mut ChaCha8Rng::seed_from_u64(seed), &caps);
        let n = s.size();
        let perm = |e: usize| (e + shift) % n;
        let names = (0..n).map(|i| format!("p{i}")).collect();
        let mut t = RelationalStructure::new(names).unwrap();
        for name in s.relation_names().map(str::to_string).collect::<Vec<_>>() {
            let tuples: Vec<(usize, usize)> = s.relation(&name).unwrap().iter().map(|&(a, b)| (perm(a), perm(b))).collect();
            t.add_relation(&name, tuples).unwrap();
        }
        prop_assert_eq!(model_check(&s, &f).unwrap().holds, model_check(&t, &f).unwrap().holds);
    }

    #[test]
    fn monus_and_halving(a in 0u64..1000, b in 0u64..1000, c in 0u64..600) {
        let p = parse_program("LOAD 1\nSUB 2\nDIV2\nJEQ 3 7\nLOADI 0\nHALT\nLOADI 1\nHALT").unwrap();
        let r = evaluate(&p, &[a, b, c], &RunBounds::generous()).unwrap();
        prop_assert_eq!(r.verdict, a.saturating_sub(b) / 2 == c);
    }

    #[test]
    fn small_gadget_selections_never_carry(seed in any::<u64>(), level in 1usize..=3, pick in any::<u64>()) {
        let caps = CaseCaps { max_universe: 2, max_vars: 3, max_atoms: 2, level, ..CaseCaps::default() };
        let (s, f) = random_case(&mut ChaCha8Rng::seed_from_u64(seed), &caps);
        let ctx = GadgetContext::build(&s, &f, true).unwrap();
        let q = ctx.q();
        let mut pool: Vec<BaseDNumeral> = ctx.wait_numbers().unwrap();
        for j in 1..=q {
            for a in 0..s.size() {
                pool.push(ctx.var_number(a, j).unwrap());
                pool.push(ctx.norm_number(a, j).unwrap());
                for jp in j + 1..=q {
                    for b in 0..s.size() {
                        pool.push(ctx.atom_number(a, b, j, jp).unwrap());
                    }
                }
            }
            if ctx.layout.is_universal(j) {
                pool.push(ctx.fix_block_number(j).unwrap());
            }
            for d in 0..=ctx.max_fix_digit() {
                pool.push(ctx.fix_digit_number(j, d).unwrap());
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(pick);
        let k = rng.gen_range(1..=ctx.layout.max_summands().min(pool.len()));
        let refs: Vec<&BaseDNumeral> = pool.choose_multiple(&mut rng, k).collect();
        prop_assert!(!add_all(&ctx.layout, &refs).unwrap().1);
    }
}
