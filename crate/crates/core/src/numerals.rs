//! Fixed-layout positional numerals in a base `D`.
//!
//! A numeral is split, most significant first, into an optional high
//! (WAIT) block, `n` L-digits (one per atom) and `q` B-blocks of `q + 1`
//! digits each (one block per variable). The base is chosen so that the
//! sums formed by the reduction never carry; [`add_all`] reports any carry
//! so that claim can be checked at run time.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::Quantifier;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NumeralError {
    #[error("block list is empty")]
    NoBlocks,
    #[error("universe must have at least one element")]
    EmptyUniverse,
    #[error("base overflows 64-bit digits")]
    BaseTooLarge,
    #[error("{part}: expected {expected} digits, got {got}")]
    PartLength {
        part: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("digit {digit} at index {index} is not below base {base}")]
    DigitTooLarge { index: usize, digit: u64, base: u64 },
    #[error("numerals use different layouts")]
    MixedLayouts,
    #[error("value does not fit in {digits} base-{base} digits")]
    ValueTooLarge { digits: usize, base: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DigitLayout {
    /// Number of L-digits (atoms).
    pub atoms: usize,
    /// Total number of variables.
    pub vars: usize,
    pub block_sizes: Vec<usize>,
    pub first_quantifier: Quantifier,
    pub universe: u64,
    /// Total size of the universally quantified blocks.
    pub universal_total: usize,
    /// `s`; the WAIT block has `s + 1` digits.
    pub wait_span: usize,
    /// Digits in the WAIT block (`s + 1`, or 0 without the extension).
    pub high_width: usize,
    /// `C = (universal_total + 1) * universe`.
    pub unit: u64,
    /// `D`.
    pub base: u64,
}

impl DigitLayout {
    pub fn block_width(&self) -> usize {
        self.vars + 1
    }

    pub fn total_digits(&self) -> usize {
        self.high_width + self.atoms + self.vars * self.block_width()
    }

    pub fn has_wait_block(&self) -> bool {
        self.high_width > 0
    }

    /// Upper bound on how many gadget numbers one admissible selection adds.
    pub fn max_summands(&self) -> usize {
        let q = self.vars;
        2 * q + q * q.saturating_sub(1) / 2 + 1
    }

    /// Quantifier of block `block` (0-based).
    pub fn block_quantifier(&self, block: usize) -> Quantifier {
        if block.is_multiple_of(2) {
            self.first_quantifier
        } else {
            self.first_quantifier.flip()
        }
    }

    /// 0-based block index owning variable `var` (1-based).
    pub fn block_of(&self, var: usize) -> Option<usize> {
        if var == 0 {
            return None;
        }
        let mut end = 0;
        for (i, &size) in self.block_sizes.iter().enumerate() {
            end += size;
            if var <= end {
                return Some(i);
            }
        }
        None
    }

    pub fn is_universal(&self, var: usize) -> bool {
        self.block_of(var)
            .map(|b| self.block_quantifier(b) == Quantifier::Forall)
            .unwrap_or(false)
    }

    /// Index of WAIT-block position `i`, counted from its least significant end.
    pub fn high_index(&self, i: usize) -> usize {
        debug_assert!(i < self.high_width);
        self.high_width - 1 - i
    }

    /// Index of L-digit `i` (1-based).
    pub fn atom_index(&self, i: usize) -> usize {
        debug_assert!(i >= 1 && i <= self.atoms);
        self.high_width + i - 1
    }

    /// Index of position `pos` (1-based, `1..=q+1`) in block `B_var`.
    pub fn block_index(&self, var: usize, pos: usize) -> usize {
        debug_assert!(var >= 1 && var <= self.vars);
        debug_assert!(pos >= 1 && pos <= self.block_width());
        self.high_width + self.atoms + (var - 1) * self.block_width() + pos - 1
    }
}

/// Layout for an existential-first prefix with the given block sizes.
pub fn make_layout(
    block_sizes: &[usize],
    atom_count: usize,
    universe_size: u64,
    with_wait_block: bool,
) -> Result<DigitLayout, NumeralError> {
    make_layout_for(
        Quantifier::Exists,
        block_sizes,
        atom_count,
        universe_size,
        with_wait_block,
    )
}

pub fn make_layout_for(
    first_quantifier: Quantifier,
    block_sizes: &[usize],
    atom_count: usize,
    universe_size: u64,
    with_wait_block: bool,
) -> Result<DigitLayout, NumeralError> {
    let last = *block_sizes.last().ok_or(NumeralError::NoBlocks)?;
    if universe_size == 0 {
        return Err(NumeralError::EmptyUniverse);
    }
    let q: usize = block_sizes.iter().sum();
    let universal_total: usize = block_sizes
        .iter()
        .enumerate()
        .filter(|(i, _)| {
            let quant = if i % 2 == 0 {
                first_quantifier
            } else {
                first_quantifier.flip()
            };
            quant == Quantifier::Forall
        })
        .map(|(_, &k)| k)
        .sum();
    let pairs = q * q.saturating_sub(1) / 2;
    let unit = (universal_total as u64 + 1)
        .checked_mul(universe_size)
        .ok_or(NumeralError::BaseTooLarge)?;
    let base = ((2 * q + pairs + 1) as u64)
        .checked_mul(unit)
        .and_then(|v| v.checked_add(1))
        .ok_or(NumeralError::BaseTooLarge)?;
    let wait_span = last + pairs;
    Ok(DigitLayout {
        atoms: atom_count,
        vars: q,
        block_sizes: block_sizes.to_vec(),
        first_quantifier,
        universe: universe_size,
        universal_total,
        wait_span,
        high_width: if with_wait_block { wait_span + 1 } else { 0 },
        unit,
        base,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BaseDNumeral {
    layout: Arc<DigitLayout>,
    /// Most significant first.
    digits: Vec<u64>,
}

impl BaseDNumeral {
    pub fn zero(layout: &Arc<DigitLayout>) -> Self {
        BaseDNumeral {
            layout: layout.clone(),
            digits: vec![0; layout.total_digits()],
        }
    }

    pub fn from_digits(layout: &Arc<DigitLayout>, digits: Vec<u64>) -> Result<Self, NumeralError> {
        if digits.len() != layout.total_digits() {
            return Err(NumeralError::PartLength {
                part: "numeral",
                expected: layout.total_digits(),
                got: digits.len(),
            });
        }
        check_digits(&digits, 0, layout.base)?;
        Ok(BaseDNumeral {
            layout: layout.clone(),
            digits,
        })
    }

    pub fn layout(&self) -> &Arc<DigitLayout> {
        &self.layout
    }

    pub fn digits(&self) -> &[u64] {
        &self.digits
    }

    pub fn digit(&self, index: usize) -> u64 {
        self.digits[index]
    }

    /// Set a digit; the caller keeps it below the base.
    pub(crate) fn set(&mut self, index: usize, digit: u64) {
        debug_assert!(digit < self.layout.base);
        self.digits[index] = digit;
    }

    pub fn is_zero(&self) -> bool {
        self.digits.iter().all(|&d| d == 0)
    }
}

fn check_digits(digits: &[u64], offset: usize, base: u64) -> Result<(), NumeralError> {
    match digits.iter().position(|&d| d >= base) {
        Some(i) => Err(NumeralError::DigitTooLarge {
            index: offset + i,
            digit: digits[i],
            base,
        }),
        None => Ok(()),
    }
}

/// Concatenate `high ‖ L ‖ B_1 … B_q`.
pub fn numeral_from_parts(
    layout: &Arc<DigitLayout>,
    high: &[u64],
    l_digits: &[u64],
    blocks: &[Vec<u64>],
) -> Result<BaseDNumeral, NumeralError> {
    let expect = |part, expected: usize, got: usize| {
        if expected == got {
            Ok(())
        } else {
            Err(NumeralError::PartLength {
                part,
                expected,
                got,
            })
        }
    };
    expect("high block", layout.high_width, high.len())?;
    expect("L-digits", layout.atoms, l_digits.len())?;
    expect("B-blocks", layout.vars, blocks.len())?;
    for block in blocks {
        expect("B-block", layout.block_width(), block.len())?;
    }
    let mut digits = Vec::with_capacity(layout.total_digits());
    digits.extend_from_slice(high);
    digits.extend_from_slice(l_digits);
    for block in blocks {
        digits.extend_from_slice(block);
    }
    BaseDNumeral::from_digits(layout, digits)
}

/// Column-wise sum with carries. The flag is set iff some column reached the
/// base before carrying (a carry out of the top column is dropped and flagged).
pub fn add_all(
    layout: &Arc<DigitLayout>,
    numerals: &[&BaseDNumeral],
) -> Result<(BaseDNumeral, bool), NumeralError> {
    if numerals.iter().any(|n| *n.layout != **layout) {
        return Err(NumeralError::MixedLayouts);
    }
    let base = layout.base as u128;
    let width = layout.total_digits();
    let mut out = vec![0u64; width];
    let mut carry: u128 = 0;
    let mut overflow = false;
    for idx in (0..width).rev() {
        let column: u128 = numerals.iter().map(|n| n.digits[idx] as u128).sum::<u128>() + carry;
        if column >= base {
            overflow = true;
        }
        out[idx] = (column % base) as u64;
        carry = column / base;
    }
    if carry > 0 {
        overflow = true;
    }
    Ok((
        BaseDNumeral {
            layout: layout.clone(),
            digits: out,
        },
        overflow,
    ))
}

pub fn to_natural(numeral: &BaseDNumeral) -> BigUint {
    let base = BigUint::from(numeral.layout.base);
    numeral
        .digits
        .iter()
        .fold(BigUint::zero(), |acc, &d| acc * &base + BigUint::from(d))
}

pub fn from_natural(layout: &Arc<DigitLayout>, value: &BigUint) -> Result<BaseDNumeral, NumeralError> {
    let width = layout.total_digits();
    let too_large = || NumeralError::ValueTooLarge {
        digits: width,
        base: layout.base,
    };
    let base = BigUint::from(layout.base);
    let mut rest = value.clone();
    let mut digits = vec![0u64; width];
    for slot in digits.iter_mut().rev() {
        if rest.is_zero() {
            break;
        }
        *slot = (&rest % &base).to_u64().ok_or_else(too_large)?;
        rest /= &base;
    }
    if !rest.is_zero() {
        return Err(too_large());
    }
    Ok(BaseDNumeral {
        layout: layout.clone(),
        digits,
    })
}

impl fmt::Display for BaseDNumeral {
    /// `high‖L|B_1|…|B_q`; digits are comma-separated when the base exceeds 10
    /// and some digit is not a single decimal character.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = &self.layout;
        let wide = self.digits.iter().any(|&d| d > 9);
        let group = |ds: &[u64]| -> String {
            let parts: Vec<String> = ds.iter().map(|d| d.to_string()).collect();
            parts.join(if wide { "," } else { "" })
        };
        let mut groups = Vec::new();
        let mut at = l.high_width;
        if l.atoms > 0 {
            groups.push(group(&self.digits[at..at + l.atoms]));
        }
        at += l.atoms;
        for _ in 0..l.vars {
            groups.push(group(&self.digits[at..at + l.block_width()]));
            at += l.block_width();
        }
        if l.high_width > 0 {
            write!(f, "{}‖", group(&self.digits[..l.high_width]))?;
        }
        write!(f, "{}", groups.join("|"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, Pow};

    fn fixture(with_wait: bool) -> Arc<DigitLayout> {
        Arc::new(make_layout(&[1, 1, 1], 2, 2, with_wait).unwrap())
    }

    fn block(d: [u64; 4]) -> Vec<u64> {
        d.to_vec()
    }

    #[test]
    fn layout_constants_for_three_singletons() {
        let l = fixture(true);
        assert_eq!((l.vars, l.unit, l.base, l.wait_span), (3, 4, 41, 4));
        assert_eq!(l.total_digits(), 19);
        assert_eq!(fixture(false).total_digits(), 14);
    }

    #[test]
    fn layout_constants_for_two_blocks() {
        let l = make_layout(&[2, 1], 1, 3, true).unwrap();
        assert_eq!((l.vars, l.unit, l.base), (3, 6, 61));
        assert_eq!(l.wait_span, 1 + 3);
    }

    #[test]
    fn layout_rejects_degenerate_input() {
        assert_eq!(make_layout(&[], 1, 2, true), Err(NumeralError::NoBlocks));
        assert_eq!(make_layout(&[1], 1, 0, true), Err(NumeralError::EmptyUniverse));
    }

    #[test]
    fn parts_concatenate_most_significant_first() {
        let l = fixture(false);
        let z = [0, 0, 0, 0];
        let n = numeral_from_parts(&l, &[], &[0, 0], &[block([1, 0, 0, 0]), block(z), block(z)]).unwrap();
        assert_eq!(n.to_string(), "00|1000|0000|0000");
        let zero = numeral_from_parts(&l, &[], &[0, 0], &[block(z), block(z), block(z)]).unwrap();
        assert!(zero.is_zero());

        let lw = fixture(true);
        let b = block([4, 4, 4, 1]);
        let t = numeral_from_parts(&lw, &[1; 5], &[1, 1], &[b.clone(), b.clone(), b]).unwrap();
        assert_eq!(t.to_string(), "11111‖11|4441|4441|4441");
    }

    #[test]
    fn parts_are_validated() {
        let l = fixture(false);
        let z = block([0, 0, 0, 0]);
        assert!(matches!(
            numeral_from_parts(&l, &[], &[0], &[z.clone(), z.clone(), z.clone()]),
            Err(NumeralError::PartLength { .. })
        ));
        assert!(matches!(
            numeral_from_parts(&l, &[], &[0, 41], &[z.clone(), z.clone(), z]),
            Err(NumeralError::DigitTooLarge { index: 1, .. })
        ));
    }

    #[test]
    fn add_all_matches_hand_sum() {
        let l = fixture(false);
        let z = block([0, 0, 0, 0]);
        let a = numeral_from_parts(&l, &[], &[0, 0], &[block([1, 0, 0, 0]), z.clone(), z.clone()]).unwrap();
        let b = numeral_from_parts(&l, &[], &[0, 0], &[z.clone(), block([0, 2, 0, 0]), z.clone()]).unwrap();
        let c = numeral_from_parts(&l, &[], &[0, 0], &[z.clone(), z.clone(), block([0, 0, 2, 0])]).unwrap();
        let (sum, overflow) = add_all(&l, &[&a, &b, &c]).unwrap();
        assert!(!overflow);
        assert_eq!(sum.to_string(), "00|1000|0200|0020");

        let (empty, overflow) = add_all(&l, &[]).unwrap();
        assert!(empty.is_zero() && !overflow);
    }

    #[test]
    fn add_all_flags_carries() {
        let l = fixture(false);
        let mut x = BaseDNumeral::zero(&l);
        x.set(l.block_index(3, 4), 40);
        let (sum, overflow) = add_all(&l, &[&x, &x]).unwrap();
        assert!(overflow);
        assert_eq!(to_natural(&sum), to_natural(&x) * 2u32);
    }

    #[test]
    fn add_all_rejects_mixed_layouts() {
        let a = BaseDNumeral::zero(&fixture(false));
        let b = BaseDNumeral::zero(&fixture(true));
        assert_eq!(add_all(a.layout(), &[&a, &b]), Err(NumeralError::MixedLayouts));
    }

    #[test]
    fn positional_value() {
        let l = fixture(false);
        let mut x = BaseDNumeral::zero(&l);
        assert!(to_natural(&x).is_zero());
        x.set(l.block_index(1, 1), 1);
        assert_eq!(to_natural(&x), BigUint::from(41u32).pow(11u32));
    }

    #[test]
    fn from_natural_rejects_oversized_values() {
        let l = fixture(false);
        let limit = BigUint::from(41u32).pow(14u32);
        assert!(from_natural(&l, &(&limit - BigUint::one())).is_ok());
        assert!(matches!(
            from_natural(&l, &limit),
            Err(NumeralError::ValueTooLarge { .. })
        ));
    }
}
