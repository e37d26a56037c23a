//! Natural-number scalar abstraction shared by the solver and the machine.

use std::fmt::{Debug, Display};
use std::hash::Hash;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{CheckedAdd, FromPrimitive, One, ToPrimitive, Unsigned, Zero};

/// An unbounded or fixed-width natural number.
///
/// Fixed-width implementors must have headroom for every sum formed from an
/// instance; [`crate::altss::AltssInstance::new`] checks this up front.
pub trait Natural:
    Clone
    + Ord
    + Eq
    + Hash
    + Debug
    + Display
    + FromStr
    + Zero
    + One
    + Unsigned
    + CheckedAdd
    + ToPrimitive
    + FromPrimitive
    + Send
    + Sync
    + 'static
{
    /// `self - other`, cut off at zero.
    fn monus(&self, other: &Self) -> Self {
        if self > other {
            self.clone() - other.clone()
        } else {
            Self::zero()
        }
    }

    /// Halving, rounded down.
    fn half(&self) -> Self {
        self.clone() / (Self::one() + Self::one())
    }

    fn to_biguint(&self) -> BigUint;

    fn from_biguint(value: &BigUint) -> Option<Self>;
}

macro_rules! impl_fixed_natural {
    ($($t:ty),*) => {
        $(
            impl Natural for $t {
                fn to_biguint(&self) -> BigUint {
                    BigUint::from(*self)
                }

                fn from_biguint(value: &BigUint) -> Option<Self> {
                    <$t>::try_from(value).ok()
                }
            }
        )*
    };
}

impl_fixed_natural!(u32, u64, u128);

impl Natural for BigUint {
    fn to_biguint(&self) -> BigUint {
        self.clone()
    }

    fn from_biguint(value: &BigUint) -> Option<Self> {
        Some(value.clone())
    }
}

/// Sum of a slice, `None` on fixed-width overflow.
pub fn checked_sum<'a, T: Natural>(values: impl IntoIterator<Item = &'a T>) -> Option<T> {
    values
        .into_iter()
        .try_fold(T::zero(), |acc, v| acc.checked_add(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monus_floors_at_zero() {
        assert_eq!(3u64.monus(&5), 0);
        assert_eq!(5u64.monus(&3), 2);
        assert_eq!(BigUint::from(2u8).monus(&BigUint::from(9u8)), BigUint::zero());
    }

    #[test]
    fn half_rounds_down() {
        for v in 0u64..20 {
            let h = v.half();
            assert!(2 * h <= v && v < 2 * h + 2);
        }
    }

    #[test]
    fn checked_sum_detects_overflow() {
        assert_eq!(checked_sum(&[u32::MAX, 1]), None);
        assert_eq!(checked_sum(&[1u32, 2, 3]), Some(6));
    }
}
