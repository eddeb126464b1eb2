//! Multiplication backend for the product trees.
//!
//! With the `gmp` feature the trees run on GMP integers, whose FFT
//! multiplication keeps reconstruction close to `n log² n`; without it they
//! run on `num-bigint`. Either way values leave this module as [`Natural`].

use crate::reconstruct::Natural;

#[cfg(feature = "gmp")]
mod imp {
    use rug::integer::Order;
    use rug::ops::Pow;
    use rug::Integer;

    use crate::reconstruct::Natural;

    pub type Big = Integer;

    pub fn from_u128(v: u128) -> Big {
        Integer::from(v)
    }

    pub fn bits(v: &Big) -> u64 {
        u64::from(v.significant_bits())
    }

    pub fn pow(base: &Big, e: u64) -> Big {
        if let Ok(e) = u32::try_from(e) {
            return Integer::from(base.pow(e));
        }
        let mut acc = Integer::from(1);
        for i in (0..64 - e.leading_zeros()).rev() {
            acc.square_mut();
            if (e >> i) & 1 == 1 {
                acc *= base;
            }
        }
        acc
    }

    pub fn to_natural(v: Big) -> Natural {
        Natural::from_slice(&v.to_digits::<u32>(Order::Lsf))
    }

    pub fn from_natural(v: &Natural) -> Big {
        Integer::from_digits(&v.to_u32_digits(), Order::Lsf)
    }

    pub fn to_decimal(v: &Natural) -> String {
        from_natural(v).to_string_radix(10)
    }

    pub fn to_le_bytes(v: &Big) -> Vec<u8> {
        v.to_digits::<u8>(Order::Lsf)
    }

    pub fn from_le_bytes(bytes: &[u8]) -> Big {
        Integer::from_digits(bytes, Order::Lsf)
    }
}

#[cfg(not(feature = "gmp"))]
mod imp {
    use num_traits::Pow;

    use crate::reconstruct::Natural;

    pub type Big = Natural;

    pub fn from_u128(v: u128) -> Big {
        Natural::from(v)
    }

    pub fn bits(v: &Big) -> u64 {
        v.bits()
    }

    pub fn pow(base: &Big, e: u64) -> Big {
        Pow::pow(base, e)
    }

    pub fn to_natural(v: Big) -> Natural {
        v
    }

    pub fn from_natural(v: &Natural) -> Big {
        v.clone()
    }

    pub fn to_decimal(v: &Natural) -> String {
        v.to_str_radix(10)
    }

    pub fn to_le_bytes(v: &Big) -> Vec<u8> {
        v.to_bytes_le()
    }

    pub fn from_le_bytes(bytes: &[u8]) -> Big {
        Natural::from_bytes_le(bytes)
    }
}

pub(crate) use imp::{bits, from_le_bytes, from_natural, from_u128, pow, to_decimal, to_le_bytes, to_natural, Big};

pub(crate) fn one() -> Big {
    from_u128(1)
}

/// Digits of a nonzero `value`.
pub(crate) fn decimal_len(value: &Natural) -> u64 {
    let big = from_natural(value);
    // 10^lower <= value, and value < 10^(lower + 2)
    let lower = ((bits(&big) - 1) as f64 * std::f64::consts::LOG10_2).floor() as u64;
    let lower = lower.saturating_sub(1);
    let mut d = lower;
    let mut next = pow(&from_u128(10), lower + 1);
    while next <= big {
        next *= from_u128(10);
        d += 1;
    }
    d + 1
}
