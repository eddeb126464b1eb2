//! Binary fixed-point reals with 256 fractional bits, and the handful of
//! transcendental values the digit estimate and target solver need
//! (`ln 2`, `ln 10`, `π`, `log10` of big integers).
//!
//! Internally everything is evaluated with 64 guard bits and truncated once.
//! For arguments below `2^(2^32)` the absolute error of [`log10_of`] stays
//! below `2^-200` (see [`LOG10_ERROR_EXPONENT`]).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub};
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub const FRAC_BITS: u32 = 256;
const GUARD_BITS: u32 = 64;
const WORK_BITS: u32 = FRAC_BITS + GUARD_BITS;

/// `log10_of(x)` is within `2^-LOG10_ERROR_EXPONENT` of the true value.
pub const LOG10_ERROR_EXPONENT: u32 = 200;

/// A real number `raw / 2^256`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Fixed {
    raw: BigInt,
}

impl Fixed {
    pub fn zero() -> Self {
        Fixed { raw: BigInt::zero() }
    }

    pub fn from_int(v: impl Into<BigInt>) -> Self {
        Fixed {
            raw: v.into() << FRAC_BITS,
        }
    }

    /// `2^-k`.
    pub fn pow2_neg(k: u32) -> Self {
        assert!(k <= FRAC_BITS, "2^-{k} is below fixed-point resolution");
        Fixed {
            raw: BigInt::one() << (FRAC_BITS - k),
        }
    }

    fn from_work(raw: BigInt) -> Self {
        // floor division by 2^GUARD_BITS
        Fixed { raw: raw >> GUARD_BITS }
    }

    fn to_work(&self) -> BigInt {
        &self.raw << GUARD_BITS
    }

    pub fn is_zero(&self) -> bool {
        self.raw.is_zero()
    }

    pub fn mul_int(&self, k: u64) -> Self {
        Fixed { raw: &self.raw * k }
    }

    /// Truncated toward negative infinity.
    pub fn mul(&self, other: &Fixed) -> Self {
        Fixed {
            raw: (&self.raw * &other.raw) >> FRAC_BITS,
        }
    }

    /// Truncated toward negative infinity. Panics on division by zero.
    pub fn div(&self, other: &Fixed) -> Self {
        Fixed {
            raw: (&self.raw << FRAC_BITS).div_floor(&other.raw),
        }
    }

    pub fn floor(&self) -> BigInt {
        &self.raw >> FRAC_BITS
    }

    /// `self - floor(self)`, in `[0, 1)`.
    pub fn fract(&self) -> Fixed {
        let mask = (BigInt::one() << FRAC_BITS) - 1u8;
        Fixed {
            raw: self.raw.clone() & mask,
        }
    }

    pub fn abs(&self) -> Fixed {
        Fixed { raw: self.raw.abs() }
    }

    pub fn to_f64(&self) -> f64 {
        // keep 64 significant fractional bits, plenty for f64
        let shifted: BigInt = &self.raw >> (FRAC_BITS - 64);
        shifted.to_f64().unwrap_or(f64::NAN) / 2f64.powi(64)
    }

    /// Decimal rendering truncated (toward negative infinity) to `places`
    /// fractional digits.
    pub fn to_decimal(&self, places: usize) -> String {
        let scaled = (&self.raw * BigInt::from(10u8).pow(places as u32)) >> FRAC_BITS;
        let negative = scaled.sign() == Sign::Minus;
        let digits = scaled.abs().to_string();
        let digits = if digits.len() <= places {
            format!("{}{}", "0".repeat(places + 1 - digits.len()), digits)
        } else {
            digits
        };
        let (int_part, frac_part) = digits.split_at(digits.len() - places);
        let sign = if negative { "-" } else { "" };
        if places == 0 {
            format!("{sign}{int_part}")
        } else {
            format!("{sign}{int_part}.{frac_part}")
        }
    }

    pub fn raw(&self) -> &BigInt {
        &self.raw
    }
}

impl fmt::Display for Fixed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal(f.precision().unwrap_or(20)))
    }
}

impl Add for &Fixed {
    type Output = Fixed;
    fn add(self, rhs: &Fixed) -> Fixed {
        Fixed {
            raw: &self.raw + &rhs.raw,
        }
    }
}

impl Add for Fixed {
    type Output = Fixed;
    fn add(self, rhs: Fixed) -> Fixed {
        Fixed {
            raw: self.raw + rhs.raw,
        }
    }
}

impl AddAssign<&Fixed> for Fixed {
    fn add_assign(&mut self, rhs: &Fixed) {
        self.raw += &rhs.raw;
    }
}

impl Sub for &Fixed {
    type Output = Fixed;
    fn sub(self, rhs: &Fixed) -> Fixed {
        Fixed {
            raw: &self.raw - &rhs.raw,
        }
    }
}

impl Sub for Fixed {
    type Output = Fixed;
    fn sub(self, rhs: Fixed) -> Fixed {
        Fixed {
            raw: self.raw - rhs.raw,
        }
    }
}

impl Neg for Fixed {
    type Output = Fixed;
    fn neg(self) -> Fixed {
        Fixed { raw: -self.raw }
    }
}

// ---------------------------------------------------------------------------
// transcendental helpers, all at WORK_BITS

fn work_one() -> BigInt {
    BigInt::one() << WORK_BITS
}

fn mul_work(a: &BigInt, b: &BigInt) -> BigInt {
    (a * b) >> WORK_BITS
}

/// `atanh(1/k) = Σ 1 / ((2j+1) k^(2j+1))`.
fn atanh_recip(k: u64) -> BigInt {
    let k2 = BigInt::from(k) * k;
    let mut power = work_one() / k;
    let mut sum = BigInt::zero();
    let mut j = 0u64;
    while !power.is_zero() {
        sum += &power / (2 * j + 1);
        power /= &k2;
        j += 1;
    }
    sum
}

/// `atan(1/k) = Σ (-1)^j / ((2j+1) k^(2j+1))`.
fn atan_recip(k: u64) -> BigInt {
    let k2 = BigInt::from(k) * k;
    let mut power = work_one() / k;
    let mut sum = BigInt::zero();
    let mut j = 0u64;
    while !power.is_zero() {
        let term = &power / (2 * j + 1);
        if j.is_multiple_of(2) {
            sum += term;
        } else {
            sum -= term;
        }
        power /= &k2;
        j += 1;
    }
    sum
}

fn ln2_work() -> &'static BigInt {
    static LN2: OnceLock<BigInt> = OnceLock::new();
    LN2.get_or_init(|| atanh_recip(3) << 1)
}

fn ln10_work() -> &'static BigInt {
    // ln 10 = 3 ln 2 + ln(5/4), ln(5/4) = 2 atanh(1/9)
    static LN10: OnceLock<BigInt> = OnceLock::new();
    LN10.get_or_init(|| ln2_work() * 3u8 + (atanh_recip(9) << 1))
}

fn pi_work() -> &'static BigInt {
    // Machin: π = 16 atan(1/5) - 4 atan(1/239)
    static PI: OnceLock<BigInt> = OnceLock::new();
    PI.get_or_init(|| (atan_recip(5) << 4) - (atan_recip(239) << 2))
}

fn sqrt2_work() -> &'static BigInt {
    static SQRT2: OnceLock<BigInt> = OnceLock::new();
    SQRT2.get_or_init(|| {
        let two = BigUint::from(2u8) << (2 * WORK_BITS);
        BigInt::from(two.sqrt())
    })
}

/// `ln(m)` for `m` in `[1/√2, √2]`, via `2 atanh((m-1)/(m+1))`.
fn ln_near_one(m: &BigInt) -> BigInt {
    let one = work_one();
    // series on |t| so every truncation goes toward zero
    let below_one = *m < one;
    let t = ((m - &one).abs() << WORK_BITS) / (m + &one);
    let t2 = mul_work(&t, &t);
    let mut power = t;
    let mut sum = BigInt::zero();
    let mut j = 0u64;
    while !power.is_zero() {
        sum += &power / (2 * j + 1);
        power = mul_work(&power, &t2);
        j += 1;
    }
    let ln: BigInt = sum << 1u32;
    if below_one {
        -ln
    } else {
        ln
    }
}

/// `ln(x)` at working precision for `x >= 1`.
fn ln_work(x: &BigUint) -> BigInt {
    assert!(!x.is_zero(), "logarithm of zero");
    let top = x.bits() - 1;
    // mantissa in [1, 2) with WORK_BITS fractional bits
    let mantissa = if top <= WORK_BITS as u64 {
        x << (WORK_BITS as u64 - top)
    } else {
        x >> (top - WORK_BITS as u64)
    };
    let mut mantissa = BigInt::from(mantissa);
    let mut exponent = BigInt::from(top);
    if mantissa > *sqrt2_work() {
        mantissa >>= 1;
        exponent += 1;
    }
    exponent * ln2_work() + ln_near_one(&mantissa)
}

pub fn ln2() -> Fixed {
    Fixed::from_work(ln2_work().clone())
}

pub fn ln10() -> Fixed {
    Fixed::from_work(ln10_work().clone())
}

pub fn pi() -> Fixed {
    Fixed::from_work(pi_work().clone())
}

/// `log10(x)` for `x >= 1`.
pub fn log10_of(x: &BigUint) -> Fixed {
    let ln = ln_work(x);
    Fixed::from_work((ln << WORK_BITS).div_floor(ln10_work()))
}

/// `log10(v)` for a positive fixed-point value.
pub fn log10_fixed(v: &Fixed) -> Fixed {
    assert!(v.raw.is_positive(), "logarithm of a non-positive value");
    let raw = v.to_work().to_biguint().expect("positive");
    // v = raw / 2^WORK_BITS
    let ln = ln_work(&raw) - ln2_work() * WORK_BITS;
    Fixed::from_work((ln << WORK_BITS).div_floor(ln10_work()))
}

impl PartialEq<i64> for Fixed {
    fn eq(&self, other: &i64) -> bool {
        self.cmp(&Fixed::from_int(*other)) == Ordering::Equal
    }
}
