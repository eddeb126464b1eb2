use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;

use super::ExponentGroup;
use crate::precise::{log10_of, Fixed, LOG10_ERROR_EXPONENT};

/// Primes are multiplied exactly into products of about this many bits before
/// a logarithm is taken, so one `log10` evaluation covers ~150 primes.
const BATCH_BITS: u64 = 4096;
/// Unit of parallel work; fixed so the error bound is independent of the pool.
const PRIMES_PER_TASK: usize = 1 << 14;

/// `Σ e_p log10(p)` with a rigorous absolute error bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitEstimate {
    pub log10_sum: Fixed,
    pub error_bound: Fixed,
    /// `⌊log10_sum⌋ + 1`.
    pub digits: u64,
    /// Set when `[log10_sum - error_bound, log10_sum + error_bound]` contains
    /// an integer, i.e. when `digits` might be off by one.
    pub boundary_flag: bool,
}

impl DigitEstimate {
    fn from_sum(log10_sum: Fixed, error_bound: Fixed) -> Self {
        let lo = (&log10_sum - &error_bound).floor();
        let hi = (&log10_sum + &error_bound).floor();
        let digits = log10_sum
            .floor()
            .to_u64()
            .expect("log10 of a natural is non-negative and bounded")
            + 1;
        DigitEstimate {
            boundary_flag: lo != hi,
            log10_sum,
            error_bound,
            digits,
        }
    }

    /// True when `digits` is certainly the decimal length.
    pub fn is_exact(&self) -> bool {
        !self.boundary_flag
    }
}

/// Number of decimal digits of `Π p^e` over the groups, without forming it.
pub fn estimate_digits(groups: &[ExponentGroup]) -> DigitEstimate {
    let mut sum = Fixed::zero();
    let mut evaluations: u64 = 0;
    for group in groups {
        let (group_sum, group_evals) = group
            .primes
            .par_chunks(PRIMES_PER_TASK)
            .map(log10_of_product)
            .reduce(|| (Fixed::zero(), 0), |a, b| (a.0 + b.0, a.1 + b.1));
        sum += &group_sum.mul_int(group.exponent);
        evaluations += group_evals * group.exponent;
    }
    let error_bound = Fixed::pow2_neg(LOG10_ERROR_EXPONENT).mul_int(evaluations);
    DigitEstimate::from_sum(sum, error_bound)
}

/// `log10(Π primes)` and the number of `log10` evaluations it took.
fn log10_of_product(primes: &[u64]) -> (Fixed, u64) {
    let mut sum = Fixed::zero();
    let mut evals = 0;
    let mut product = BigUint::one();
    let mut small: u128 = 1;
    for &p in primes {
        match small.checked_mul(p as u128) {
            Some(v) => small = v,
            None => {
                product *= small;
                small = p as u128;
                if product.bits() >= BATCH_BITS {
                    sum += &log10_of(&product);
                    evals += 1;
                    product = BigUint::one();
                }
            }
        }
    }
    product *= small;
    if product > BigUint::one() {
        sum += &log10_of(&product);
        evals += 1;
    }
    (sum, evals)
}
