//! p-adic valuations of factorials and factorial ratios.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::sieve::{first_missing_seed, MAX_LIMIT};

/// `Π a_i! / Π b_j!`. Catalan(n) is `(2n)! / (n! (n+1)!)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RatioSpec {
    numerator: Vec<u64>,
    denominator: Vec<u64>,
}

impl RatioSpec {
    pub fn new(numerator: Vec<u64>, denominator: Vec<u64>) -> Result<Self> {
        if numerator.is_empty() && denominator.is_empty() {
            return Err(Error::InvalidArgument(
                "a factorial ratio needs at least one factorial argument".into(),
            ));
        }
        if let Some(&big) = numerator.iter().chain(&denominator).find(|&&a| a > MAX_LIMIT) {
            return Err(Error::InvalidArgument(format!(
                "factorial argument {big} exceeds the supported maximum {MAX_LIMIT}"
            )));
        }
        Ok(RatioSpec { numerator, denominator })
    }

    pub fn catalan(n: u64) -> Result<Self> {
        if n > MAX_LIMIT / 2 {
            return Err(Error::InvalidArgument(format!(
                "Catalan index {n} exceeds the supported maximum {}",
                MAX_LIMIT / 2
            )));
        }
        Self::new(vec![2 * n], vec![n, n + 1])
    }

    /// `n! / (k! (n-k)!)`.
    pub fn binomial(n: u64, k: u64) -> Result<Self> {
        if k > n {
            return Err(Error::InvalidArgument(format!("binomial C({n}, {k}) needs k <= n")));
        }
        Self::new(vec![n], vec![k, n - k])
    }

    /// `(k_1 + ... + k_m)! / (k_1! ... k_m!)`.
    pub fn multinomial(parts: &[u64]) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidArgument("multinomial needs at least one part".into()));
        }
        let total = parts
            .iter()
            .try_fold(0u64, |acc, &k| acc.checked_add(k))
            .ok_or_else(|| Error::InvalidArgument("multinomial total overflows".into()))?;
        Self::new(vec![total], parts.to_vec())
    }

    pub fn numerator(&self) -> &[u64] {
        &self.numerator
    }

    pub fn denominator(&self) -> &[u64] {
        &self.denominator
    }

    /// `Some(n)` when this is exactly the Catalan form `[2n] / [n, n+1]`.
    pub fn as_catalan(&self) -> Option<u64> {
        match (self.numerator.as_slice(), self.denominator.as_slice()) {
            (&[two_n], &[n, n_plus_1]) if two_n == 2 * n && n_plus_1 == n + 1 => Some(n),
            _ => None,
        }
    }

    /// Largest factorial argument; every prime dividing the ratio is at most this.
    pub fn max_arg(&self) -> u64 {
        self.numerator
            .iter()
            .chain(&self.denominator)
            .copied()
            .max()
            .unwrap_or(0)
    }
}

/// Accepts the display forms `Catalan(n)` and `Ratio(a,b/c,d)`, and the bare
/// `a,b/c,d`.
impl FromStr for RatioSpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("cannot read a factorial ratio from {text:?}"));
        let text = text.trim();
        if let Some(n) = text.strip_prefix("Catalan(").and_then(|t| t.strip_suffix(')')) {
            return RatioSpec::catalan(n.trim().parse().map_err(|_| bad())?);
        }
        let body = match text.strip_prefix("Ratio(") {
            Some(rest) => rest.strip_suffix(')').ok_or_else(bad)?,
            None => text,
        };
        let (num, den) = body.split_once('/').ok_or_else(bad)?;
        let list = |s: &str| -> Result<Vec<u64>> {
            let s = s.trim();
            if s.is_empty() {
                return Ok(Vec::new());
            }
            s.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect()
        };
        RatioSpec::new(list(num)?, list(den)?)
    }
}

impl fmt::Display for RatioSpec {
    /// `Catalan(n)` for the Catalan form, otherwise `Ratio(a,b/c,d)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(n) = self.as_catalan() {
            return write!(f, "Catalan({n})");
        }
        let join = |v: &[u64]| v.iter().map(u64::to_string).collect::<Vec<_>>().join(",");
        write!(f, "Ratio({}/{})", join(&self.numerator), join(&self.denominator))
    }
}

/// `v_p((2n)!)`, `v_p(n!)` and `v_p(n+1)` for one prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValuationTriple {
    pub a: u64,
    pub b: u64,
    pub c: u64,
}

impl ValuationTriple {
    pub fn compute(n: u64, p: u64) -> Result<Self> {
        Ok(ValuationTriple {
            a: legendre(2 * n, p)?,
            b: legendre(n, p)?,
            c: valuation_of_integer(n + 1, p)?,
        })
    }

    /// `a - 2b - c`, which may be negative only if something upstream is wrong.
    pub fn exponent(&self) -> i128 {
        self.a as i128 - 2 * self.b as i128 - self.c as i128
    }
}

fn check_prime_arg(p: u64) -> Result<()> {
    if p < 2 {
        return Err(Error::InvalidArgument(format!(
            "valuation base must be a prime >= 2, got {p}"
        )));
    }
    Ok(())
}

/// Legendre's formula: `v_p(m!) = Σ_{k>=1} ⌊m / p^k⌋`.
///
/// Iterates `m <- ⌊m / p⌋`, so no power of `p` is ever formed.
pub fn legendre(m: u64, p: u64) -> Result<u64> {
    check_prime_arg(p)?;
    let mut rest = m / p;
    let mut total = 0;
    while rest > 0 {
        total += rest;
        rest /= p;
    }
    Ok(total)
}

/// Largest `c` with `p^c | m`.
pub fn valuation_of_integer(mut m: u64, p: u64) -> Result<u64> {
    check_prime_arg(p)?;
    if m == 0 {
        return Err(Error::InvalidArgument("valuation of 0 is unbounded".into()));
    }
    let mut c = 0;
    while m.is_multiple_of(p) {
        m /= p;
        c += 1;
    }
    Ok(c)
}

/// `v_p(C(n))`. Zero for `p > 2n`.
pub fn catalan_exponent(n: u64, p: u64) -> Result<u64> {
    check_prime_arg(p)?;
    if n > MAX_LIMIT / 2 {
        return Err(Error::InvalidArgument(format!("Catalan index {n} too large")));
    }
    let correction = valuation_of_integer(n + 1, p)?;
    catalan_exponent_with(n, p, correction)
}

/// `v_p(C(n))` given `v_p(n+1)` from a precomputed factorization of `n+1`.
pub(crate) fn catalan_exponent_with(n: u64, p: u64, correction: u64) -> Result<u64> {
    let two_n = 2 * n;
    if p > two_n {
        return Ok(0);
    }
    let raw = if p > n {
        // p^2 > 2n and p does not divide n!, so a - 2b = ⌊2n/p⌋ ∈ {0, 1}
        two_n / p
    } else {
        legendre(two_n, p)? - 2 * legendre(n, p)?
    };
    raw.checked_sub(correction)
        .ok_or_else(|| Error::Inconsistency(format!("negative exponent for prime {p} in Catalan({n})")))
}

/// `v_p(N) = Σ v_p(a_i!) - Σ v_p(b_j!)`. Negative means the ratio is not an
/// integer; the caller decides what to do about it.
pub fn ratio_exponent(spec: &RatioSpec, p: u64) -> Result<i64> {
    check_prime_arg(p)?;
    let mut total: i128 = 0;
    for &a in &spec.numerator {
        total += legendre(a, p)? as i128;
    }
    for &b in &spec.denominator {
        total -= legendre(b, p)? as i128;
    }
    i64::try_from(total).map_err(|_| Error::InvalidArgument(format!("exponent of {p} overflows a 64-bit integer")))
}

/// Factors `m` using `primes`, which must be ascending and include every prime
/// `<= √m`. A leftover cofactor above `√m` is prime and appears with exponent 1.
pub fn factor_by_trial_division(m: u64, primes: &[u64]) -> Result<BTreeMap<u64, u64>> {
    if m == 0 {
        return Err(Error::InvalidArgument("cannot factor 0".into()));
    }
    let mut factors = BTreeMap::new();
    let mut rest = m;
    let mut passed_root = false;
    for &p in primes {
        if p.saturating_mul(p) > rest {
            passed_root = true;
            break;
        }
        let mut c = 0;
        while rest.is_multiple_of(p) {
            rest /= p;
            c += 1;
        }
        if c > 0 {
            factors.insert(p, c);
        }
    }
    if rest > 1 {
        if !passed_root {
            if let Some(missing) = first_missing_seed(rest, primes) {
                return Err(Error::InvalidArgument(format!(
                    "prime list is missing {missing}, needed to factor {m}"
                )));
            }
        }
        factors.insert(rest, 1);
    }
    Ok(factors)
}
