//! Phase 1: from a factorial ratio to its grouped prime factorization.
//!
//! Primes up to the largest factorial argument are streamed out of the
//! segmented sieve, each gets its exponent from Legendre's formula, and primes
//! sharing an exponent are collected into one [`ExponentGroup`]. Groups are
//! kept in descending exponent order, which is also the file order.

mod estimate;
mod format;

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::parallel::with_workers;
use crate::sieve::{seed_primes, Segments, SieveLimit, DEFAULT_SEGMENT_SIZE};
use crate::valuation::{catalan_exponent_with, factor_by_trial_division, ratio_exponent, RatioSpec};

pub use estimate::{estimate_digits, DigitEstimate};
pub use format::{parse, serialize, serialize_with, FormatOptions, DEFAULT_LINE_WIDTH};

/// Primes that occur with exactly the same exponent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExponentGroup {
    pub exponent: u64,
    pub primes: Vec<u64>,
}

impl ExponentGroup {
    pub fn new(exponent: u64, primes: Vec<u64>) -> Result<Self> {
        if exponent == 0 {
            return Err(Error::InvalidArgument("exponent groups must have exponent >= 1".into()));
        }
        if primes.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "exponent group {exponent} has no primes"
            )));
        }
        if let Some(w) = primes.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(format!(
                "exponent group {exponent} is not strictly ascending at {} {}",
                w[0], w[1]
            )));
        }
        Ok(ExponentGroup { exponent, primes })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    spec: RatioSpec,
    groups: Vec<ExponentGroup>,
    prime_count: u64,
    digit_estimate: DigitEstimate,
}

impl Factorization {
    /// Validates that no prime sits in two groups and that exponents are
    /// distinct, orders groups by descending exponent and computes the digit
    /// estimate.
    pub fn new(spec: RatioSpec, mut groups: Vec<ExponentGroup>) -> Result<Self> {
        groups.sort_by_key(|g| Reverse(g.exponent));
        if let Some(w) = groups.windows(2).find(|w| w[0].exponent == w[1].exponent) {
            return Err(Error::InvalidArgument(format!(
                "exponent {} appears in two groups",
                w[0].exponent
            )));
        }
        if let Some(p) = first_shared_prime(&groups) {
            return Err(Error::InvalidArgument(format!(
                "prime {p} appears in more than one exponent group"
            )));
        }
        Ok(Self::from_disjoint(spec, groups))
    }

    fn from_disjoint(spec: RatioSpec, groups: Vec<ExponentGroup>) -> Self {
        let prime_count = groups.iter().map(|g| g.primes.len() as u64).sum();
        let digit_estimate = estimate_digits(&groups);
        Factorization {
            spec,
            groups,
            prime_count,
            digit_estimate,
        }
    }

    pub fn spec(&self) -> &RatioSpec {
        &self.spec
    }

    /// Descending by exponent.
    pub fn groups(&self) -> &[ExponentGroup] {
        &self.groups
    }

    pub fn prime_count(&self) -> u64 {
        self.prime_count
    }

    pub fn digit_estimate(&self) -> &DigitEstimate {
        &self.digit_estimate
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// `(prime, exponent)` pairs, group by group.
    pub fn prime_powers(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.groups
            .iter()
            .flat_map(|g| g.primes.iter().map(move |&p| (p, g.exponent)))
    }

    /// Conventional output file name, `catalan_<n>_factorization.txt` for
    /// Catalan numbers.
    pub fn file_name(&self) -> String {
        format!("{}_factorization.txt", artifact_stem(&self.spec))
    }
}

/// `catalan_<n>` or `ratio_<a>-<b>_over_<c>-<d>`; shared by all artifacts of
/// one computation.
pub fn artifact_stem(spec: &RatioSpec) -> String {
    if let Some(n) = spec.as_catalan() {
        return format!("catalan_{n}");
    }
    let join = |v: &[u64]| v.iter().map(u64::to_string).collect::<Vec<_>>().join("-");
    format!("ratio_{}_over_{}", join(spec.numerator()), join(spec.denominator()))
}

// k-way merge over the ascending groups
fn first_shared_prime(groups: &[ExponentGroup]) -> Option<u64> {
    let mut heads: BinaryHeap<Reverse<(u64, usize, usize)>> = groups
        .iter()
        .enumerate()
        .map(|(g, group)| Reverse((group.primes[0], g, 0)))
        .collect();
    let mut last = None;
    while let Some(Reverse((p, g, i))) = heads.pop() {
        if last == Some(p) {
            return Some(p);
        }
        last = Some(p);
        if let Some(&next) = groups[g].primes.get(i + 1) {
            heads.push(Reverse((next, g, i + 1)));
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FactorizeConfig {
    pub segment_size: u64,
    /// `None` uses one worker per logical core.
    pub workers: Option<usize>,
}

impl Default for FactorizeConfig {
    fn default() -> Self {
        FactorizeConfig {
            segment_size: DEFAULT_SEGMENT_SIZE,
            workers: None,
        }
    }
}

enum ExponentRule {
    /// Catalan fast path; `n + 1` factored once up front.
    Catalan {
        n: u64,
        n_plus_one: BTreeMap<u64, u64>,
    },
    General(RatioSpec),
}

impl ExponentRule {
    fn exponent(&self, p: u64) -> Result<u64> {
        match self {
            ExponentRule::Catalan { n, n_plus_one } => {
                catalan_exponent_with(*n, p, n_plus_one.get(&p).copied().unwrap_or(0))
            }
            ExponentRule::General(spec) => {
                let e = ratio_exponent(spec, p)?;
                u64::try_from(e).map_err(|_| Error::NonIntegral { prime: p, exponent: e })
            }
        }
    }
}

/// Computes the grouped prime factorization of the ratio.
///
/// Fails with [`Error::NonIntegral`] naming the smallest prime whose net
/// exponent is negative. The result does not depend on `config`.
pub fn factorize(spec: &RatioSpec, config: &FactorizeConfig) -> Result<Factorization> {
    let limit = spec.max_arg();
    if limit < 2 {
        return Ok(Factorization::from_disjoint(spec.clone(), Vec::new()));
    }
    let rule = match spec.as_catalan() {
        Some(n) => ExponentRule::Catalan {
            n,
            n_plus_one: factor_by_trial_division(n + 1, &seed_primes((n + 1).isqrt()))?,
        },
        None => ExponentRule::General(spec.clone()),
    };
    let segments = Segments::new(SieveLimit::new(limit)?, config.segment_size)?;

    let mut by_exponent: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    with_workers(config.workers, || {
        segments.map_ordered(
            |segment| -> Vec<Result<(u64, u64)>> {
                // kept in prime order so the first error is the smallest prime
                segment
                    .primes
                    .par_iter()
                    .map(|&p| rule.exponent(p).map(|e| (e, p)))
                    .filter(|r| !matches!(r, Ok((0, _))))
                    .collect()
            },
            |batch| {
                for item in batch {
                    let (e, p) = item?;
                    by_exponent.entry(e).or_default().push(p);
                }
                Ok::<(), Error>(())
            },
        )
    })??;

    let groups = by_exponent
        .into_iter()
        .rev()
        .map(|(exponent, primes)| ExponentGroup { exponent, primes })
        .collect();
    Ok(Factorization::from_disjoint(spec.clone(), groups))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;
    use num_traits::One;

    fn catalan(n: u64) -> Factorization {
        factorize(&RatioSpec::catalan(n).unwrap(), &FactorizeConfig::default()).unwrap()
    }

    fn expand(f: &Factorization) -> BigUint {
        f.prime_powers()
            .fold(BigUint::one(), |acc, (p, e)| acc * BigUint::from(p).pow(e as u32))
    }

    #[test]
    fn catalan_five() {
        let f = catalan(5);
        assert_eq!(
            f.groups(),
            &[ExponentGroup {
                exponent: 1,
                primes: vec![2, 3, 7]
            }]
        );
        assert_eq!(f.prime_count(), 3);
        assert_eq!(f.digit_estimate().digits, 2);
    }

    #[test]
    fn catalan_ten_and_trivial() {
        assert_eq!(expand(&catalan(10)), BigUint::from(16796u32));
        for n in [0, 1] {
            let f = catalan(n);
            assert!(f.is_empty());
            assert_eq!(f.prime_count(), 0);
            assert_eq!(f.digit_estimate().digits, 1);
        }
    }

    #[test]
    fn general_ratios() {
        let f = factorize(&RatioSpec::binomial(4, 2).unwrap(), &FactorizeConfig::default()).unwrap();
        assert_eq!(expand(&f), BigUint::from(6u8));
        let f = factorize(
            &RatioSpec::multinomial(&[2, 3, 4]).unwrap(),
            &FactorizeConfig::default(),
        )
        .unwrap();
        assert_eq!(expand(&f), BigUint::from(1260u32));
        let err = factorize(&RatioSpec::new(vec![2], vec![4]).unwrap(), &FactorizeConfig::default()).unwrap_err();
        assert!(matches!(err, Error::NonIntegral { prime: 2, exponent: -2 }), "{err:?}");
    }

    #[test]
    fn configuration_does_not_change_result() {
        let spec = RatioSpec::catalan(3000).unwrap();
        let base = factorize(&spec, &FactorizeConfig::default()).unwrap();
        for (segment_size, workers) in [(1, Some(1)), (7, Some(4)), (100_000, Some(2))] {
            let cfg = FactorizeConfig { segment_size, workers };
            assert_eq!(factorize(&spec, &cfg).unwrap(), base);
        }
    }

    #[test]
    fn validation() {
        assert!(ExponentGroup::new(0, vec![2]).is_err());
        assert!(ExponentGroup::new(1, vec![]).is_err());
        assert!(ExponentGroup::new(1, vec![3, 2]).is_err());
        let spec = RatioSpec::catalan(5).unwrap();
        let dup = Factorization::new(
            spec.clone(),
            vec![
                ExponentGroup::new(1, vec![2, 3]).unwrap(),
                ExponentGroup::new(2, vec![3, 5]).unwrap(),
            ],
        );
        assert!(dup.is_err());
        let same_exp = Factorization::new(
            spec.clone(),
            vec![
                ExponentGroup::new(1, vec![2]).unwrap(),
                ExponentGroup::new(1, vec![3]).unwrap(),
            ],
        );
        assert!(same_exp.is_err());
        let ok = Factorization::new(
            spec,
            vec![
                ExponentGroup::new(1, vec![3, 7]).unwrap(),
                ExponentGroup::new(2, vec![2]).unwrap(),
            ],
        )
        .unwrap();
        assert_eq!(ok.groups()[0].exponent, 2);
    }

    #[test]
    fn file_names() {
        assert_eq!(catalan(5).file_name(), "catalan_5_factorization.txt");
        let spec = RatioSpec::binomial(4, 2).unwrap();
        assert_eq!(artifact_stem(&spec), "ratio_4_over_2-2");
    }
}
