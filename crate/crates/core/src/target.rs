//! Picking `n` so that `C(n)` has a requested number of decimal digits.
//!
//! The first-order asymptotic `C(n) ~ 4^n / (n^{3/2} √π)` gives
//! `L(n) = n log10 4 - 1.5 log10 n - 0.5 log10 π`, which is strictly
//! increasing for `n >= 1`. The predicted digit count is `⌊L(n)⌋ + 1`. Its
//! error against the true `log10 C(n)` is about `0.054 / n`, so predictions
//! are only trusted after an exact check when one is affordable.

use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::factorization::{factorize, FactorizeConfig};
use crate::precise::{log10_fixed, log10_of, pi, Fixed};
use crate::reconstruct::{decimal_len, reconstruct_value, ChunkPolicy, Natural};
use crate::valuation::RatioSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct DigitTarget(u64);

impl DigitTarget {
    pub fn new(digits: u64) -> Result<Self> {
        if digits == 0 {
            return Err(Error::InvalidArgument("digit target must be at least 1".into()));
        }
        Ok(DigitTarget(digits))
    }

    pub fn get(self) -> u64 {
        self.0
    }
}

/// How a candidate's digit count was established.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfirmationTier {
    /// `C(n)` was rebuilt and its digits counted.
    ExactReconstruction,
    /// The factorization's digit estimate, with its error bound clear of
    /// any digit boundary.
    DigitEstimate,
    /// Too large to check here; asymptotic prediction only.
    Unconfirmed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSolution {
    pub n: u64,
    /// `L(n)`; exactly 0 for `n = 0`.
    pub predicted_log10: Fixed,
    pub confirmed: bool,
    pub tier: ConfirmationTier,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveOptions {
    /// Largest `n` checked by full reconstruction.
    pub exact_limit: u64,
    /// Largest `n` checked through the factorization digit estimate.
    pub estimate_limit: u64,
    /// Extra candidates examined on each side of the predicted range.
    pub window: u64,
    pub factorize: FactorizeConfig,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            exact_limit: 10_000,
            estimate_limit: 100_000_000,
            window: 3,
            factorize: FactorizeConfig::default(),
        }
    }
}

/// `n log10 4 - (3/2) log10 n - (1/2) log10 π` for `n >= 1`.
pub fn log10_catalan_asymptotic(n: u64) -> Result<Fixed> {
    if n == 0 {
        return Err(Error::InvalidArgument("the asymptotic formula needs n >= 1".into()));
    }
    let log10_4 = log10_of(&Natural::from(4u8));
    // 2L = 2n log10 4 - 3 log10 n - log10 π, halved once at the end
    let twice = log10_4.mul_int(2 * n) - log10_of(&Natural::from(n)).mul_int(3) - log10_fixed(&pi());
    Ok(twice.div(&Fixed::from_int(2)))
}

fn predicted_digits(n: u64) -> Result<u64> {
    let l = log10_catalan_asymptotic(n)?;
    Ok(l.floor().to_u64().unwrap_or(0) + 1)
}

/// Smallest `n >= 1` whose predicted digit count is at least `digits`.
fn first_predicted(digits: u64) -> Result<u64> {
    let mut hi = 1u64;
    while predicted_digits(hi)? < digits {
        hi = hi
            .checked_mul(2)
            .ok_or_else(|| Error::InvalidArgument(format!("digit target {digits} is out of range")))?;
    }
    let mut lo = 1u64;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if predicted_digits(mid)? >= digits {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo)
}

/// Exact digit count of `C(n)` when affordable under `options`.
fn exact_digits(n: u64, options: &SolveOptions) -> Result<Option<(u64, ConfirmationTier)>> {
    let spec = RatioSpec::catalan(n)?;
    if n <= options.exact_limit {
        let f = factorize(&spec, &options.factorize)?;
        let value = reconstruct_value(&f, &ChunkPolicy::default())?;
        return Ok(Some((decimal_len(&value), ConfirmationTier::ExactReconstruction)));
    }
    if n <= options.estimate_limit {
        let f = factorize(&spec, &options.factorize)?;
        let est = f.digit_estimate();
        if est.is_exact() {
            return Ok(Some((est.digits, ConfirmationTier::DigitEstimate)));
        }
    }
    Ok(None)
}

fn predicted_log10(n: u64) -> Result<Fixed> {
    if n == 0 {
        Ok(Fixed::zero())
    } else {
        log10_catalan_asymptotic(n)
    }
}

/// Every `n` in the search window whose digit count is `target`, ascending.
///
/// Candidates that can be checked exactly are included only when the check
/// agrees; the rest are included on the strength of the prediction and
/// marked unconfirmed.
pub fn solve_all(target: DigitTarget, options: &SolveOptions) -> Result<Vec<CandidateSolution>> {
    let digits = target.get();
    let first = first_predicted(digits)?;
    let past_last = first_predicted(digits + 1)?;
    let lo = first.saturating_sub(options.window);
    let hi = (past_last - 1).max(first) + options.window;

    let mut out = Vec::new();
    for n in lo..=hi {
        let solution = match exact_digits(n, options)? {
            Some((d, tier)) if d == digits => CandidateSolution {
                n,
                predicted_log10: predicted_log10(n)?,
                confirmed: true,
                tier,
            },
            Some(_) => continue,
            None => {
                if n == 0 || predicted_digits(n)? != digits {
                    continue;
                }
                CandidateSolution {
                    n,
                    predicted_log10: predicted_log10(n)?,
                    confirmed: false,
                    tier: ConfirmationTier::Unconfirmed,
                }
            }
        };
        out.push(solution);
    }
    Ok(out)
}

/// The `n` to use for a `target`-digit Catalan number.
///
/// When the window can be checked exactly this is the smallest `n` whose
/// `C(n)` has exactly `target` digits. Otherwise it is the inversion point of
/// the asymptotic formula, the largest `n` with `L(n) < target`, which is the
/// conventional choice when solving `L(n) ≈ target` for `n` and rounding
/// down. `None` when no `n` has that many digits.
pub fn solve_target_digits(target: DigitTarget, options: &SolveOptions) -> Result<Option<CandidateSolution>> {
    let all = solve_all(target, options)?;
    if all.iter().all(|c| c.confirmed) {
        return Ok(all.into_iter().next());
    }
    Ok(all.into_iter().rfind(|c| !c.confirmed))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn catalan_by_recurrence(n: u64) -> Natural {
        // C(k+1) = C(k) * 2(2k+1) / (k+2)
        (0..n).fold(Natural::from(1u8), |c, k| c * (2 * (2 * k + 1)) / (k + 2))
    }

    fn quick() -> SolveOptions {
        SolveOptions::default()
    }

    #[test]
    fn asymptotic_values() {
        let l = log10_catalan_asymptotic(2_050_572_903).unwrap();
        // the quoted figure is ≈ 1,234,567,889; the value itself sits just below 1,234,567,890
        assert!((&l - &Fixed::from_int(1_234_567_889)).abs() < Fixed::from_int(1));
        assert_eq!(l.to_decimal(30), "1234567889.981146906435622688178021605197");

        let five = log10_catalan_asymptotic(5).unwrap().to_f64();
        assert!((five - 42f64.log10()).abs() < 0.1, "{five}");

        let exact = crate::precise::log10_of(&catalan_by_recurrence(1000));
        let diff = (&log10_catalan_asymptotic(1000).unwrap() - &exact).abs();
        assert!(diff < Fixed::pow2_neg(9), "{diff}");
        assert!(log10_catalan_asymptotic(0).is_err());
    }

    #[test]
    fn asymptotic_is_increasing() {
        let mut prev = log10_catalan_asymptotic(1).unwrap();
        for n in (2..200).chain((1..50).map(|k| k * 1_000_003)) {
            let cur = log10_catalan_asymptotic(n).unwrap();
            assert!(cur > prev, "n = {n}");
            prev = cur;
        }
    }

    #[test]
    fn small_targets_pick_the_smallest_n() {
        let digits_of = |n| catalan_by_recurrence(n).to_string().len() as u64;
        for d in 1..=12u64 {
            let oracle = (0..100).find(|&n| digits_of(n) == d);
            let got = solve_target_digits(DigitTarget::new(d).unwrap(), &quick()).unwrap();
            assert_eq!(got.as_ref().map(|c| c.n), oracle, "digits = {d}");
            let got = got.unwrap();
            assert!(got.confirmed);
            assert_eq!(got.tier, ConfirmationTier::ExactReconstruction);
        }
    }

    #[test]
    fn named_examples() {
        let ten = solve_target_digits(DigitTarget::new(10).unwrap(), &quick())
            .unwrap()
            .unwrap();
        assert_eq!(ten.n, 19);
        assert!(ten.confirmed);
        let nine = solve_all(DigitTarget::new(9).unwrap(), &quick()).unwrap();
        assert_eq!(nine.iter().map(|c| c.n).collect::<Vec<_>>(), vec![17, 18]);
        let one = solve_target_digits(DigitTarget::new(1).unwrap(), &quick())
            .unwrap()
            .unwrap();
        assert_eq!(one.n, 0);
        assert!(DigitTarget::new(0).is_err());
    }

    #[test]
    fn estimate_tier() {
        // C(20000) has 12036 digits
        let opts = SolveOptions {
            exact_limit: 100,
            ..quick()
        };
        let got = solve_target_digits(DigitTarget::new(12036).unwrap(), &opts)
            .unwrap()
            .unwrap();
        assert!(got.confirmed);
        assert_eq!(got.tier, ConfirmationTier::DigitEstimate);
        let exact = decimal_len(&catalan_by_recurrence(got.n));
        assert_eq!(exact, 12036);
        assert!(got.n == 0 || decimal_len(&catalan_by_recurrence(got.n - 1)) < 12036);
    }

    #[test]
    fn large_target_is_unconfirmed_inversion_point() {
        let got = solve_target_digits(DigitTarget::new(1_234_567_890).unwrap(), &quick())
            .unwrap()
            .unwrap();
        assert_eq!(got.n, 2_050_572_903);
        assert!(!got.confirmed);
        assert_eq!(got.tier, ConfirmationTier::Unconfirmed);
        let all = solve_all(DigitTarget::new(1_234_567_890).unwrap(), &quick()).unwrap();
        assert_eq!(
            all.iter().map(|c| c.n).collect::<Vec<_>>(),
            vec![2_050_572_902, 2_050_572_903]
        );
    }
}
