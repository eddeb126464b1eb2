//! Auditing factorizations and result files.
//!
//! Residues modulo word-sized moduli are computed straight from the
//! factorization with modular exponentiation, so a published factorization
//! can be checked against a published binary (or against claimed digit
//! counts) without redoing the reconstruction.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::digest::sha256_of_bytes;
use crate::error::{Error, Result};
use crate::factorization::Factorization;
use crate::reconstruct::{decimal_len, from_magnitude, ByteOrder, Natural};

pub use crate::digest::sha256_of_file;

/// Fixed primes used when no moduli are given, so reports are reproducible.
pub const DEFAULT_MODULI: [u64; 5] = [
    (1 << 61) - 1,
    1_000_000_007,
    1_000_000_009,
    998_244_353,
    18_446_744_073_709_551_557,
];

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        e >>= 1;
    }
    acc
}

/// `Π p^e mod m` over the factorization, never forming the integer.
pub fn modular_value(f: &Factorization, m: u64) -> Result<u64> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("modulus must be at least 2, got {m}")));
    }
    let mut acc = 1 % m;
    for group in f.groups() {
        let q = group
            .primes
            .par_chunks(1 << 14)
            .map(|chunk| chunk.iter().fold(1 % m, |a, &p| mul_mod(a, p % m, m)))
            .reduce(|| 1 % m, |a, b| mul_mod(a, b, m));
        acc = mul_mod(acc, pow_mod(q, group.exponent, m), m);
    }
    Ok(acc)
}

pub fn residue(value: &Natural, m: u64) -> u64 {
    (value % m).to_u64().expect("residue below a u64 modulus")
}

/// What the result is expected to look like; absent claims are not checked.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Claims {
    pub digits: Option<u64>,
    pub bit_length: Option<u64>,
    pub sha256: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Digest differs, but the other byte order's digest matches the claim.
    EncodingDiffers,
    /// Not enough inputs to run the check.
    Skipped,
    /// Reported value only; nothing to compare it with.
    Info,
}

impl CheckStatus {
    pub fn is_failure(self) -> bool {
        self == CheckStatus::Fail
    }

    fn label(self) -> &'static str {
        match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::EncodingDiffers => "encoding-differs",
            CheckStatus::Skipped => "skipped",
            CheckStatus::Info => "info",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub actual: String,
    pub status: CheckStatus,
}

impl Check {
    fn compare(name: impl Into<String>, expected: impl ToString, actual: impl ToString) -> Self {
        let (expected, actual) = (expected.to_string(), actual.to_string());
        let status = if expected == actual {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        Check {
            name: name.into(),
            expected,
            actual,
            status,
        }
    }

    fn with_status(
        name: impl Into<String>,
        expected: impl ToString,
        actual: impl ToString,
        status: CheckStatus,
    ) -> Self {
        Check {
            name: name.into(),
            expected: expected.to_string(),
            actual: actual.to_string(),
            status,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModulusCheck {
    pub modulus: u64,
    pub from_factorization: Option<u64>,
    pub from_value: Option<u64>,
    /// `None` unless both residues are available.
    pub matches: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    pub modulus_checks: Vec<ModulusCheck>,
    pub sha256_hex: Option<String>,
    pub digits_claimed: Option<u64>,
    pub digits_measured: Option<u64>,
    pub bitlen_measured: Option<u64>,
    pub file_size: Option<u64>,
    pub checks: Vec<Check>,
    pub all_pass: bool,
}

impl VerificationReport {
    pub fn verdict(&self) -> &'static str {
        if !self.all_pass {
            "FAILED"
        } else if self.checks.iter().any(|c| c.status == CheckStatus::EncodingDiffers) {
            "value verified, encoding differs"
        } else {
            "all checks passed"
        }
    }

    pub fn to_text(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        let mut out = String::new();
        for c in &self.checks {
            let _ = writeln!(
                out,
                "[{:>16}] {:width$}  expected {}  actual {}",
                c.status.label(),
                c.name,
                c.expected,
                c.actual,
            );
        }
        let _ = writeln!(out, "verdict: {}", self.verdict());
        out
    }

    /// One `check=... expected=... actual=... result=...` line per check.
    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let _ = writeln!(
                out,
                "check={} expected={} actual={} result={}",
                c.name,
                c.expected,
                c.actual,
                c.status.label()
            );
        }
        let _ = writeln!(out, "all_pass={}", self.all_pass);
        out
    }
}

pub struct VerifyInput<'a> {
    pub factorization: Option<&'a Factorization>,
    pub binary: Option<&'a Path>,
    pub byte_order: ByteOrder,
    pub claims: &'a Claims,
    pub moduli: &'a [u64],
}

/// Runs every applicable check and reports each one individually.
pub fn verify_result(input: &VerifyInput<'_>) -> Result<VerificationReport> {
    if input.factorization.is_none() && input.binary.is_none() {
        return Err(Error::InvalidArgument(
            "nothing to verify: give a factorization, a binary file, or both".into(),
        ));
    }
    if let Some(&m) = input.moduli.iter().find(|&&m| m < 2) {
        return Err(Error::InvalidArgument(format!("modulus must be at least 2, got {m}")));
    }

    let loaded = match input.binary {
        Some(path) => {
            let bytes =
                fs::read(path).map_err(|e| Error::Verification(format!("cannot read {}: {e}", path.display())))?;
            if bytes.is_empty() {
                return Err(Error::Verification(format!("{} is empty", path.display())));
            }
            let value = from_magnitude(&bytes, input.byte_order);
            Some((bytes, value))
        }
        None => None,
    };

    let mut checks = Vec::new();
    let mut report = VerificationReport {
        modulus_checks: Vec::new(),
        sha256_hex: None,
        digits_claimed: input.claims.digits,
        digits_measured: None,
        bitlen_measured: None,
        file_size: None,
        checks: Vec::new(),
        all_pass: false,
    };

    if let Some((bytes, value)) = &loaded {
        let bits = value.bits();
        let size = bytes.len() as u64;
        let digits = decimal_len(value);
        report.bitlen_measured = Some(bits);
        report.file_size = Some(size);
        report.digits_measured = Some(digits);
        checks.push(Check::compare("file_size_law", bits.div_ceil(8).max(1), size));
        if let Some(claimed) = input.claims.bit_length {
            checks.push(Check::compare("bit_length", claimed, bits));
        }
        if let Some(claimed) = input.claims.digits {
            checks.push(Check::compare("digits", claimed, digits));
        }
        if let Some(f) = input.factorization {
            let est = f.digit_estimate();
            let status = if est.digits == digits && est.is_exact() {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            };
            checks.push(Check::with_status("estimated_digits", est.digits, digits, status));
        }
    } else if let Some(f) = input.factorization {
        let est = f.digit_estimate();
        let shown = if est.is_exact() {
            est.digits.to_string()
        } else {
            format!("{}?", est.digits)
        };
        if let Some(claimed) = input.claims.digits {
            let status = if est.is_exact() && est.digits == claimed {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            };
            checks.push(Check::with_status("digits", claimed, &shown, status));
        } else {
            checks.push(Check::with_status("estimated_digits", "-", &shown, CheckStatus::Info));
        }
        if let Some(bits) = input.claims.bit_length {
            checks.push(Check::with_status("bit_length", bits, "-", CheckStatus::Skipped));
        }
    }

    report.modulus_checks = input
        .moduli
        .par_iter()
        .map(|&m| -> Result<ModulusCheck> {
            let from_factorization = input.factorization.map(|f| modular_value(f, m)).transpose()?;
            let from_value = loaded.as_ref().map(|(_, v)| residue(v, m));
            let matches = match (from_factorization, from_value) {
                (Some(a), Some(b)) => Some(a == b),
                _ => None,
            };
            Ok(ModulusCheck {
                modulus: m,
                from_factorization,
                from_value,
                matches,
            })
        })
        .collect::<Result<_>>()?;
    for mc in &report.modulus_checks {
        let name = format!("residue_mod_{}", mc.modulus);
        let show = |r: Option<u64>| r.map_or_else(|| "-".to_string(), |v| v.to_string());
        let check = match mc.matches {
            Some(_) => Check::compare(name, show(mc.from_factorization), show(mc.from_value)),
            None => Check::with_status(
                name,
                show(mc.from_factorization),
                show(mc.from_value),
                CheckStatus::Info,
            ),
        };
        checks.push(check);
    }

    match &loaded {
        Some((bytes, _)) => {
            let digest = sha256_of_bytes(bytes);
            report.sha256_hex = Some(digest.clone());
            match &input.claims.sha256 {
                Some(claimed) => {
                    let claimed = claimed.to_ascii_lowercase();
                    let status = if claimed == digest {
                        CheckStatus::Pass
                    } else {
                        let mut flipped = bytes.clone();
                        flipped.reverse();
                        let value_checks_ok = checks.iter().all(|c| !c.status.is_failure());
                        if sha256_of_bytes(&flipped) == claimed && value_checks_ok {
                            CheckStatus::EncodingDiffers
                        } else {
                            CheckStatus::Fail
                        }
                    };
                    checks.push(Check::with_status("sha256", claimed, &digest, status));
                }
                None => checks.push(Check::with_status("sha256", "-", &digest, CheckStatus::Info)),
            }
        }
        None => {
            let expected = input.claims.sha256.clone().unwrap_or_else(|| "-".into());
            checks.push(Check::with_status(
                "sha256",
                expected,
                "no binary file",
                CheckStatus::Skipped,
            ));
        }
    }

    report.all_pass = checks.iter().all(|c| !c.status.is_failure());
    report.checks = checks;
    Ok(report)
}
