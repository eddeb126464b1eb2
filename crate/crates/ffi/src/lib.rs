//! C interface to `catalan_engine`.
//!
//! Every fallible call returns a [`CatalanStatus`]; on anything other than
//! `CATALAN_STATUS_OK` a description is available from
//! [`catalan_last_error_message`] on the same thread. Objects are handed out
//! as opaque pointers and must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use catalan_engine::digest::HashingWriter;
use catalan_engine::error::{Error, ErrorKind};
use catalan_engine::factorization::{factorize, serialize, Factorization, FactorizeConfig};
use catalan_engine::pipeline::read_factorization_file;
use catalan_engine::reconstruct::{decimal_len, reconstruct_value, write_binary, ByteOrder, ChunkPolicy, Natural};
use catalan_engine::target::{solve_target_digits, ConfirmationTier, DigitTarget, SolveOptions};
use catalan_engine::valuation::RatioSpec;
use catalan_engine::verify::{modular_value, sha256_of_file};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CatalanStatus {
    Ok = 0,
    InvalidArgument = 1,
    NonIntegral = 2,
    Parse = 3,
    Resource = 4,
    Io = 5,
    Verification = 6,
    Internal = 7,
    NullPointer = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CatalanTier {
    Exact = 0,
    Estimate = 1,
    Unconfirmed = 2,
}

/// A grouped prime factorization.
pub struct CatalanFactorization(Factorization);

/// A reconstructed nonnegative integer.
pub struct CatalanNatural(Natural);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> CatalanStatus {
    match e.kind() {
        ErrorKind::InvalidArgument => CatalanStatus::InvalidArgument,
        ErrorKind::NonIntegral => CatalanStatus::NonIntegral,
        ErrorKind::Parse => CatalanStatus::Parse,
        ErrorKind::Resource => CatalanStatus::Resource,
        ErrorKind::Io => CatalanStatus::Io,
        ErrorKind::Verification => CatalanStatus::Verification,
        ErrorKind::Internal => CatalanStatus::Internal,
    }
}

enum Failure {
    Engine(Error),
    Null(&'static str),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Engine(e)
    }
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> CatalanStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => CatalanStatus::Ok,
        Ok(Err(Failure::Engine(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Null(what))) => {
            set_last_error(format!("{what} is null"));
            CatalanStatus::NullPointer
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal panic: {msg}"));
            CatalanStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn path_arg(p: *const libc::c_char, what: &'static str) -> Result<PathBuf, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Error::InvalidArgument(format!("{what} is not valid UTF-8")))?;
    Ok(PathBuf::from(s))
}

unsafe fn slice_arg<'a>(p: *const u64, len: usize, what: &'static str) -> Result<&'a [u64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn config(workers: usize) -> FactorizeConfig {
    FactorizeConfig {
        workers: (workers > 0).then_some(workers),
        ..FactorizeConfig::default()
    }
}

fn copy_hex(hex: &str, dst: *mut libc::c_char) {
    let bytes = hex.as_bytes();
    // SAFETY: callers check dst is non-null and documented as 65 bytes
    unsafe {
        ptr::copy_nonoverlapping(bytes.as_ptr(), dst.cast::<u8>(), bytes.len());
        *dst.add(bytes.len()) = 0;
    }
}

/// Message for the last failed call on this thread, or NULL. The pointer is
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn catalan_last_error_message() -> *const libc::c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Factorization of C(n). `workers` = 0 uses every core.
///
/// # Safety
/// `result` must be a valid pointer to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn catalan_factorization_new_catalan(
    n: u64,
    workers: usize,
    result: *mut *mut CatalanFactorization,
) -> CatalanStatus {
    guard(|| {
        let result = out(result, "result")?;
        let f = factorize(&RatioSpec::catalan(n)?, &config(workers))?;
        *result = Box::into_raw(Box::new(CatalanFactorization(f)));
        Ok(())
    })
}

/// Factorization of `Π num[i]! / Π den[j]!`. Fails with
/// `CATALAN_STATUS_NON_INTEGRAL` when the ratio is not an integer.
///
/// # Safety
/// `num` and `den` must point to `num_len` and `den_len` readable values
/// (either may be NULL when its length is 0). `result` must be writable.
#[no_mangle]
pub unsafe extern "C" fn catalan_factorization_new_ratio(
    num: *const u64,
    num_len: usize,
    den: *const u64,
    den_len: usize,
    workers: usize,
    result: *mut *mut CatalanFactorization,
) -> CatalanStatus {
    guard(|| {
        let result = out(result, "result")?;
        let spec = RatioSpec::new(
            slice_arg(num, num_len, "num")?.to_vec(),
            slice_arg(den, den_len, "den")?.to_vec(),
        )?;
        let f = factorize(&spec, &config(workers))?;
        *result = Box::into_raw(Box::new(CatalanFactorization(f)));
        Ok(())
    })
}

/// Reads a factorization file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `result` must be writable.
#[no_mangle]
pub unsafe extern "C" fn catalan_factorization_read_file(
    path: *const libc::c_char,
    result: *mut *mut CatalanFactorization,
) -> CatalanStatus {
    guard(|| {
        let result = out(result, "result")?;
        let f = read_factorization_file(&path_arg(path, "path")?)?;
        *result = Box::into_raw(Box::new(CatalanFactorization(f)));
        Ok(())
    })
}

/// Writes the factorization in the text format to `path`.
///
/// # Safety
/// `f` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn catalan_factorization_write_file(
    f: *const CatalanFactorization,
    path: *const libc::c_char,
) -> CatalanStatus {
    guard(|| {
        let f = borrow(f, "factorization")?;
        let path = path_arg(path, "path")?;
        let mut text = Vec::new();
        serialize(&f.0, &mut text)?;
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(())
    })
}

/// # Safety
/// `f` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn catalan_factorization_free(f: *mut CatalanFactorization) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// # Safety
/// `f` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn catalan_factorization_prime_count(f: *const CatalanFactorization) -> u64 {
    f.as_ref().map_or(0, |f| f.0.prime_count())
}

/// # Safety
/// `f` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn catalan_factorization_group_count(f: *const CatalanFactorization) -> usize {
    f.as_ref().map_or(0, |f| f.0.groups().len())
}

/// Group `index` (descending exponent order). `primes` receives a pointer
/// into the handle, valid until it is freed.
///
/// # Safety
/// `f` must be a live handle; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn catalan_factorization_group(
    f: *const CatalanFactorization,
    index: usize,
    exponent: *mut u64,
    primes: *mut *const u64,
    len: *mut usize,
) -> CatalanStatus {
    guard(|| {
        let f = borrow(f, "factorization")?;
        let (exponent, primes, len) = (out(exponent, "exponent")?, out(primes, "primes")?, out(len, "len")?);
        let group =
            f.0.groups()
                .get(index)
                .ok_or_else(|| Error::InvalidArgument(format!("group index {index} out of range")))?;
        *exponent = group.exponent;
        *primes = group.primes.as_ptr();
        *len = group.primes.len();
        Ok(())
    })
}

/// Decimal digit estimate; `exact` is set when it is guaranteed correct.
///
/// # Safety
/// `f` must be a live handle; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn catalan_factorization_estimated_digits(
    f: *const CatalanFactorization,
    digits: *mut u64,
    exact: *mut bool,
) -> CatalanStatus {
    guard(|| {
        let est = borrow(f, "factorization")?.0.digit_estimate();
        *out(digits, "digits")? = est.digits;
        *out(exact, "exact")? = est.is_exact();
        Ok(())
    })
}

/// The factorized value modulo `modulus` (at least 2).
///
/// # Safety
/// `f` must be a live handle; `result` must be writable.
#[no_mangle]
pub unsafe extern "C" fn catalan_factorization_modular_value(
    f: *const CatalanFactorization,
    modulus: u64,
    result: *mut u64,
) -> CatalanStatus {
    guard(|| {
        let f = borrow(f, "factorization")?;
        let result = out(result, "result")?;
        *result = modular_value(&f.0, modulus)?;
        Ok(())
    })
}

/// Multiplies the factorization out. `chunk_size` = 0 uses the default.
///
/// # Safety
/// `f` must be a live handle; `result` must be writable.
#[no_mangle]
pub unsafe extern "C" fn catalan_reconstruct(
    f: *const CatalanFactorization,
    chunk_size: usize,
    result: *mut *mut CatalanNatural,
) -> CatalanStatus {
    guard(|| {
        let f = borrow(f, "factorization")?;
        let result = out(result, "result")?;
        let mut policy = ChunkPolicy::default();
        if chunk_size > 0 {
            policy.chunk_size = chunk_size;
        }
        let value = reconstruct_value(&f.0, &policy)?;
        *result = Box::into_raw(Box::new(CatalanNatural(value)));
        Ok(())
    })
}

/// # Safety
/// `v` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn catalan_natural_free(v: *mut CatalanNatural) {
    if !v.is_null() {
        drop(Box::from_raw(v));
    }
}

/// # Safety
/// `v` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn catalan_natural_bit_length(v: *const CatalanNatural) -> u64 {
    v.as_ref().map_or(0, |v| v.0.bits())
}

/// # Safety
/// `v` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn catalan_natural_decimal_digits(v: *const CatalanNatural) -> u64 {
    v.as_ref().map_or(0, |v| decimal_len(&v.0))
}

/// Writes the headerless magnitude to `path` and its SHA-256 (64 hex chars
/// plus NUL) to `sha256_hex`, which may be NULL.
///
/// # Safety
/// `v` must be a live handle, `path` NUL-terminated, and `sha256_hex` NULL or
/// at least 65 writable bytes.
#[no_mangle]
pub unsafe extern "C" fn catalan_natural_write_binary(
    v: *const CatalanNatural,
    path: *const libc::c_char,
    big_endian: bool,
    sha256_hex: *mut libc::c_char,
) -> CatalanStatus {
    guard(|| {
        let v = borrow(v, "value")?;
        let path = path_arg(path, "path")?;
        let order = if big_endian { ByteOrder::Big } else { ByteOrder::Little };
        let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut sink = HashingWriter::new(std::io::BufWriter::new(file));
        write_binary(&v.0, &mut sink, order)?;
        let (_, hex, _) = sink.finish().map_err(|e| Error::io(&path, e))?;
        if !sha256_hex.is_null() {
            copy_hex(&hex, sha256_hex);
        }
        Ok(())
    })
}

/// Decimal string of the value; release it with [`catalan_string_free`].
///
/// # Safety
/// `v` must be a live handle; `result` must be writable.
#[no_mangle]
pub unsafe extern "C" fn catalan_natural_to_decimal(
    v: *const CatalanNatural,
    result: *mut *mut libc::c_char,
) -> CatalanStatus {
    guard(|| {
        let v = borrow(v, "value")?;
        let result = out(result, "result")?;
        let text = CString::new(v.0.to_string()).expect("digits contain no NUL");
        *result = text.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be NULL or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn catalan_string_free(s: *mut libc::c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// The `n` chosen for a `digits`-digit Catalan number. Sets `found` to false
/// when no `n` has exactly that many digits.
///
/// # Safety
/// All out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn catalan_solve_digits(
    digits: u64,
    n: *mut u64,
    tier: *mut CatalanTier,
    found: *mut bool,
) -> CatalanStatus {
    guard(|| {
        let (n, tier, found) = (out(n, "n")?, out(tier, "tier")?, out(found, "found")?);
        match solve_target_digits(DigitTarget::new(digits)?, &SolveOptions::default())? {
            Some(c) => {
                *n = c.n;
                *tier = match c.tier {
                    ConfirmationTier::ExactReconstruction => CatalanTier::Exact,
                    ConfirmationTier::DigitEstimate => CatalanTier::Estimate,
                    ConfirmationTier::Unconfirmed => CatalanTier::Unconfirmed,
                };
                *found = true;
            }
            None => *found = false,
        }
        Ok(())
    })
}

/// SHA-256 of a file as 64 lowercase hex chars plus NUL.
///
/// # Safety
/// `path` must be NUL-terminated; `sha256_hex` must hold 65 bytes.
#[no_mangle]
pub unsafe extern "C" fn catalan_sha256_file(
    path: *const libc::c_char,
    sha256_hex: *mut libc::c_char,
) -> CatalanStatus {
    guard(|| {
        let path = path_arg(path, "path")?;
        if sha256_hex.is_null() {
            return Err(Failure::Null("sha256_hex"));
        }
        copy_hex(&sha256_of_file(&path)?, sha256_hex);
        Ok(())
    })
}
