//! Exact prime factorizations of Catalan numbers and other factorial ratios,
//! reconstruction of the full integer from them, and independent auditing of
//! the results.
//!
//! ```
//! use catalan_engine::{factorize, FactorizeConfig, RatioSpec};
//!
//! let f = factorize(&RatioSpec::catalan(5)?, &FactorizeConfig::default())?;
//! assert_eq!(f.prime_powers().collect::<Vec<_>>(), vec![(2, 1), (3, 1), (7, 1)]);
//! # Ok::<(), catalan_engine::Error>(())
//! ```

mod arith;
pub mod digest;
pub mod error;
pub mod factorization;
pub mod parallel;
pub mod pipeline;
pub mod precise;
pub mod reconstruct;
pub mod sieve;
pub mod target;
pub mod valuation;
pub mod verify;

pub use error::{Error, ErrorKind, Result};
pub use factorization::{
    estimate_digits, factorize, parse, serialize, DigitEstimate, ExponentGroup, Factorization, FactorizeConfig,
};
pub use reconstruct::{reconstruct, ByteOrder, ChunkPolicy, Natural, ReconstructOptions, ReconstructionResult};
pub use sieve::{stream_primes, SieveLimit};
pub use target::{solve_all, solve_target_digits, CandidateSolution, ConfirmationTier, DigitTarget, SolveOptions};
pub use valuation::{catalan_exponent, RatioSpec, ValuationTriple};
pub use verify::{modular_value, verify_result, Claims, VerificationReport};
