//! End-to-end run: factorize, write the factorization file, reconstruct,
//! verify, with wall time per phase.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::factorization::{factorize, parse, serialize_with, Factorization, FactorizeConfig, FormatOptions};
use crate::reconstruct::{reconstruct, ByteOrder, ChunkPolicy, ReconstructOptions, ReconstructionResult};
use crate::valuation::RatioSpec;
use crate::verify::{verify_result, Claims, VerificationReport, VerifyInput, DEFAULT_MODULI};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub factorize: FactorizeConfig,
    pub policy: ChunkPolicy,
    pub byte_order: ByteOrder,
    pub out_dir: PathBuf,
    pub emit_decimal: bool,
    pub format: FormatOptions,
    pub moduli: Vec<u64>,
}

impl RunConfig {
    pub fn in_dir(out_dir: impl Into<PathBuf>) -> Self {
        RunConfig {
            factorize: FactorizeConfig::default(),
            policy: ChunkPolicy::default(),
            byte_order: ByteOrder::Little,
            out_dir: out_dir.into(),
            emit_decimal: false,
            format: FormatOptions::default(),
            moduli: DEFAULT_MODULI.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PhaseTimes {
    pub factorize: Duration,
    pub write_factorization: Duration,
    pub reconstruct: Duration,
    pub verify: Duration,
}

impl PhaseTimes {
    pub fn total(&self) -> Duration {
        self.factorize + self.write_factorization + self.reconstruct + self.verify
    }
}

pub struct RunSummary {
    pub factorization: Factorization,
    pub factorization_path: PathBuf,
    pub reconstruction: ReconstructionResult,
    pub report: VerificationReport,
    pub times: PhaseTimes,
}

/// Writes `f` to `dir/<file_name>` and returns the path.
pub fn write_factorization_file(f: &Factorization, dir: &Path, format: &FormatOptions) -> Result<PathBuf> {
    let path = dir.join(f.file_name());
    let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
    let mut w = BufWriter::new(file);
    serialize_with(f, &mut w, format)
        .and_then(|_| w.flush().map_err(Error::from))
        .map_err(|e| match e {
            Error::Stream(io) => Error::io(&path, io),
            other => other,
        })?;
    Ok(path)
}

pub fn read_factorization_file(path: &Path) -> Result<Factorization> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse(BufReader::new(file))
}

/// Runs every phase for `spec`. `progress` receives one line per phase.
pub fn run(spec: &RatioSpec, config: &RunConfig, progress: &mut dyn FnMut(&str)) -> Result<RunSummary> {
    fs::create_dir_all(&config.out_dir).map_err(|e| Error::io(&config.out_dir, e))?;
    let mut times = PhaseTimes::default();

    progress(&format!("factorizing {spec}"));
    let t = Instant::now();
    let f = factorize(spec, &config.factorize)?;
    times.factorize = t.elapsed();

    let t = Instant::now();
    let factorization_path = write_factorization_file(&f, &config.out_dir, &config.format)?;
    times.write_factorization = t.elapsed();
    progress(&format!(
        "wrote {} ({} primes, ~{} digits)",
        factorization_path.display(),
        f.prime_count(),
        f.digit_estimate().digits
    ));

    progress("reconstructing");
    let t = Instant::now();
    let mut options = ReconstructOptions::in_dir(&f, &config.out_dir, config.emit_decimal);
    options.policy = config.policy.clone();
    options.workers = config.factorize.workers;
    options.byte_order = config.byte_order;
    let rec = reconstruct(&f, &options)?;
    times.reconstruct = t.elapsed();
    drop(rec.value);
    let reconstruction = rec.result;
    progress(&format!("wrote {}", reconstruction.output_path.display()));

    progress("verifying");
    let t = Instant::now();
    let claims = Claims {
        digits: None,
        bit_length: Some(reconstruction.value_bit_length),
        sha256: Some(reconstruction.sha256_hex.clone()),
    };
    let report = verify_result(&VerifyInput {
        factorization: Some(&f),
        binary: Some(&reconstruction.output_path),
        byte_order: config.byte_order,
        claims: &claims,
        moduli: &config.moduli,
    })?;
    times.verify = t.elapsed();

    Ok(RunSummary {
        factorization: f,
        factorization_path,
        reconstruction,
        report,
        times,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_small() {
        let dir = tempfile::tempdir().unwrap();
        let mut lines = Vec::new();
        let summary = run(
            &RatioSpec::catalan(1000).unwrap(),
            &RunConfig::in_dir(dir.path()),
            &mut |l| lines.push(l.to_string()),
        )
        .unwrap();
        assert!(summary.report.all_pass, "{}", summary.report.to_text());
        assert_eq!(summary.reconstruction.decimal_digits, 598);
        assert!(dir.path().join("catalan_1000_factorization.txt").exists());
        assert!(dir.path().join("catalan_1000_reconstructed.bin").exists());
        assert_eq!(lines.len(), 5);
    }
}
