use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use catalan_engine::error::{Error, ErrorKind, Result};
use catalan_engine::factorization::{self, FactorizeConfig, FormatOptions, DEFAULT_LINE_WIDTH};
use catalan_engine::pipeline::{self, read_factorization_file, write_factorization_file, RunConfig};
use catalan_engine::reconstruct::{self, ByteOrder, ChunkPolicy, ReconstructOptions, DEFAULT_CHUNK_SIZE};
use catalan_engine::sieve::DEFAULT_SEGMENT_SIZE;
use catalan_engine::target::{self, DigitTarget, SolveOptions};
use catalan_engine::valuation::RatioSpec;
use catalan_engine::verify::{self, Claims, VerifyInput, DEFAULT_MODULI};

const EXIT_USAGE: u8 = 2;
const EXIT_PARSE: u8 = 3;
const EXIT_RESOURCE: u8 = 4;
const EXIT_VERIFY: u8 = 5;
const EXIT_INVALID: u8 = 6;
const EXIT_INTERNAL: u8 = 70;

/// Exact Catalan numbers (and other factorial ratios) via prime factorization.
#[derive(Parser)]
#[command(name = "catalan", version)]
struct Cli {
    /// No progress on stderr.
    #[arg(long, short, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the grouped prime factorization of C(n) or a factorial ratio.
    Factorize {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        sieve: SieveArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Rebuild the integer from a factorization file.
    Reconstruct {
        /// Factorization file.
        input: PathBuf,
        /// Binary output path (default: <stem>_reconstructed.bin in --out-dir).
        #[arg(long, short)]
        output: Option<PathBuf>,
        #[command(flatten)]
        product: ProductArgs,
        #[arg(long)]
        workers: Option<usize>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Find n such that C(n) has the requested number of digits.
    Solve {
        #[arg(long)]
        digits: u64,
        /// List every n in the window, not just the chosen one.
        #[arg(long)]
        all: bool,
        /// Largest n confirmed by full reconstruction.
        #[arg(long, default_value_t = SolveOptions::default().exact_limit)]
        exact_limit: u64,
        /// Largest n confirmed through the digit estimate.
        #[arg(long, default_value_t = SolveOptions::default().estimate_limit)]
        estimate_limit: u64,
    },
    /// Audit a factorization file and/or a binary result.
    Verify {
        #[arg(long)]
        factorization: Option<PathBuf>,
        #[arg(long)]
        binary: Option<PathBuf>,
        /// Claimed decimal digit count.
        #[arg(long)]
        digits: Option<u64>,
        /// Claimed bit length.
        #[arg(long)]
        bit_length: Option<u64>,
        /// Claimed SHA-256 of the binary file.
        #[arg(long)]
        sha256: Option<String>,
        /// Modulus for a residue check; repeatable. Defaults to five fixed primes.
        #[arg(long = "modulus", value_name = "M")]
        moduli: Vec<u64>,
        /// The binary file is big-endian.
        #[arg(long)]
        big_endian: bool,
        #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
        format: ReportFormat,
    },
    /// Factorize, reconstruct and verify in one go.
    Run {
        #[command(flatten)]
        spec: SpecArgs,
        /// Solve for a digit count first, then run the chosen n.
        #[arg(long, conflicts_with_all = ["n", "binomial", "multinomial", "ratio"])]
        digits: Option<u64>,
        #[command(flatten)]
        sieve: SieveArgs,
        #[command(flatten)]
        product: ProductArgs,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Args)]
#[group(multiple = false)]
struct SpecArgs {
    /// Catalan number C(n).
    #[arg(long)]
    n: Option<u64>,
    /// Binomial coefficient N choose K.
    #[arg(long, num_args = 2, value_names = ["N", "K"])]
    binomial: Option<Vec<u64>>,
    /// Multinomial coefficient (k1+k2+...)!/(k1! k2! ...).
    #[arg(long, value_delimiter = ',', value_name = "K1,K2,...")]
    multinomial: Option<Vec<u64>>,
    /// General ratio as `a,b/c,d`, meaning a! b! / (c! d!).
    #[arg(long)]
    ratio: Option<String>,
}

impl SpecArgs {
    fn resolve(&self) -> Result<Option<RatioSpec>> {
        if let Some(n) = self.n {
            return RatioSpec::catalan(n).map(Some);
        }
        if let Some(nk) = &self.binomial {
            return RatioSpec::binomial(nk[0], nk[1]).map(Some);
        }
        if let Some(parts) = &self.multinomial {
            return RatioSpec::multinomial(parts).map(Some);
        }
        if let Some(text) = &self.ratio {
            return text.parse().map(Some);
        }
        Ok(None)
    }
}

#[derive(Args)]
struct SieveArgs {
    #[arg(long, default_value_t = DEFAULT_SEGMENT_SIZE)]
    segment_size: u64,
    /// Worker threads (default: one per logical core).
    #[arg(long)]
    workers: Option<usize>,
    /// Soft width of prime lines in the factorization file.
    #[arg(long, default_value_t = DEFAULT_LINE_WIDTH)]
    line_width: usize,
}

impl SieveArgs {
    fn config(&self) -> FactorizeConfig {
        FactorizeConfig {
            segment_size: self.segment_size,
            workers: self.workers,
        }
    }
}

#[derive(Args)]
struct ProductArgs {
    #[arg(long, default_value_t = DEFAULT_CHUNK_SIZE)]
    chunk_size: usize,
    /// Cap on live partial products, e.g. 512M or 4G. Unlimited by default.
    #[arg(long, value_parser = parse_size)]
    memory_budget: Option<u64>,
    /// Directory for partial products spilled under the memory budget.
    #[arg(long)]
    offload_dir: Option<PathBuf>,
    /// Write the binary result big-endian instead of little-endian.
    #[arg(long)]
    big_endian: bool,
    /// Also write the result in decimal.
    #[arg(long)]
    emit_decimal: bool,
}

impl ProductArgs {
    /// Also creates the offload directory, like `--out-dir`.
    fn policy(&self) -> Result<ChunkPolicy> {
        if let Some(dir) = &self.offload_dir {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        Ok(ChunkPolicy {
            chunk_size: self.chunk_size,
            memory_budget: self.memory_budget,
            offload_dir: self.offload_dir.clone(),
        })
    }

    fn byte_order(&self) -> ByteOrder {
        byte_order(self.big_endian)
    }
}

#[derive(Args)]
struct OutArgs {
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Text,
    Kv,
}

fn byte_order(big_endian: bool) -> ByteOrder {
    if big_endian {
        ByteOrder::Big
    } else {
        ByteOrder::Little
    }
}

fn parse_size(text: &str) -> std::result::Result<u64, String> {
    let text = text.trim();
    let (digits, shift) = match text.char_indices().last() {
        Some((i, 'k' | 'K')) => (&text[..i], 10),
        Some((i, 'm' | 'M')) => (&text[..i], 20),
        Some((i, 'g' | 'G')) => (&text[..i], 30),
        Some((i, 't' | 'T')) => (&text[..i], 40),
        _ => (text, 0),
    };
    let base: u64 = digits.parse().map_err(|_| format!("not a size: {text}"))?;
    base.checked_mul(1 << shift)
        .ok_or_else(|| format!("size too large: {text}"))
}

struct Progress {
    quiet: bool,
}

impl Progress {
    fn say(&self, msg: &str) {
        if !self.quiet {
            eprintln!("catalan: {msg}");
        }
    }
}

fn secs(d: std::time::Duration) -> String {
    format!("{:.3}", d.as_secs_f64())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let progress = Progress { quiet: cli.quiet };
    match dispatch(cli.command, &progress) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("catalan: error: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::InvalidArgument | ErrorKind::NonIntegral => EXIT_INVALID,
                ErrorKind::Parse => EXIT_PARSE,
                ErrorKind::Resource | ErrorKind::Io => EXIT_RESOURCE,
                ErrorKind::Verification => EXIT_VERIFY,
                ErrorKind::Internal => EXIT_INTERNAL,
            })
        }
    }
}

fn dispatch(command: Command, progress: &Progress) -> Result<ExitCode> {
    match command {
        Command::Factorize { spec, sieve, out } => {
            let spec = spec.resolve()?.ok_or_else(missing_spec)?;
            cmd_factorize(&spec, &sieve, &out.out_dir, progress)
        }
        Command::Reconstruct {
            input,
            output,
            product,
            workers,
            out,
        } => cmd_reconstruct(&input, output, &product, workers, &out.out_dir, progress),
        Command::Solve {
            digits,
            all,
            exact_limit,
            estimate_limit,
        } => {
            let options = SolveOptions {
                exact_limit,
                estimate_limit,
                ..SolveOptions::default()
            };
            cmd_solve(digits, all, &options)
        }
        Command::Verify {
            factorization,
            binary,
            digits,
            bit_length,
            sha256,
            moduli,
            big_endian,
            format,
        } => {
            let claims = Claims {
                digits,
                bit_length,
                sha256,
            };
            let moduli = if moduli.is_empty() {
                DEFAULT_MODULI.to_vec()
            } else {
                moduli
            };
            cmd_verify(
                factorization.as_deref(),
                binary.as_deref(),
                &claims,
                &moduli,
                byte_order(big_endian),
                format,
            )
        }
        Command::Run {
            spec,
            digits,
            sieve,
            product,
            out,
        } => {
            let spec = match (spec.resolve()?, digits) {
                (Some(spec), _) => spec,
                (None, Some(d)) => {
                    let chosen = target::solve_target_digits(DigitTarget::new(d)?, &SolveOptions::default())?
                        .ok_or_else(|| Error::InvalidArgument(format!("no Catalan number has {d} digits")))?;
                    progress.say(&format!("{d} digits: n={}", chosen.n));
                    RatioSpec::catalan(chosen.n)?
                }
                (None, None) => return Err(missing_spec()),
            };
            cmd_run(&spec, &sieve, &product, &out.out_dir, progress)
        }
    }
}

fn missing_spec() -> Error {
    Error::InvalidArgument("give one of --n, --binomial, --multinomial or --ratio".into())
}

fn cmd_factorize(spec: &RatioSpec, sieve: &SieveArgs, dir: &Path, progress: &Progress) -> Result<ExitCode> {
    progress.say(&format!("factorizing {spec}"));
    let start = Instant::now();
    let f = factorization::factorize(spec, &sieve.config())?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = write_factorization_file(
        &f,
        dir,
        &FormatOptions {
            line_width: sieve.line_width,
        },
    )?;
    let est = f.digit_estimate();
    println!("factorization={}", path.display());
    println!("prime_count={}", f.prime_count());
    println!("estimated_digits={}", est.digits);
    println!("digits_exact={}", est.is_exact());
    println!("elapsed_s={}", secs(start.elapsed()));
    Ok(ExitCode::SUCCESS)
}

fn cmd_reconstruct(
    input: &Path,
    output: Option<PathBuf>,
    product: &ProductArgs,
    workers: Option<usize>,
    dir: &Path,
    progress: &Progress,
) -> Result<ExitCode> {
    let start = Instant::now();
    progress.say(&format!("reading {}", input.display()));
    let f = read_factorization_file(input)?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut options = ReconstructOptions::in_dir(&f, dir, product.emit_decimal);
    if let Some(output) = output {
        options.output = output;
    }
    options.policy = product.policy()?;
    options.workers = workers;
    options.byte_order = product.byte_order();
    progress.say(&format!("multiplying {} prime powers", f.prime_count()));
    let rec = reconstruct::reconstruct(&f, &options)?;
    let r = &rec.result;
    println!("binary={}", r.output_path.display());
    if let Some(dec) = &options.decimal_output {
        println!("decimal={}", dec.display());
    }
    println!("bit_length={}", r.value_bit_length);
    println!("digits={}", r.decimal_digits);
    println!("file_size={}", r.file_size);
    println!("sha256={}", r.sha256_hex);
    if r.offload.spilled_operands > 0 {
        println!("spilled_operands={}", r.offload.spilled_operands);
        println!("spilled_bytes={}", r.offload.spilled_bytes);
    }
    println!("elapsed_s={}", secs(start.elapsed()));
    Ok(ExitCode::SUCCESS)
}

fn cmd_solve(digits: u64, all: bool, options: &SolveOptions) -> Result<ExitCode> {
    let target = DigitTarget::new(digits)?;
    let candidates = if all {
        target::solve_all(target, options)?
    } else {
        target::solve_target_digits(target, options)?.into_iter().collect()
    };
    if candidates.is_empty() {
        println!("no n gives C(n) exactly {digits} digits");
        return Ok(ExitCode::from(1));
    }
    for c in candidates {
        let tier = match c.tier {
            target::ConfirmationTier::ExactReconstruction => "exact",
            target::ConfirmationTier::DigitEstimate => "estimate",
            target::ConfirmationTier::Unconfirmed => "asymptotic",
        };
        println!(
            "n={} predicted_log10={} tier={} status={}",
            c.n,
            c.predicted_log10.to_decimal(6),
            tier,
            if c.confirmed { "confirmed" } else { "unconfirmed" }
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(
    factorization: Option<&Path>,
    binary: Option<&Path>,
    claims: &Claims,
    moduli: &[u64],
    order: ByteOrder,
    format: ReportFormat,
) -> Result<ExitCode> {
    let f = match factorization {
        Some(path) => Some(read_factorization_file(path)?),
        None => None,
    };
    if binary.is_none() {
        eprintln!("catalan: no binary file given; hash and value checks skipped");
    }
    let report = verify::verify_result(&VerifyInput {
        factorization: f.as_ref(),
        binary,
        byte_order: order,
        claims,
        moduli,
    })?;
    match format {
        ReportFormat::Text => print!("{}", report.to_text()),
        ReportFormat::Kv => print!("{}", report.to_key_value()),
    }
    Ok(if report.all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VERIFY)
    })
}

fn cmd_run(
    spec: &RatioSpec,
    sieve: &SieveArgs,
    product: &ProductArgs,
    dir: &Path,
    progress: &Progress,
) -> Result<ExitCode> {
    let config = RunConfig {
        factorize: sieve.config(),
        policy: product.policy()?,
        byte_order: product.byte_order(),
        out_dir: dir.to_path_buf(),
        emit_decimal: product.emit_decimal,
        format: FormatOptions {
            line_width: sieve.line_width,
        },
        moduli: DEFAULT_MODULI.to_vec(),
    };
    let summary = pipeline::run(spec, &config, &mut |line| progress.say(line))?;
    let r = &summary.reconstruction;
    let t = &summary.times;
    println!("spec={spec}");
    println!("factorization={}", summary.factorization_path.display());
    println!("binary={}", r.output_path.display());
    println!("prime_count={}", summary.factorization.prime_count());
    println!("digits={}", r.decimal_digits);
    println!("bit_length={}", r.value_bit_length);
    println!("file_size={}", r.file_size);
    println!("sha256={}", r.sha256_hex);
    println!("phase1_s={}", secs(t.factorize + t.write_factorization));
    println!("phase2_s={}", secs(t.reconstruct));
    println!("verify_s={}", secs(t.verify));
    println!("total_s={}", secs(t.total()));
    println!("verification={}", summary.report.verdict());
    if summary.report.all_pass {
        Ok(ExitCode::SUCCESS)
    } else {
        eprint!("{}", summary.report.to_text());
        Ok(ExitCode::from(EXIT_VERIFY))
    }
}
