//! Phase 2: rebuild the exact integer from its grouped factorization.
//!
//! For every exponent group `G_e` the primes are multiplied with a balanced
//! product tree into `Q_e`, raised to `P_e = Q_e^e`, and the `P_e` are combined
//! by another balanced tree.
//!
//! Trees are built chunk by chunk: each chunk of `chunk_size` operands is
//! reduced by recursive halving, and the chunk products are merged like a
//! binary counter, so two operands are only multiplied when they cover the
//! same number of chunks. When a memory budget is set, finished partial
//! products that push the live total over it are written to the offload
//! directory and read back just before they are needed.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::arith::{self, Big};
use crate::digest::HashingWriter;
use crate::error::{Error, Result};
use crate::factorization::{artifact_stem, Factorization};
use crate::parallel::with_workers;

/// Arbitrary-precision non-negative integer.
pub type Natural = BigUint;

pub const DEFAULT_CHUNK_SIZE: usize = 100_000;

/// Subtrees with fewer leaves than this are multiplied on the calling thread.
const PARALLEL_LEAVES: usize = 512;
const SEQUENTIAL_LEAVES: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChunkPolicy {
    /// Operands per chunk, at least 1.
    pub chunk_size: usize,
    /// Soft cap in bytes on live partial products. `None` is unlimited.
    pub memory_budget: Option<u64>,
    /// Where partial products are spilled. Without one, exceeding the budget
    /// is an error.
    pub offload_dir: Option<PathBuf>,
}

impl Default for ChunkPolicy {
    fn default() -> Self {
        ChunkPolicy {
            chunk_size: DEFAULT_CHUNK_SIZE,
            memory_budget: None,
            offload_dir: None,
        }
    }
}

impl ChunkPolicy {
    fn validate(&self) -> Result<()> {
        if self.chunk_size == 0 {
            return Err(Error::InvalidArgument("chunk size must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ByteOrder {
    #[default]
    Little,
    Big,
}

// ---------------------------------------------------------------------------
// product trees

fn tree_product_u64(leaves: &[u64]) -> Big {
    if leaves.len() <= SEQUENTIAL_LEAVES {
        let mut acc = arith::one();
        let mut small: u128 = 1;
        for &p in leaves {
            match small.checked_mul(p as u128) {
                Some(v) => small = v,
                None => {
                    acc *= arith::from_u128(small);
                    small = p as u128;
                }
            }
        }
        return acc * arith::from_u128(small);
    }
    let (left, right) = leaves.split_at(leaves.len() / 2);
    let (a, b) = if leaves.len() >= PARALLEL_LEAVES {
        rayon::join(|| tree_product_u64(left), || tree_product_u64(right))
    } else {
        (tree_product_u64(left), tree_product_u64(right))
    };
    a * b
}

fn tree_product(mut leaves: Vec<Big>) -> Big {
    match leaves.len() {
        0 => arith::one(),
        1 => leaves.pop().unwrap(),
        n => {
            let right = leaves.split_off(n / 2);
            let (a, b) = if n >= 4 {
                rayon::join(|| tree_product(leaves), || tree_product(right))
            } else {
                (tree_product(leaves), tree_product(right))
            };
            a * b
        }
    }
}

// ---------------------------------------------------------------------------
// spilling accumulator

static SPILL_SEQ: AtomicU64 = AtomicU64::new(0);

enum Operand {
    Memory(Big),
    Disk { path: PathBuf, bits: u64 },
}

impl Operand {
    fn resident_bits(&self) -> u64 {
        match self {
            Operand::Memory(v) => arith::bits(v),
            Operand::Disk { .. } => 0,
        }
    }
}

fn bytes_of(bits: u64) -> u64 {
    bits.div_ceil(8)
}

/// Streaming balanced product under a [`ChunkPolicy`].
struct Accumulator<'a> {
    policy: &'a ChunkPolicy,
    pending: Vec<Big>,
    pending_bits: u64,
    /// `(level, operand)`; levels strictly decrease toward the top.
    stack: Vec<(u32, Operand)>,
    stats: &'a mut OffloadStats,
}

/// Counters for spills performed during one reconstruction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OffloadStats {
    pub spilled_operands: u64,
    pub spilled_bytes: u64,
}

impl<'a> Accumulator<'a> {
    fn new(policy: &'a ChunkPolicy, stats: &'a mut OffloadStats) -> Self {
        Accumulator {
            policy,
            pending: Vec::new(),
            pending_bits: 0,
            stack: Vec::new(),
            stats,
        }
    }

    fn over_budget(&self, extra_bits: u64) -> bool {
        let Some(budget) = self.policy.memory_budget else {
            return false;
        };
        let live: u64 =
            self.stack.iter().map(|(_, op)| op.resident_bits()).sum::<u64>() + self.pending_bits + extra_bits;
        bytes_of(live) > budget
    }

    /// Buffers one operand; full chunks are reduced immediately.
    fn push(&mut self, value: Big) -> Result<()> {
        self.pending_bits += arith::bits(&value);
        self.pending.push(value);
        if self.pending.len() >= self.policy.chunk_size || self.over_budget(0) {
            self.flush_pending()?;
        }
        Ok(())
    }

    fn flush_pending(&mut self) -> Result<()> {
        if self.pending.is_empty() {
            return Ok(());
        }
        let leaves = std::mem::take(&mut self.pending);
        self.pending_bits = 0;
        self.push_chunk_product(tree_product(leaves))
    }

    /// Adds the product of one complete chunk.
    fn push_chunk_product(&mut self, value: Big) -> Result<()> {
        let mut level = 0;
        let mut value = value;
        while matches!(self.stack.last(), Some((l, _)) if *l == level) {
            let (_, operand) = self.stack.pop().unwrap();
            let other = self.load(operand)?;
            value = other * value;
            level += 1;
        }
        self.stack.push((level, Operand::Memory(value)));
        self.enforce_budget()
    }

    fn enforce_budget(&mut self) -> Result<()> {
        if !self.over_budget(0) {
            return Ok(());
        }
        let Some(dir) = self.policy.offload_dir.clone() else {
            return Err(Error::Resource(format!(
                "live partial products exceed the memory budget of {} bytes and offloading is disabled",
                self.policy.memory_budget.unwrap_or(0)
            )));
        };
        // spill from the bottom (largest, needed last) upward
        for i in 0..self.stack.len() {
            if !self.over_budget(0) {
                break;
            }
            if let Operand::Memory(_) = self.stack[i].1 {
                let placeholder = Operand::Disk {
                    path: PathBuf::new(),
                    bits: 0,
                };
                let Operand::Memory(value) = std::mem::replace(&mut self.stack[i].1, placeholder) else {
                    unreachable!()
                };
                self.stack[i].1 = self.spill(&dir, value)?;
            }
        }
        Ok(())
    }

    fn spill(&mut self, dir: &Path, value: Big) -> Result<Operand> {
        let seq = SPILL_SEQ.fetch_add(1, Ordering::Relaxed);
        let path = dir.join(format!("partial-{}-{seq}.bin", std::process::id()));
        let resource = |e: std::io::Error| Error::Resource(format!("offload to {} failed: {e}", path.display()));
        let bytes = arith::to_le_bytes(&value);
        let bits = arith::bits(&value);
        drop(value);
        fs::write(&path, &bytes).map_err(resource)?;
        self.stats.spilled_operands += 1;
        self.stats.spilled_bytes += bytes.len() as u64;
        Ok(Operand::Disk { path, bits })
    }

    fn load(&mut self, operand: Operand) -> Result<Big> {
        match operand {
            Operand::Memory(v) => Ok(v),
            Operand::Disk { path, bits } => {
                let bytes = fs::read(&path)
                    .map_err(|e| Error::Resource(format!("reading offloaded {}: {e}", path.display())))?;
                let _ = fs::remove_file(&path);
                let value = arith::from_le_bytes(&bytes);
                if arith::bits(&value) != bits {
                    return Err(Error::Resource(format!(
                        "offloaded operand {} came back with {} bits, expected {bits}",
                        path.display(),
                        arith::bits(&value)
                    )));
                }
                Ok(value)
            }
        }
    }

    fn finish(mut self) -> Result<Big> {
        self.flush_pending()?;
        let mut result = arith::one();
        while let Some((_, operand)) = self.stack.pop() {
            let v = self.load(operand)?;
            result = v * result;
        }
        Ok(result)
    }
}

impl Drop for Accumulator<'_> {
    fn drop(&mut self) {
        for (_, op) in &self.stack {
            if let Operand::Disk { path, .. } = op {
                let _ = fs::remove_file(path);
            }
        }
    }
}

/// Exact product of `operands`, 1 when empty.
pub fn balanced_product(operands: impl IntoIterator<Item = Natural>, policy: &ChunkPolicy) -> Result<Natural> {
    policy.validate()?;
    let mut stats = OffloadStats::default();
    let mut acc = Accumulator::new(policy, &mut stats);
    for op in operands {
        acc.push(arith::from_natural(&op))?;
    }
    acc.finish().map(arith::to_natural)
}

fn prime_product(primes: &[u64], policy: &ChunkPolicy, stats: &mut OffloadStats) -> Result<Big> {
    let mut acc = Accumulator::new(policy, stats);
    for chunk in primes.chunks(policy.chunk_size) {
        acc.push_chunk_product(tree_product_u64(chunk))?;
    }
    acc.finish()
}

/// `base^e` by repeated squaring.
pub fn power(base: &Natural, e: u64) -> Natural {
    match e {
        0 => Natural::one(),
        1 => base.clone(),
        _ => arith::to_natural(arith::pow(&arith::from_natural(base), e)),
    }
}

/// `Π_e (Π G_e)^e`.
pub fn reconstruct_value(f: &Factorization, policy: &ChunkPolicy) -> Result<Natural> {
    reconstruct_with_stats(f, policy).map(|(v, _)| v)
}

fn reconstruct_with_stats(f: &Factorization, policy: &ChunkPolicy) -> Result<(Natural, OffloadStats)> {
    policy.validate()?;
    let mut stats = OffloadStats::default();
    let mut outer_stats = OffloadStats::default();
    let mut outer = Accumulator::new(policy, &mut outer_stats);
    for group in f.groups() {
        let q = prime_product(&group.primes, policy, &mut stats)?;
        outer.push(if group.exponent == 1 {
            q
        } else {
            arith::pow(&q, group.exponent)
        })?;
    }
    let value = arith::to_natural(outer.finish()?);
    stats.spilled_operands += outer_stats.spilled_operands;
    stats.spilled_bytes += outer_stats.spilled_bytes;
    Ok((value, stats))
}

// ---------------------------------------------------------------------------
// serialization

/// Writes the headerless magnitude: `⌈bits/8⌉` bytes, or a single zero byte
/// for 0. Returns the byte count.
pub fn write_binary(value: &Natural, sink: &mut impl Write, order: ByteOrder) -> Result<u64> {
    let digits: Vec<u64> = value.iter_u64_digits().collect();
    let Some((&top, rest)) = digits.split_last() else {
        sink.write_all(&[0])?;
        return Ok(1);
    };
    let top_len = (64 - top.leading_zeros() as usize).div_ceil(8);
    match order {
        ByteOrder::Little => {
            for d in rest {
                sink.write_all(&d.to_le_bytes())?;
            }
            sink.write_all(&top.to_le_bytes()[..top_len])?;
        }
        ByteOrder::Big => {
            sink.write_all(&top.to_be_bytes()[8 - top_len..])?;
            for d in rest.iter().rev() {
                sink.write_all(&d.to_be_bytes())?;
            }
        }
    }
    Ok((rest.len() * 8 + top_len) as u64)
}

pub fn read_binary(source: &mut impl Read, order: ByteOrder) -> Result<Natural> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    Ok(from_magnitude(&bytes, order))
}

pub fn from_magnitude(bytes: &[u8], order: ByteOrder) -> Natural {
    match order {
        ByteOrder::Little => Natural::from_bytes_le(bytes),
        ByteOrder::Big => Natural::from_bytes_be(bytes),
    }
}

pub fn read_binary_file(path: &Path, order: ByteOrder) -> Result<Natural> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_binary(&mut BufReader::new(file), order).map_err(|e| match e {
        Error::Stream(io) => Error::io(path, io),
        other => other,
    })
}

/// ASCII decimal digits and a newline. Returns the digit count.
pub fn write_decimal(value: &Natural, sink: &mut impl Write) -> Result<u64> {
    let text = arith::to_decimal(value);
    sink.write_all(text.as_bytes())?;
    sink.write_all(b"\n")?;
    Ok(text.len() as u64)
}

/// Number of decimal digits, without a full radix conversion.
pub fn decimal_len(value: &Natural) -> u64 {
    if value.is_zero() {
        return 1;
    }
    arith::decimal_len(value)
}

// ---------------------------------------------------------------------------
// file-level driver

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReconstructOptions {
    pub policy: ChunkPolicy,
    pub workers: Option<usize>,
    pub byte_order: ByteOrder,
    pub output: PathBuf,
    pub decimal_output: Option<PathBuf>,
}

impl ReconstructOptions {
    /// Defaults writing `<stem>_reconstructed.bin` (and optionally
    /// `<stem>_reconstructed.txt`) into `dir`.
    pub fn in_dir(f: &Factorization, dir: &Path, emit_decimal: bool) -> Self {
        let stem = artifact_stem(f.spec());
        ReconstructOptions {
            policy: ChunkPolicy::default(),
            workers: None,
            byte_order: ByteOrder::Little,
            output: dir.join(format!("{stem}_reconstructed.bin")),
            decimal_output: emit_decimal.then(|| dir.join(format!("{stem}_reconstructed.txt"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReconstructionResult {
    pub value_bit_length: u64,
    pub decimal_digits: u64,
    pub sha256_hex: String,
    pub output_path: PathBuf,
    pub file_size: u64,
    pub offload: OffloadStats,
}

pub struct Reconstruction {
    pub result: ReconstructionResult,
    pub value: Natural,
}

/// Rebuilds the value and writes it (binary, optionally decimal).
pub fn reconstruct(f: &Factorization, options: &ReconstructOptions) -> Result<Reconstruction> {
    let (value, offload) = with_workers(options.workers, || reconstruct_with_stats(f, &options.policy))??;

    let path = &options.output;
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut sink = HashingWriter::new(BufWriter::with_capacity(1 << 20, file));
    write_binary(&value, &mut sink, options.byte_order).map_err(|e| match e {
        Error::Stream(io) => Error::io(path, io),
        other => other,
    })?;
    let (_, sha256_hex, file_size) = sink.finish().map_err(|e| Error::io(path, e))?;

    if let Some(dec) = &options.decimal_output {
        let file = File::create(dec).map_err(|e| Error::io(dec, e))?;
        let mut w = BufWriter::new(file);
        write_decimal(&value, &mut w)
            .and_then(|_| w.flush().map_err(Error::from))
            .map_err(|e| match e {
                Error::Stream(io) => Error::io(dec, io),
                other => other,
            })?;
    }

    let result = ReconstructionResult {
        value_bit_length: value.bits(),
        decimal_digits: decimal_len(&value),
        sha256_hex,
        output_path: path.clone(),
        file_size,
        offload,
    };
    Ok(Reconstruction { result, value })
}
