//! Segmented Sieve of Eratosthenes.
//!
//! Seeds up to `√limit` come from a plain sieve; the range `[2, limit]` is then
//! cut into disjoint segments which are sieved independently (odd numbers
//! only, one bit each) and handed out in ascending order. Segments of a batch
//! run on the current rayon pool, so the degree of parallelism is whatever
//! pool the caller installs.

use std::collections::VecDeque;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};

pub const DEFAULT_SEGMENT_SIZE: u64 = 1_000_000;

/// Largest accepted limit. Keeps `hi + segment_size` and `p * p` arithmetic
/// comfortably inside `u64`.
pub const MAX_LIMIT: u64 = 1 << 62;

/// Inclusive upper bound of a sieve run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct SieveLimit(u64);

impl SieveLimit {
    pub fn new(limit: u64) -> Result<Self> {
        if limit < 2 {
            return Err(Error::InvalidArgument(format!(
                "sieve limit must be at least 2, got {limit}"
            )));
        }
        if limit > MAX_LIMIT {
            return Err(Error::InvalidArgument(format!(
                "sieve limit {limit} exceeds the supported maximum {MAX_LIMIT}"
            )));
        }
        Ok(SieveLimit(limit))
    }

    pub fn get(self) -> u64 {
        self.0
    }
}

/// The primes of the inclusive range `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub lo: u64,
    pub hi: u64,
    pub primes: Vec<u64>,
}

/// All primes `<= bound` by a plain (non-segmented) sieve. Returns an empty
/// list for `bound < 2`.
pub fn seed_primes(bound: u64) -> Vec<u64> {
    if bound < 2 {
        return Vec::new();
    }
    let bound = usize::try_from(bound).expect("seed bound exceeds address space");
    let mut composite = vec![false; bound + 1];
    let mut primes = Vec::new();
    for i in 2..=bound {
        if composite[i] {
            continue;
        }
        primes.push(i as u64);
        if let Some(start) = i.checked_mul(i) {
            for j in (start..=bound).step_by(i) {
                composite[j] = true;
            }
        }
    }
    primes
}

/// Sieves `[lo, hi]` with the given seed primes.
///
/// `seeds` must be ascending and contain every prime up to `√hi`. The tail of
/// that requirement is checked (a prime in `(max seed, √hi]` is reported as
/// missing); gaps inside the seed list are not detected.
pub fn sieve_segment(lo: u64, hi: u64, seeds: &[u64]) -> Result<Segment> {
    if lo < 2 || lo > hi {
        return Err(Error::InvalidArgument(format!(
            "segment bounds must satisfy 2 <= lo <= hi, got [{lo}, {hi}]"
        )));
    }
    if hi > MAX_LIMIT {
        return Err(Error::InvalidArgument(format!("segment end {hi} exceeds {MAX_LIMIT}")));
    }
    if seeds.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("seed primes must be strictly ascending".into()));
    }
    if let Some(missing) = first_missing_seed(hi, seeds) {
        return Err(Error::InvalidArgument(format!(
            "seed list is missing prime {missing} required to sieve up to {hi}"
        )));
    }
    Ok(sieve_range(lo, hi, seeds))
}

/// A prime in `(max seed, √hi]`, if the list stops short of one.
pub(crate) fn first_missing_seed(hi: u64, seeds: &[u64]) -> Option<u64> {
    let root = hi.isqrt();
    let last = seeds.last().copied().unwrap_or(1);
    (last + 1..=root).find(|&k| seeds.iter().take_while(|&&p| p * p <= k).all(|&p| k % p != 0))
}

/// Unchecked odd-only sieve of `[lo, hi]`.
pub(crate) fn sieve_range(lo: u64, hi: u64, seeds: &[u64]) -> Segment {
    let mut primes = Vec::new();
    if lo <= 2 && 2 <= hi {
        primes.push(2);
    }
    let first = if lo <= 3 { 3 } else { lo | 1 };
    if first > hi {
        return Segment { lo, hi, primes };
    }

    // bit i stands for first + 2i
    let count = ((hi - first) / 2 + 1) as usize;
    let mut composite = vec![0u64; count.div_ceil(64)];
    for &p in seeds {
        if p == 2 {
            continue;
        }
        let square = p * p;
        if square > hi {
            break;
        }
        let mut multiple = if square >= first { square } else { first.div_ceil(p) * p };
        if multiple % 2 == 0 {
            multiple += p;
        }
        let mut idx = ((multiple - first) / 2) as usize;
        let step = p as usize;
        while idx < count {
            composite[idx / 64] |= 1 << (idx % 64);
            idx += step;
        }
    }

    primes.reserve(count / 8);
    for (word_idx, &word) in composite.iter().enumerate() {
        let mut free = !word;
        while free != 0 {
            let bit = free.trailing_zeros() as usize;
            let idx = word_idx * 64 + bit;
            if idx >= count {
                break;
            }
            primes.push(first + 2 * idx as u64);
            free &= free - 1;
        }
    }
    Segment { lo, hi, primes }
}

/// Ascending iterator over the segments covering `[2, limit]`.
///
/// Segments are computed a batch at a time on the current rayon pool and
/// yielded in index order, so the output does not depend on the pool size.
pub struct Segments {
    seeds: Arc<Vec<u64>>,
    next_lo: u64,
    limit: u64,
    segment_size: u64,
    ready: VecDeque<Segment>,
}

impl Segments {
    pub fn new(limit: SieveLimit, segment_size: u64) -> Result<Self> {
        if segment_size == 0 {
            return Err(Error::InvalidArgument("segment size must be at least 1".into()));
        }
        let limit = limit.get();
        Ok(Segments {
            seeds: Arc::new(seed_primes(limit.isqrt())),
            next_lo: 2,
            limit,
            segment_size,
            ready: VecDeque::new(),
        })
    }

    fn next_ranges(&mut self) -> Vec<(u64, u64)> {
        let batch = (rayon::current_num_threads() * 4).max(1);
        let mut ranges = Vec::with_capacity(batch);
        while ranges.len() < batch && self.next_lo <= self.limit {
            let lo = self.next_lo;
            let hi = lo.saturating_add(self.segment_size - 1).min(self.limit);
            ranges.push((lo, hi));
            self.next_lo = hi + 1;
        }
        ranges
    }

    fn refill(&mut self) {
        let ranges = self.next_ranges();
        let seeds = &self.seeds;
        let computed: Vec<Segment> = ranges
            .into_par_iter()
            .map(|(lo, hi)| sieve_range(lo, hi, seeds))
            .collect();
        self.ready.extend(computed);
    }

    /// Sieves every segment and applies `map` to it on the current pool,
    /// feeding the results to `consume` in ascending segment order.
    pub fn map_ordered<T, E>(
        mut self,
        map: impl Fn(Segment) -> T + Sync,
        mut consume: impl FnMut(T) -> Result<(), E>,
    ) -> Result<(), E>
    where
        T: Send,
    {
        loop {
            let ranges = self.next_ranges();
            if ranges.is_empty() {
                return Ok(());
            }
            let seeds = &self.seeds;
            let mapped: Vec<T> = ranges
                .into_par_iter()
                .map(|(lo, hi)| map(sieve_range(lo, hi, seeds)))
                .collect();
            for item in mapped {
                consume(item)?;
            }
        }
    }
}

impl Iterator for Segments {
    type Item = Segment;

    fn next(&mut self) -> Option<Segment> {
        if self.ready.is_empty() {
            self.refill();
        }
        self.ready.pop_front()
    }
}

/// Every prime `<= limit`, ascending.
pub fn stream_primes(limit: SieveLimit, segment_size: u64) -> Result<impl Iterator<Item = u64>> {
    Ok(Segments::new(limit, segment_size)?.flat_map(|s| s.primes))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_division_primes(limit: u64) -> Vec<u64> {
        (2..=limit)
            .filter(|&k| (2..).take_while(|d| d * d <= k).all(|d| k % d != 0))
            .collect()
    }

    #[test]
    fn seed_primes_small() {
        assert_eq!(seed_primes(10), vec![2, 3, 5, 7]);
        assert_eq!(seed_primes(2), vec![2]);
        assert!(seed_primes(1).is_empty());
        assert!(seed_primes(0).is_empty());
    }

    #[test]
    fn seed_primes_million() {
        assert_eq!(seed_primes(1_000_000).len(), 78498);
    }

    #[test]
    fn segment_examples() {
        let seeds = seed_primes(11);
        let seg = sieve_segment(100, 120, &seeds).unwrap();
        assert_eq!(seg.primes, vec![101, 103, 107, 109, 113]);

        let seg = sieve_segment(2, 10, &[2, 3]).unwrap();
        assert_eq!(seg.primes, vec![2, 3, 5, 7]);

        let seg = sieve_segment(114, 126, &seed_primes(12)).unwrap();
        // 113 and 127 bracket a prime gap; the only trap in range is 121
        assert!(seg.primes.is_empty());
        assert_eq!(
            seg.primes,
            trial_division_primes(126)
                .into_iter()
                .filter(|&p| p >= 114)
                .collect::<Vec<_>>()
        );
    }

    #[test]
    fn segment_rejects_missing_seed() {
        // 121 = 11^2 would slip through without 11
        let err = sieve_segment(114, 126, &[2, 3, 5, 7]).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(ref m) if m.contains("11")));
        assert!(sieve_segment(10, 5, &[2]).is_err());
        assert!(sieve_segment(1, 5, &[2]).is_err());
        assert!(sieve_segment(2, 50, &[3, 2, 5, 7]).is_err());
    }

    #[test]
    fn segment_is_pure() {
        let seeds = seed_primes(1000);
        let a = sieve_segment(500_000, 501_000, &seeds).unwrap();
        let b = sieve_segment(500_000, 501_000, &seeds).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn stream_small() {
        let expect = vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29];
        let limit = SieveLimit::new(30).unwrap();
        assert_eq!(stream_primes(limit, 7).unwrap().collect::<Vec<_>>(), expect);
        assert_eq!(stream_primes(limit, 1000).unwrap().collect::<Vec<_>>(), expect);
        assert_eq!(stream_primes(limit, 1).unwrap().collect::<Vec<_>>(), expect);
    }

    #[test]
    fn limit_validation() {
        assert!(SieveLimit::new(1).is_err());
        assert!(SieveLimit::new(MAX_LIMIT + 1).is_err());
        assert!(Segments::new(SieveLimit::new(10).unwrap(), 0).is_err());
    }

    #[test]
    fn matches_trial_division_up_to_ten_thousand() {
        let oracle = trial_division_primes(10_000);
        for size in [1, 2, 3, 64, 127, 1000, 20_000] {
            let got: Vec<u64> = stream_primes(SieveLimit::new(10_000).unwrap(), size).unwrap().collect();
            assert_eq!(got, oracle, "segment size {size}");
        }
    }
}
