use catalan_engine::factorization::{factorize, parse, serialize_with, FactorizeConfig, FormatOptions};
use catalan_engine::reconstruct::{
    balanced_product, from_magnitude, reconstruct_value, write_binary, ByteOrder, ChunkPolicy, Natural,
};
use catalan_engine::sieve::{seed_primes, sieve_segment, stream_primes, SieveLimit};
use catalan_engine::valuation::{catalan_exponent, legendre, ratio_exponent, RatioSpec, ValuationTriple};
use catalan_engine::verify::modular_value;
use num_traits::One;
use proptest::prelude::*;

fn is_prime(k: u64) -> bool {
    k >= 2 && (2..).take_while(|d| d * d <= k).all(|d| !k.is_multiple_of(d))
}

fn factorial(m: u64) -> Natural {
    (2..=m).fold(Natural::one(), |acc, k| acc * k)
}

fn catalan_oracle(n: u64) -> Natural {
    factorial(2 * n) / (factorial(n) * factorial(n + 1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stream_matches_trial_division(limit in 2u64..20_000, segment in 1u64..5_000) {
        let got: Vec<u64> = stream_primes(SieveLimit::new(limit).unwrap(), segment).unwrap().collect();
        let expect: Vec<u64> = (2..=limit).filter(|&k| is_prime(k)).collect();
        prop_assert_eq!(got, expect);
    }

    #[test]
    fn segments_are_pure_and_complete(lo in 2u64..1_000_000, width in 0u64..2_000) {
        let hi = lo + width;
        let seeds = seed_primes(hi.isqrt());
        let seg = sieve_segment(lo, hi, &seeds).unwrap();
        let expect: Vec<u64> = (lo..=hi).filter(|&k| is_prime(k)).collect();
        prop_assert_eq!(&seg.primes, &expect);
        prop_assert_eq!(sieve_segment(lo, hi, &seeds).unwrap(), seg);
    }

    #[test]
    fn legendre_counts_factors(m in 0u64..3_000, p in prop::sample::select(vec![2u64, 3, 5, 7, 11, 13, 101, 997])) {
        let direct: u64 = (1..=m).map(|k| {
            let (mut k, mut c) = (k, 0);
            while k % p == 0 { k /= p; c += 1; }
            c
        }).sum();
        prop_assert_eq!(legendre(m, p).unwrap(), direct);
    }

    #[test]
    fn catalan_exponent_is_triple(n in 0u64..100_000, idx in 0usize..500) {
        let primes = seed_primes(2 * n.max(1));
        prop_assume!(!primes.is_empty());
        let p = primes[idx % primes.len()];
        let t = ValuationTriple::compute(n, p).unwrap();
        prop_assert_eq!(catalan_exponent(n, p).unwrap() as i128, t.exponent());
        if p > n && p <= 2 * n {
            prop_assert!(catalan_exponent(n, p).unwrap() <= 1);
        }
    }

    #[test]
    fn binomial_ratio_matches_oracle(n in 0u64..300, k in 0u64..300) {
        prop_assume!(k <= n);
        let spec = RatioSpec::binomial(n, k).unwrap();
        let f = factorize(&spec, &FactorizeConfig::default()).unwrap();
        let expect = factorial(n) / (factorial(k) * factorial(n - k));
        prop_assert_eq!(reconstruct_value(&f, &ChunkPolicy::default()).unwrap(), expect);
        for p in [2u64, 3, 5] {
            prop_assert!(ratio_exponent(&spec, p).unwrap() >= 0);
        }
    }

    #[test]
    fn format_round_trips(n in 0u64..3_000, width in 1usize..200) {
        let f = factorize(&RatioSpec::catalan(n).unwrap(), &FactorizeConfig::default()).unwrap();
        let mut text = Vec::new();
        serialize_with(&f, &mut text, &FormatOptions { line_width: width }).unwrap();
        prop_assert_eq!(parse(&text[..]).unwrap(), f);
    }

    #[test]
    fn balanced_product_is_chunk_invariant(values in prop::collection::vec(1u64.., 0..300), chunk in 1usize..40) {
        let operands = || values.iter().map(|&v| Natural::from(v));
        let sequential = operands().fold(Natural::one(), |a, b| a * b);
        let policy = ChunkPolicy { chunk_size: chunk, ..ChunkPolicy::default() };
        prop_assert_eq!(balanced_product(operands(), &policy).unwrap(), sequential);
    }

    #[test]
    fn magnitude_round_trips(bytes in prop::collection::vec(any::<u8>(), 0..200), big in any::<bool>()) {
        let order = if big { ByteOrder::Big } else { ByteOrder::Little };
        let value = from_magnitude(&bytes, order);
        let mut out = Vec::new();
        let len = write_binary(&value, &mut out, order).unwrap();
        prop_assert_eq!(len as usize, out.len());
        prop_assert_eq!(out.len() as u64, value.bits().div_ceil(8).max(1));
        prop_assert_eq!(from_magnitude(&out, order), value);
    }

    #[test]
    fn residues_match_reduction(n in 0u64..400, m in 2u64..) {
        let f = factorize(&RatioSpec::catalan(n).unwrap(), &FactorizeConfig::default()).unwrap();
        let value = catalan_oracle(n);
        prop_assert_eq!(Natural::from(modular_value(&f, m).unwrap()), value % m);
    }
}
