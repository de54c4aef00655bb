//! Shared independent oracles for integration tests. Everything here is
//! deliberately naive: trial division and linear walks only, no shared code
//! with the implementation paths they check.

#![allow(dead_code)] // each test binary uses a different subset

/// Trial-division primality.
pub fn is_prime_trial(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// All primes in [lo, hi] by trial division.
pub fn primes_trial(lo: u64, hi: u64) -> Vec<u64> {
    (lo..=hi).filter(|&n| is_prime_trial(n)).collect()
}

/// First occurrence and maximal-gap records below `limit`, from a plain
/// walk over all consecutive pairs with p < limit.
/// Returns (gap, start, maximal) sorted by gap.
pub fn gap_records_trial(limit: u64) -> Vec<(u64, u64, bool)> {
    let mut first: std::collections::BTreeMap<u64, (u64, bool)> = Default::default();
    let mut running_max = 0u64;
    let mut prev = 2u64;
    let mut n = 3u64;
    while prev < limit {
        if is_prime_trial(n) {
            let gap = n - prev;
            let maximal = gap > running_max;
            if maximal {
                running_max = gap;
            }
            first.entry(gap).or_insert((prev, maximal));
            prev = n;
        }
        n += 2;
    }
    first
        .into_iter()
        .map(|(g, (s, m))| (g, s, m))
        .collect()
}
