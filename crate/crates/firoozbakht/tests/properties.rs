//! Property suites: randomized invariants across the sieve, the checker
//! tiers, the safe-bound solver, and the catalog round trip.

mod common;

use proptest::prelude::*;

use firoozbakht::catalog::{self, EntrySource};
use firoozbakht::ddouble::Dd;
use firoozbakht::exact::{self, CheckPolicy, PrimePair};
use firoozbakht::pi_bounds::PiBoundParams;
use firoozbakht::primality;
use firoozbakht::safe_bounds;
use firoozbakht::sieve::{self, SieveConfig};

fn seq_cfg() -> SieveConfig {
    SieveConfig {
        parallel: false,
        ..SieveConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prime_windows_match_trial_division(lo in 2u64..5_000_000, span in 0u64..2_000) {
        let hi = lo + span;
        let got: Vec<u64> = sieve::primes_in_range(lo, hi, &seq_cfg()).unwrap().collect();
        prop_assert_eq!(got, common::primes_trial(lo, hi));
    }

    #[test]
    fn dd_ln_tracks_f64(x in 1.0001f64..1e18) {
        let dd = Dd::from_f64(x).ln().to_f64();
        let f = x.ln();
        prop_assert!((dd - f).abs() <= 4.0 * f64::EPSILON * f.abs().max(1.0),
            "x = {}: dd {} vs f64 {}", x, dd, f);
    }

    #[test]
    fn dd_ln1p_tracks_f64(u in 1e-18f64..10.0) {
        let dd = Dd::from_f64(u).ln1p().to_f64();
        let f = u.ln_1p();
        prop_assert!((dd - f).abs() <= 4.0 * f64::EPSILON * f.abs(),
            "u = {}: dd {} vs f64 {}", u, dd, f);
    }

    #[test]
    fn checker_forms_agree_on_random_pairs(start in 3u64..100_000_000, k_guess in 1u64..50_000_000) {
        // Build a genuine consecutive pair from an arbitrary starting point;
        // the index is arbitrary but shared, so both forms must agree.
        let p = primality::next_prime(start).unwrap();
        let q = primality::next_prime(p).unwrap();
        let pair = PrimePair::new(k_guess, p, q).unwrap();
        let direct = exact::check_pair(&pair).unwrap();
        let pi_form = exact::check_pair_pi_form(&pair).unwrap();
        prop_assert_eq!(direct.holds, pi_form.holds,
            "pair ({}, {}) k={}", p, q, k_guess);
    }

    #[test]
    fn safe_bound_brackets_certified(half_gap in 1u64..400, wide in proptest::bool::ANY) {
        let gap = 2 * half_gap;
        let params = if wide { PiBoundParams::WIDE } else { PiBoundParams::TIGHT };
        let sb = safe_bounds::safe_bound(gap, &params).unwrap();
        prop_assert!(sb.x_star >= params.x_min as f64);
        if let Some((lo, hi)) = sb.bracket {
            prop_assert!(safe_bounds::gap_safety_margin(lo, gap, &params).unwrap() <= 0.0);
            prop_assert!(safe_bounds::gap_safety_margin(hi, gap, &params).unwrap() > 0.0);
            prop_assert!(hi - lo <= 1e-6 * sb.x_star);
        }
        // Spot the forward side at a few log-spaced points.
        for i in 1..=8 {
            let x = sb.threshold() * (10f64).powi(i);
            if x < 1e30 {
                prop_assert!(
                    safe_bounds::gap_safety_margin(x, gap, &params).unwrap() > 0.0,
                    "gap {}: negative past threshold at {}", gap, x
                );
            }
        }
    }

    #[test]
    fn catalog_roundtrip(limit in 100u64..200_000) {
        let records = sieve::scan_gaps(limit, &seq_cfg()).unwrap();
        let mut buf = Vec::new();
        catalog::write_catalog(&records, limit, "roundtrip", &mut buf).unwrap();
        let cat = catalog::parse_catalog(std::str::from_utf8(&buf).unwrap(), EntrySource::Sieved).unwrap();
        let evens: Vec<_> = records.iter().filter(|r| r.gap % 2 == 0).collect();
        prop_assert_eq!(cat.len(), evens.len());
        for r in evens {
            prop_assert_eq!(cat.first_occurrence(r.gap).unwrap(), Some(r.start_prime));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// Exact root: the three tiers agree wherever the forced-exact path is
    /// feasible.
    #[test]
    fn tiers_agree_on_small_pairs(start in 3u64..50_000) {
        let p = primality::next_prime(start).unwrap();
        let q = primality::next_prime(p).unwrap();
        // Use a plausible index scale so exponents stay tractable.
        let k = (p as f64 / (p as f64).ln()) as u64 + 1;
        let pair = PrimePair::new(k, p, q).unwrap();
        let tiered = exact::check_pair(&pair).unwrap();
        let high = exact::check_pair_with_policy(&pair, CheckPolicy::ForceHighPrecision).unwrap();
        let exact_out = exact::check_pair_with_policy(&pair, CheckPolicy::ForceExact).unwrap();
        prop_assert_eq!(tiered.holds, high.holds);
        prop_assert_eq!(tiered.holds, exact_out.holds);
    }
}

/// Monotone decrease of the root sequence wherever the float margin is
/// decisive; ties inside ulp noise defer to the exact verdict.
#[test]
fn root_sequence_decreases_where_float_is_decisive() {
    let cfg = seq_cfg();
    let primes: Vec<u64> = sieve::primes_in_range(2, 1_000_000, &cfg).unwrap().collect();
    let mut prev_root: Option<f64> = None;
    for (i, window) in primes.windows(2).enumerate() {
        let k = (i + 1) as u64;
        let pair = PrimePair::new_unchecked(k, window[0], window[1]);
        let outcome = exact::check_pair(&pair).unwrap();
        assert!(outcome.holds, "k = {k}");
        let root = exact::root_value(&pair);
        if let Some(prev) = prev_root {
            let tol = 10.0 * f64::EPSILON * prev;
            if prev - root > tol {
                // decisively decreasing, fine
            } else {
                assert!(
                    root - prev <= tol,
                    "root sequence increased at k = {k}: {prev} -> {root}"
                );
            }
        }
        prev_root = Some(root);
    }
}
