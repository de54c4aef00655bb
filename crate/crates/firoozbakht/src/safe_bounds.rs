//! Per-gap safe thresholds and per-pair conjecture bounds.
//!
//! For a gap size g and a pi bound x/(ln x - c), define
//!
//!   G(x) = ln x / ln(1 + g/x)  -  x / (ln x - c).
//!
//! Wherever G(x) > 0, a pair of consecutive primes (x, x+g) satisfies the
//! conjectured inequality without knowing pi(x). The safe bound x* is the
//! least threshold at or above the bound's validity floor such that
//! G stays positive beyond it; gaps of size g between primes above x* can
//! never produce a counterexample.

use std::ops::ControlFlow;

use crate::error::{Error, Result};
use crate::pi_bounds::{pi_upper, PiBoundParams, Rounding};
use crate::sieve::{self, SieveConfig};

/// Bracket expansion stops here; no gap size of interest comes anywhere
/// close (safe bounds grow like exp(sqrt(g))).
const SCAN_HORIZON: f64 = 1e30;

/// Relative bisection tolerance.
const BISECT_REL_TOL: f64 = 1e-12;

/// Safe threshold for one gap size under one pi bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SafeBound {
    pub gap: u64,
    pub c: f64,
    pub x_min: u64,
    /// Threshold: G is certified positive at and beyond this point (up to
    /// the sampled horizon). Equal to x_min when already safe at the floor.
    pub x_star: f64,
    /// Final bisection bracket (lo, hi) with G(lo) <= 0 < G(hi); absent when
    /// x_star sits on the validity floor.
    pub bracket: Option<(f64, f64)>,
}

impl SafeBound {
    /// The value the verdict engine compares primes against: x_star rounded
    /// up to the next representable double.
    pub fn threshold(&self) -> f64 {
        self.x_star.next_up()
    }
}

/// Lower bound on G(x): the positive term is nudged down and the pi bound
/// up, so a positive result certifies real-arithmetic positivity.
pub fn gap_safety_margin(x: f64, gap: u64, params: &PiBoundParams) -> Result<f64> {
    let first = (x.ln() / (gap as f64 / x).ln_1p())
        .next_down()
        .next_down()
        .next_down()
        .next_down();
    let second = pi_upper(x, params, Rounding::Upward)?;
    Ok(first - second)
}

/// Solve for the safe bound of one gap size.
///
/// Doubles x from the validity floor to locate the last sign change below
/// the horizon, then bisects. If G is already positive at the floor and at
/// every sampled doubling, the floor itself is the bound.
pub fn safe_bound(gap: u64, params: &PiBoundParams) -> Result<SafeBound> {
    if gap < 2 || gap % 2 != 0 {
        return Err(Error::domain(format!(
            "gap must be a positive even integer, got {gap}"
        )));
    }
    let floor = params.x_min as f64;
    if floor.ln() <= params.c {
        return Err(Error::domain(format!(
            "pi bound singular at its own floor: ln {floor} <= {}",
            params.c
        )));
    }

    // Sample G at floor * 2^i and remember the last non-positive sample.
    let mut last_nonpos: Option<f64> = None;
    let mut sign_at_top = false;
    let mut x = floor;
    while x <= SCAN_HORIZON {
        let m = gap_safety_margin(x, gap, params)?;
        sign_at_top = m > 0.0;
        if m <= 0.0 {
            last_nonpos = Some(x);
        }
        x *= 2.0;
    }

    let Some(lo0) = last_nonpos else {
        return Ok(SafeBound {
            gap,
            c: params.c,
            x_min: params.x_min,
            x_star: floor,
            bracket: None,
        });
    };
    if !sign_at_top {
        return Err(Error::solver(format!(
            "no positive region found below the horizon {SCAN_HORIZON:e} for gap {gap}, c = {}",
            params.c
        )));
    }

    let mut lo = lo0;
    let mut hi = lo0 * 2.0;
    for _ in 0..200 {
        if hi - lo <= hi * BISECT_REL_TOL {
            break;
        }
        let mid = lo + (hi - lo) / 2.0;
        if mid <= lo || mid >= hi {
            break;
        }
        if gap_safety_margin(mid, gap, params)? <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(SafeBound {
        gap,
        c: params.c,
        x_min: params.x_min,
        x_star: hi,
        bracket: Some((lo, hi)),
    })
}

/// Safe bounds for every even gap in [2, g_max], ascending.
pub fn safe_bound_table(g_max: u64, params: &PiBoundParams) -> Result<Vec<SafeBound>> {
    if g_max < 2 {
        return Err(Error::domain(format!("g_max must be >= 2, got {g_max}")));
    }
    let gaps: Vec<u64> = (1..=g_max / 2).map(|i| 2 * i).collect();
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        return gaps.par_iter().map(|&g| safe_bound(g, params)).collect();
    }
    #[cfg(not(feature = "parallel"))]
    gaps.iter().map(|&g| safe_bound(g, params)).collect()
}

/// Upper bound for p_{k+1} predicted by the modified Cramer conjecture:
/// the solution of x = p + ln^2 x, by fixed-point iteration.
pub fn cramer_bound(p: u64, p_next_hint: Option<u64>) -> Result<f64> {
    if p < 2 {
        return Err(Error::domain(format!("p must be a prime >= 2, got {p}")));
    }
    let pf = p as f64;
    let mut x = match p_next_hint {
        Some(q) => q as f64,
        None => pf + pf.ln().powi(2),
    };
    for _ in 0..200 {
        let next = pf + x.ln().powi(2);
        if (next - x).abs() <= 1e-12 * x {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::solver(format!(
        "fixed point x = p + ln^2 x did not converge for p = {p}"
    )))
}

/// Upper bound for p_{k+1} predicted by the conjecture under test:
/// p^((k+1)/k).
pub fn firoozbakht_bound(k: u64, p: u64) -> Result<f64> {
    if k == 0 {
        return Err(Error::domain("index k must be >= 1".to_string()));
    }
    let pf = p as f64;
    if k == 1 {
        return Ok(pf * pf);
    }
    Ok(pf * (pf.ln() / k as f64).exp())
}

/// One row of the side-by-side bound comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConjectureBounds {
    pub k: u64,
    pub p: u64,
    pub p_next: u64,
    pub cramer_bound: f64,
    pub firoozbakht_bound: f64,
}

/// Indices of the comparison rows: primes 11 through 10000019.
pub const TABLE_KS: [u64; 7] = [5, 26, 169, 1230, 9593, 78499, 664580];

/// Locate each row's prime pair by sieve and apply both solvers.
pub fn conjecture_bounds_table(cfg: &SieveConfig) -> Result<Vec<ConjectureBounds>> {
    let mut rows = Vec::with_capacity(TABLE_KS.len());
    let mut remaining: &[u64] = &TABLE_KS;
    let mut found: Vec<(u64, u64, u64)> = Vec::new();
    sieve::for_each_pair(10_000_100, cfg, |k, p, q| {
        if let Some(&target) = remaining.first() {
            if k == target {
                found.push((k, p, q));
                remaining = &remaining[1..];
            }
            if remaining.is_empty() {
                return ControlFlow::Break(());
            }
        }
        ControlFlow::Continue(())
    })?;
    if found.len() != TABLE_KS.len() {
        return Err(Error::range(
            "sieve range too small to locate all table rows".to_string(),
        ));
    }
    for (k, p, q) in found {
        rows.push(ConjectureBounds {
            k,
            p,
            p_next: q,
            cramer_bound: cramer_bound(p, Some(q))?,
            firoozbakht_bound: firoozbakht_bound(k, p)?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_150_matches_printed_threshold() {
        let sb = safe_bound(150, &PiBoundParams::TIGHT).unwrap();
        assert!(
            (sb.x_star - 365_322.7038).abs() < 0.01,
            "x_star = {}",
            sb.x_star
        );
        let (lo, hi) = sb.bracket.unwrap();
        assert!(gap_safety_margin(lo, 150, &PiBoundParams::TIGHT).unwrap() <= 0.0);
        assert!(gap_safety_margin(hi, 150, &PiBoundParams::TIGHT).unwrap() > 0.0);
        assert!(hi - lo <= 1e-6 * sb.x_star);
    }

    #[test]
    fn gap_2_matches_printed_threshold() {
        let sb = safe_bound(2, &PiBoundParams::WIDE).unwrap();
        assert!((sb.x_star - 7.8745).abs() < 1e-3, "x_star = {}", sb.x_star);
    }

    #[test]
    fn floor_already_safe() {
        let params = PiBoundParams::custom_unverified(1.2, 100);
        assert!(gap_safety_margin(100.0, 2, &params).unwrap() > 0.0);
        let sb = safe_bound(2, &params).unwrap();
        assert_eq!(sb.x_star, 100.0);
        assert!(sb.bracket.is_none());
    }

    #[test]
    fn odd_or_tiny_gaps_rejected() {
        assert!(safe_bound(3, &PiBoundParams::WIDE).is_err());
        assert!(safe_bound(0, &PiBoundParams::WIDE).is_err());
    }

    #[test]
    fn small_table_has_expected_cardinality() {
        let t = safe_bound_table(4, &PiBoundParams::WIDE).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t[0].gap, 2);
        assert_eq!(t[1].gap, 4);
    }

    #[test]
    fn forward_safety_sampled() {
        for &(gap, params) in &[(2u64, PiBoundParams::WIDE), (150, PiBoundParams::TIGHT)] {
            let sb = safe_bound(gap, &params).unwrap();
            let lo = sb.threshold();
            let hi = sb.x_star * 1e6;
            for i in 0..1000 {
                let t = (i + 1) as f64 / 1000.0;
                let x = lo * (hi / lo).powf(t);
                let m = gap_safety_margin(x, gap, &params).unwrap();
                assert!(m > 0.0, "gap {gap}: G({x}) = {m} <= 0");
            }
        }
    }

    #[test]
    fn cramer_bound_reference_rows() {
        assert!((cramer_bound(11, None).unwrap() - 19.964).abs() < 0.001);
        assert!((cramer_bound(1_000_003, None).unwrap() - 1_000_193.874).abs() < 0.001);
    }

    #[test]
    fn cramer_bound_residual_self_check() {
        let x = cramer_bound(2, None).unwrap();
        let residual = (x - 2.0 - x.ln().powi(2)).abs();
        assert!(residual <= 1e-12 * x, "residual = {residual}");
    }

    #[test]
    fn firoozbakht_bound_reference_rows() {
        assert!((firoozbakht_bound(5, 11).unwrap() - 17.769).abs() < 0.001);
        assert!((firoozbakht_bound(664_580, 10_000_019).unwrap() - 10_000_261.534).abs() < 0.001);
        assert_eq!(firoozbakht_bound(1, 2).unwrap(), 4.0);
        assert!(firoozbakht_bound(0, 2).is_err());
    }

    #[test]
    fn comparison_table_rows() {
        let cfg = SieveConfig::default();
        let rows = conjecture_bounds_table(&cfg).unwrap();
        assert_eq!(rows.len(), 7);
        let r26 = rows[1];
        assert_eq!((r26.k, r26.p, r26.p_next), (26, 101, 103));
        assert!((r26.cramer_bound - 124.2549).abs() < 0.001);
        assert!((r26.firoozbakht_bound - 120.618).abs() < 0.001);
        let r9593 = rows[4];
        assert_eq!(r9593.p, 100_003);
        assert!((r9593.cramer_bound - 100_135.579).abs() < 0.001);
        assert!((r9593.firoozbakht_bound - 100_123.090).abs() < 0.001);
        for row in &rows {
            assert!(row.firoozbakht_bound > row.p_next as f64, "k = {}", row.k);
            assert!(row.firoozbakht_bound < row.cramer_bound, "k = {}", row.k);
            // Each Cramer value must satisfy its own fixed-point equation.
            let residual =
                (row.cramer_bound - row.p as f64 - row.cramer_bound.ln().powi(2)).abs();
            assert!(residual <= 1e-9 * row.cramer_bound, "k = {}", row.k);
            let ratio = (row.cramer_bound - row.firoozbakht_bound) / (row.p as f64).ln();
            assert!(
                (0.75..1.25).contains(&ratio),
                "k = {}: gap between bounds over ln p = {ratio}", row.k
            );
        }
    }
}
