//! Explicit upper bounds for the prime-counting function of the form
//! pi(x) < x / (ln x - c), plus exhaustive empirical validation against
//! exact counts from the sieve.

use crate::error::{Error, Result};
use crate::sieve::{self, SieveConfig};

/// Parameters of one x/(ln x - c) bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiBoundParams {
    pub c: f64,
    /// Smallest x for which the bound is proven.
    pub x_min: u64,
    /// False for caller-supplied (c, x_min) pairs, which are accepted for
    /// experimentation but carry no guarantee.
    pub verified: bool,
}

impl PiBoundParams {
    /// pi(x) < x/(ln x - 1.1) for x >= 60184.
    pub const TIGHT: PiBoundParams = PiBoundParams {
        c: 1.1,
        x_min: 60184,
        verified: true,
    };

    /// pi(x) < x/(ln x - 1.2) for x >= 4.
    pub const WIDE: PiBoundParams = PiBoundParams {
        c: 1.2,
        x_min: 4,
        verified: true,
    };

    /// The built-in preset with the given constant, if any.
    pub fn preset(c: f64) -> Option<PiBoundParams> {
        if c == 1.1 {
            Some(Self::TIGHT)
        } else if c == 1.2 {
            Some(Self::WIDE)
        } else {
            None
        }
    }

    /// An arbitrary (c, x_min) pair, marked unverified.
    pub fn custom_unverified(c: f64, x_min: u64) -> PiBoundParams {
        PiBoundParams {
            c,
            x_min,
            verified: false,
        }
    }
}

/// Direction applied to the last bits of the bound evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rounding {
    Nearest,
    /// Four ulps up: the result can never round below the exact real value,
    /// so it stays a sound majorant of pi.
    Upward,
    /// Four ulps down; used when validating the bound empirically so that a
    /// pass certifies the true inequality.
    Downward,
}

fn nudge(v: f64, rounding: Rounding) -> f64 {
    match rounding {
        Rounding::Nearest => v,
        Rounding::Upward => v.next_up().next_up().next_up().next_up(),
        Rounding::Downward => v.next_down().next_down().next_down().next_down(),
    }
}

/// Evaluate x / (ln x - c).
pub fn pi_upper(x: f64, params: &PiBoundParams, rounding: Rounding) -> Result<f64> {
    if x < params.x_min as f64 {
        return Err(Error::domain(format!(
            "x = {x} is below the bound's validity threshold x_min = {}",
            params.x_min
        )));
    }
    let denom = x.ln() - params.c;
    if denom <= 0.0 {
        return Err(Error::domain(format!(
            "singularity: ln x <= c at x = {x}, c = {}",
            params.c
        )));
    }
    Ok(nudge(x / denom, rounding))
}

/// Outcome of checking pi(x) < x/(ln x - c) for every integer x in
/// [x_min, limit].
#[derive(Debug, Clone, PartialEq)]
pub struct PiBoundCheck {
    pub holds: bool,
    pub checked: u64,
    /// Smallest violating x with its exact count and bound value; the bound
    /// value is NaN when the bound was singular at x.
    pub counterexample: Option<(u64, u64, f64)>,
}

/// Exhaustively validate the bound against exact pi from the sieve.
pub fn verify_pi_bound_small(
    limit: u64,
    params: &PiBoundParams,
    cfg: &SieveConfig,
) -> Result<PiBoundCheck> {
    cfg.check_budget(limit)?;
    let start = params.x_min.max(1);
    if start > limit {
        return Err(Error::domain(format!(
            "empty check range: x_min = {start} exceeds limit = {limit}"
        )));
    }
    let mut pi = sieve::prime_count(start.saturating_sub(1), cfg)?;
    let mut upcoming = sieve::primes_in_range(start.max(2), limit, cfg)?;
    let mut next_p = upcoming.next();
    let mut checked = 0u64;
    let mut counterexample = None;
    for x in start..=limit {
        if next_p == Some(x) {
            pi += 1;
            next_p = upcoming.next();
        }
        checked += 1;
        match pi_upper(x as f64, params, Rounding::Downward) {
            Ok(bound) => {
                if (pi as f64) >= bound {
                    counterexample = Some((x, pi, bound));
                    break;
                }
            }
            Err(_) => {
                counterexample = Some((x, pi, f64::NAN));
                break;
            }
        }
    }
    Ok(PiBoundCheck {
        holds: counterexample.is_none(),
        checked,
        counterexample,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ddouble::Dd;

    #[test]
    fn denominator_exactly_one() {
        let x = (2.2f64).exp();
        let params = PiBoundParams::custom_unverified(1.2, 4);
        let got = pi_upper(x, &params, Rounding::Nearest).unwrap();
        assert!((got - x).abs() <= 4.0 * f64::EPSILON * x, "got {got}, x {x}");
    }

    #[test]
    fn high_precision_reference_at_threshold() {
        // 60184/(ln 60184 - c), c the f64 closest to 1.1, evaluated with
        // 50-digit decimal arithmetic: 6076.0239077973513621531...
        let got = pi_upper(60184.0, &PiBoundParams::TIGHT, Rounding::Nearest).unwrap();
        let want = 6076.023907797351;
        assert!(
            (got - want).abs() / want < 1e-12,
            "12 significant digits required, got {got}"
        );
    }

    #[test]
    fn bound_dominates_pi_at_one_million() {
        let got = pi_upper(1_000_000.0, &PiBoundParams::WIDE, Rounding::Nearest).unwrap();
        assert!(got > 78_498.0);
    }

    #[test]
    fn domain_errors_name_threshold() {
        let err = pi_upper(100.0, &PiBoundParams::TIGHT, Rounding::Nearest).unwrap_err();
        assert!(err.to_string().contains("60184"));
        let singular =
            pi_upper(2.0, &PiBoundParams::custom_unverified(1.2, 1), Rounding::Nearest)
                .unwrap_err();
        assert!(singular.to_string().contains("singularity"));
    }

    #[test]
    fn check_small_range_wide() {
        let cfg = SieveConfig::default();
        let res = verify_pi_bound_small(100_000, &PiBoundParams::WIDE, &cfg).unwrap();
        assert!(res.holds, "counterexample: {:?}", res.counterexample);
        assert_eq!(res.checked, 100_000 - 4 + 1);
    }

    #[test]
    fn forced_floor_reports_singularity_as_counterexample() {
        let cfg = SieveConfig::default();
        let params = PiBoundParams::custom_unverified(1.2, 1);
        let res = verify_pi_bound_small(100_000, &params, &cfg).unwrap();
        assert!(!res.holds);
        let (x, _, bound) = res.counterexample.unwrap();
        assert!(x <= 3, "counterexample must appear at x <= 3, got {x}");
        assert!(bound.is_nan());
    }

    #[test]
    fn wider_constant_gives_larger_bound() {
        for &x in &[4.0f64, 10.0, 100.0, 60184.0, 1e6, 1e12] {
            let lo = pi_upper(x, &PiBoundParams::custom_unverified(1.1, 4), Rounding::Nearest);
            let hi = pi_upper(x, &PiBoundParams::custom_unverified(1.2, 4), Rounding::Nearest);
            match (lo, hi) {
                (Ok(lo), Ok(hi)) => assert!(hi > lo, "x = {x}"),
                _ => assert!(x < 4.0),
            }
        }
    }

    #[test]
    fn upward_mode_never_below_exact() {
        // dd oracle over a deterministic pseudo-random sample.
        let mut state = 0x9E3779B97F4A7C15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for _ in 0..10_000 {
            let x = 4 + next() % 1_000_000_000;
            let params = PiBoundParams::WIDE;
            let up = pi_upper(x as f64, &params, Rounding::Upward).unwrap();
            let exact = Dd::from_u64(x)
                .div(Dd::from_u64(x).ln().sub(Dd::from_f64(params.c)));
            let diff = Dd::from_f64(up).sub(exact).to_f64();
            assert!(diff >= 0.0, "x = {x}: upward result below exact by {diff}");
        }
    }
}
