//! Exact decision of p_{k+1}^k < p_k^{k+1} for a consecutive-prime pair.
//!
//! The fast path compares logarithmic margins in f64 with a certified error
//! bound. Margins inside the error bound escalate to double-double, and
//! anything still ambiguous is settled by arbitrary-precision integer
//! comparison, so the verdict is always exact.

use std::io::Write;
use std::ops::ControlFlow;

use num_bigint::BigUint;

use crate::ddouble::Dd;
use crate::error::{Error, Result};
use crate::primality;
use crate::sieve::{self, SieveConfig};

/// Unit roundoff of f64 (half an epsilon).
const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;

/// Relative accuracy credited to the double-double tier: 2^-90, leaving a
/// wide guard band below its ~2^-104 working precision.
const DD_DECISION_EPS: f64 = 8.077935669463161e-28;

/// Refuse big-integer comparisons past this size (bits of the larger power).
const BIGINT_BIT_CAP: u64 = 1 << 31;

/// A pair of consecutive primes with the 1-based index of the lower one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimePair {
    k: u64,
    p: u64,
    p_next: u64,
}

impl PrimePair {
    /// Validated construction: both endpoints prime, nothing prime between
    /// them, k >= 1. The index itself is trusted from the caller.
    pub fn new(k: u64, p: u64, p_next: u64) -> Result<PrimePair> {
        if k < 1 {
            return Err(Error::domain("pair index k must be >= 1".to_string()));
        }
        if p_next <= p {
            return Err(Error::domain(format!(
                "p_next ({p_next}) must exceed p ({p})"
            )));
        }
        if !primality::is_prime(p) {
            return Err(Error::domain(format!("{p} is not prime")));
        }
        if !primality::is_prime(p_next) {
            return Err(Error::domain(format!("{p_next} is not prime")));
        }
        let mut q = p + 1;
        if q % 2 == 0 {
            q += 1;
        }
        while q < p_next {
            if primality::is_prime(q) {
                return Err(Error::domain(format!(
                    "{p} and {p_next} are not consecutive: {q} is prime"
                )));
            }
            q += 2;
        }
        Ok(PrimePair { k, p, p_next })
    }

    /// Construction without primality re-checks, for pairs coming straight
    /// off the sieve stream.
    pub fn new_unchecked(k: u64, p: u64, p_next: u64) -> PrimePair {
        PrimePair { k, p, p_next }
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn p_next(&self) -> u64 {
        self.p_next
    }

    pub fn gap(&self) -> u64 {
        self.p_next - self.p
    }
}

/// Which tier produced the verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckPath {
    FloatFast,
    HighPrecision,
    ExactBigint,
}

/// Verdict for one pair. `margin` is (k+1) ln p_k - k ln p_{k+1} as
/// reported by the deciding tier; resolution is exact whenever the write-up
/// says `holds`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOutcome {
    pub holds: bool,
    pub margin: f64,
    pub path: CheckPath,
}

/// Escalation policy. `Tiered` is the production ladder; the forcing
/// variants exist so tests can cross-check tiers against each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckPolicy {
    Tiered,
    /// Skip the f64 fast path.
    ForceHighPrecision,
    /// Go straight to the big-integer comparison.
    ForceExact,
}

#[inline]
fn fast_margin(k: u64, p: u64, p_next: u64) -> f64 {
    let pf = p as f64;
    let g = (p_next - p) as f64;
    pf.ln() - (k as f64) * (g / pf).ln_1p()
}

fn dd_margin(k: u64, p: u64, p_next: u64) -> Dd {
    let p_dd = Dd::from_u64(p);
    let g_dd = Dd::from_u64(p_next - p);
    let ratio = g_dd.div(p_dd);
    p_dd.ln().sub(Dd::from_u64(k).mul(ratio.ln1p()))
}

fn bigint_holds(k: u64, p: u64, p_next: u64) -> Result<bool> {
    let kp1 = k
        .checked_add(1)
        .filter(|&e| e <= u32::MAX as u64)
        .ok_or_else(|| {
            Error::range(format!("exponent k+1 = {} too large for exact comparison", k + 1))
        })?;
    let bits = (kp1 as f64) * (p_next as f64).log2();
    if bits > BIGINT_BIT_CAP as f64 {
        return Err(Error::range(format!(
            "exact comparison needs ~{bits:.0} bits; refusing"
        )));
    }
    let lhs = BigUint::from(p_next).pow(k as u32);
    let rhs = BigUint::from(p).pow(kp1 as u32);
    Ok(lhs < rhs)
}

fn decide(k: u64, p: u64, p_next: u64, policy: CheckPolicy) -> Result<CheckOutcome> {
    let margin = fast_margin(k, p, p_next);
    if policy == CheckPolicy::Tiered {
        let err = 64.0 * UNIT_ROUNDOFF * ((k + 1) as f64) * (p_next as f64).ln();
        if margin.abs() > err {
            return Ok(CheckOutcome {
                holds: margin > 0.0,
                margin,
                path: CheckPath::FloatFast,
            });
        }
    }
    if policy != CheckPolicy::ForceExact {
        let m = dd_margin(k, p, p_next);
        let scale = ((k + 1) as f64) * (p_next as f64).ln();
        if m.to_f64().abs() > scale * DD_DECISION_EPS {
            return Ok(CheckOutcome {
                holds: m.is_sign_positive(),
                margin: m.to_f64(),
                path: CheckPath::HighPrecision,
            });
        }
    }
    let holds = bigint_holds(k, p, p_next)?;
    Ok(CheckOutcome {
        holds,
        margin,
        path: CheckPath::ExactBigint,
    })
}

/// Decide the inequality for one pair.
pub fn check_pair(pair: &PrimePair) -> Result<CheckOutcome> {
    decide(pair.k, pair.p, pair.p_next, CheckPolicy::Tiered)
}

/// Decide with an explicit escalation policy.
pub fn check_pair_with_policy(pair: &PrimePair, policy: CheckPolicy) -> Result<CheckOutcome> {
    decide(pair.k, pair.p, pair.p_next, policy)
}

/// p_k^(1/k); display value only, never used for decisions.
pub fn root_value(pair: &PrimePair) -> f64 {
    ((pair.p as f64).ln() / pair.k as f64).exp()
}

/// Right side of the pi form: ln p_k / (ln p_{k+1} - ln p_k), with the
/// denominator evaluated as log1p(g / p_k).
pub fn pi_form_rhs(pair: &PrimePair) -> f64 {
    let pf = pair.p as f64;
    pf.ln() / (pair.gap() as f64 / pf).ln_1p()
}

/// Decide the equivalent pi form: pi(p_k) < ln p_k / (ln p_{k+1} - ln p_k).
/// Requires k to be exactly pi(p_k). Same truth value as [`check_pair`].
pub fn check_pair_pi_form(pair: &PrimePair) -> Result<CheckOutcome> {
    let rhs = pi_form_rhs(pair);
    let kf = pair.k as f64;
    let diff = rhs - kf;
    let err = 64.0 * UNIT_ROUNDOFF * (rhs.abs() + kf);
    let margin = fast_margin(pair.k, pair.p, pair.p_next);
    if diff.abs() > err {
        return Ok(CheckOutcome {
            holds: diff > 0.0,
            margin,
            path: CheckPath::FloatFast,
        });
    }
    let p_dd = Dd::from_u64(pair.p);
    let rhs_dd = p_dd
        .ln()
        .div(Dd::from_u64(pair.gap()).div(p_dd).ln1p());
    let diff_dd = rhs_dd.sub(Dd::from_u64(pair.k));
    if diff_dd.to_f64().abs() > (rhs.abs() + kf) * DD_DECISION_EPS {
        return Ok(CheckOutcome {
            holds: diff_dd.is_sign_positive(),
            margin,
            path: CheckPath::HighPrecision,
        });
    }
    let holds = bigint_holds(pair.k, pair.p, pair.p_next)?;
    Ok(CheckOutcome {
        holds,
        margin,
        path: CheckPath::ExactBigint,
    })
}

/// Result of scanning every pair with p_k below a limit.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanSummary {
    pub limit: u64,
    pub pairs_checked: u64,
    pub all_hold: bool,
    /// First failing pair (k, p, p_next), if any.
    pub failure: Option<(u64, u64, u64)>,
    pub min_margin: f64,
    /// (k, p) where the minimum margin was seen.
    pub min_margin_at: (u64, u64),
    pub high_precision_escalations: u64,
    pub bigint_escalations: u64,
}

impl ScanSummary {
    fn empty(limit: u64) -> ScanSummary {
        ScanSummary {
            limit,
            pairs_checked: 0,
            all_hold: true,
            failure: None,
            min_margin: f64::INFINITY,
            min_margin_at: (0, 0),
            high_precision_escalations: 0,
            bigint_escalations: 0,
        }
    }

    fn absorb(&mut self, k: u64, p: u64, p_next: u64, outcome: &CheckOutcome) -> ControlFlow<()> {
        self.pairs_checked += 1;
        match outcome.path {
            CheckPath::FloatFast => {}
            CheckPath::HighPrecision => self.high_precision_escalations += 1,
            CheckPath::ExactBigint => self.bigint_escalations += 1,
        }
        if outcome.margin < self.min_margin {
            self.min_margin = outcome.margin;
            self.min_margin_at = (k, p);
        }
        if !outcome.holds {
            self.all_hold = false;
            self.failure = Some((k, p, p_next));
            return ControlFlow::Break(());
        }
        ControlFlow::Continue(())
    }
}

/// Check every consecutive pair with p_k < limit; reports the first failure
/// if any, else the pair count and the minimum margin observed.
pub fn direct_scan(limit: u64, cfg: &SieveConfig) -> Result<ScanSummary> {
    #[cfg(feature = "parallel")]
    if cfg.parallel {
        return parallel::direct_scan(limit, cfg);
    }
    direct_scan_sequential(limit, cfg)
}

fn direct_scan_sequential(limit: u64, cfg: &SieveConfig) -> Result<ScanSummary> {
    let mut summary = ScanSummary::empty(limit);
    let mut fatal: Option<Error> = None;
    sieve::for_each_pair(limit, cfg, |k, p, q| match decide(k, p, q, CheckPolicy::Tiered) {
        Ok(outcome) => summary.absorb(k, p, q, &outcome),
        Err(e) => {
            fatal = Some(e);
            ControlFlow::Break(())
        }
    })?;
    if let Some(e) = fatal {
        return Err(e);
    }
    Ok(summary)
}

/// Sequential scan that also writes one table row per pair: k, p, p^(1/k)
/// to nine decimals, and OK or FAILURE.
pub fn direct_scan_emit<W: Write>(limit: u64, cfg: &SieveConfig, out: &mut W) -> Result<ScanSummary> {
    let mut summary = ScanSummary::empty(limit);
    let mut fatal: Option<Error> = None;
    let mut io_err: Option<std::io::Error> = None;
    writeln!(out, "{:>7} {:>9} {:>15} {:>10}", "k", "p", "p^(1/k)", "OK/fail")?;
    sieve::for_each_pair(limit, cfg, |k, p, q| match decide(k, p, q, CheckPolicy::Tiered) {
        Ok(outcome) => {
            let pair = PrimePair::new_unchecked(k, p, q);
            let status = if outcome.holds { "OK" } else { "FAILURE" };
            if let Err(e) = writeln!(
                out,
                "{:>7} {:>9} {:>15.9} {:>10}",
                k,
                p,
                root_value(&pair),
                status
            ) {
                io_err = Some(e);
                return ControlFlow::Break(());
            }
            summary.absorb(k, p, q, &outcome)
        }
        Err(e) => {
            fatal = Some(e);
            ControlFlow::Break(())
        }
    })?;
    if let Some(e) = fatal {
        return Err(e);
    }
    if let Some(e) = io_err {
        return Err(e.into());
    }
    Ok(summary)
}

#[cfg(feature = "parallel")]
mod parallel {
    use super::*;
    use rayon::prelude::*;

    struct SegmentScan {
        first_prime: Option<u64>,
        last_prime: Option<u64>,
        summary: ScanSummary,
    }

    /// Two passes over the segment plan: the first counts primes per
    /// segment so each worker knows the k offset of its segment, the second
    /// checks pairs segment-locally; boundary pairs are stitched by an
    /// in-order reduce.
    pub(super) fn direct_scan(limit: u64, cfg: &SieveConfig) -> Result<ScanSummary> {
        if limit < 3 {
            return Err(Error::domain(format!(
                "pair scan needs limit >= 3, got {limit}"
            )));
        }
        cfg.check_budget(limit)?;
        let plan = sieve::plan_range(3, limit - 1, cfg)?;
        let counts: Vec<u64> = (0..plan.len())
            .into_par_iter()
            .map(|i| plan.sieve(i).prime_count())
            .collect();
        // prefix[i] = primes before segment i, including the prime 2.
        let mut prefix = Vec::with_capacity(plan.len() + 1);
        let mut acc = 1u64;
        for &c in &counts {
            prefix.push(acc);
            acc += c;
        }
        prefix.push(acc);

        let scans: Vec<Result<SegmentScan>> = (0..plan.len())
            .into_par_iter()
            .map(|i| scan_segment(&plan, i, prefix[i], limit))
            .collect();

        let mut merged = ScanSummary::empty(limit);
        let mut prev: (u64, u64) = (2, 1); // (prime, its index)
        for scan in scans {
            let scan = scan?;
            if merged.failure.is_some() {
                break;
            }
            if let Some(first) = scan.first_prime {
                let outcome = decide(prev.1, prev.0, first, CheckPolicy::Tiered)?;
                if merged.absorb(prev.1, prev.0, first, &outcome).is_break() {
                    break;
                }
            } else {
                continue;
            }
            merge(&mut merged, &scan.summary);
            if merged.failure.is_some() {
                break;
            }
            let seg_count = scan.summary.pairs_checked + 1;
            prev = (scan.last_prime.unwrap(), prev.1 + seg_count);
        }
        if merged.failure.is_none() {
            let q = primality::next_prime(prev.0)
                .ok_or_else(|| Error::range("next prime exceeds u64".to_string()))?;
            let outcome = decide(prev.1, prev.0, q, CheckPolicy::Tiered)?;
            let _ = merged.absorb(prev.1, prev.0, q, &outcome);
        }
        Ok(merged)
    }

    fn scan_segment(
        plan: &sieve::Plan,
        idx: usize,
        k_offset: u64,
        limit: u64,
    ) -> Result<SegmentScan> {
        let seg = plan.sieve(idx);
        let mut summary = ScanSummary::empty(limit);
        let mut first_prime = None;
        let mut prev: Option<u64> = None;
        let mut k = k_offset;
        for q in seg.iter_primes() {
            if let Some(p) = prev {
                let outcome = decide(k, p, q, CheckPolicy::Tiered)?;
                if summary.absorb(k, p, q, &outcome).is_break() {
                    return Ok(SegmentScan {
                        first_prime,
                        last_prime: Some(q),
                        summary,
                    });
                }
            } else {
                first_prime = Some(q);
            }
            k += 1;
            prev = Some(q);
        }
        Ok(SegmentScan {
            first_prime,
            last_prime: prev,
            summary,
        })
    }

    fn merge(into: &mut ScanSummary, seg: &ScanSummary) {
        into.pairs_checked += seg.pairs_checked;
        into.high_precision_escalations += seg.high_precision_escalations;
        into.bigint_escalations += seg.bigint_escalations;
        if seg.min_margin < into.min_margin {
            into.min_margin = seg.min_margin;
            into.min_margin_at = seg.min_margin_at;
        }
        if !seg.all_hold {
            into.all_hold = false;
            into.failure = seg.failure;
        }
    }
}
