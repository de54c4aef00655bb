//! Segmented sieve of Eratosthenes over 64-bit ranges.
//!
//! Composites are tracked in an odd-only bitset per segment; base primes up
//! to sqrt(hi) are computed once per run. Segments are independent work
//! units: with the `parallel` feature they are sieved by a rayon pool while
//! a single-threaded reducer consumes them in increasing order, so every
//! public operation is deterministic regardless of thread count.

use std::collections::BTreeMap;
use std::ops::ControlFlow;

use crate::error::{Error, Result};
use crate::primality;

/// Default number of odd entries per segment (bitset of 512 KiB).
pub const DEFAULT_SEGMENT_LEN: usize = 1 << 22;

/// Default ceiling for full-sieve operations.
pub const DEFAULT_BUDGET: u64 = 400_000_000_000;

/// Largest `hi` accepted by range sieving; keeps segment arithmetic clear
/// of u64 wrap-around.
const WORKING_LIMIT: u64 = 1 << 62;

#[derive(Debug, Clone)]
pub struct SieveConfig {
    /// Odd entries per segment. The CLI restricts this to powers of two.
    pub segment_len: usize,
    /// Largest limit accepted by full-scan operations.
    pub budget: u64,
    /// Sieve segments on the rayon pool (no effect without the `parallel`
    /// feature).
    pub parallel: bool,
}

impl Default for SieveConfig {
    fn default() -> Self {
        SieveConfig {
            segment_len: DEFAULT_SEGMENT_LEN,
            budget: DEFAULT_BUDGET,
            parallel: true,
        }
    }
}

impl SieveConfig {
    pub fn with_segment_len(segment_len: usize) -> Self {
        SieveConfig {
            segment_len,
            ..Self::default()
        }
    }

    pub(crate) fn check_budget(&self, requested: u64) -> Result<()> {
        if requested > self.budget {
            return Err(Error::SieveBudget {
                requested,
                budget: self.budget,
            });
        }
        Ok(())
    }
}

/// One sieved segment: a composite mask over the odd integers in
/// [`lo()`, `hi()`]. A clear bit means prime.
pub struct SieveSegment {
    lo: u64,
    count: usize,
    mask: Vec<u64>,
}

impl SieveSegment {
    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.lo + 2 * (self.count as u64 - 1)
    }

    /// Primes in this segment, ascending.
    pub fn iter_primes(&self) -> impl Iterator<Item = u64> + '_ {
        let lo = self.lo;
        self.mask.iter().enumerate().flat_map(move |(wi, &w)| {
            ClearBits {
                inv: !w,
                base: wi * 64,
            }
            .map(move |idx| lo + 2 * idx as u64)
        })
    }

    /// Number of primes in the segment.
    pub fn prime_count(&self) -> u64 {
        let bits = self.mask.len() as u64 * 64;
        bits - self.mask.iter().map(|w| w.count_ones() as u64).sum::<u64>()
    }
}

/// Iterator over clear bits of one inverted mask word.
struct ClearBits {
    inv: u64,
    base: usize,
}

impl Iterator for ClearBits {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.inv == 0 {
            return None;
        }
        let tz = self.inv.trailing_zeros() as usize;
        self.inv &= self.inv - 1;
        Some(self.base + tz)
    }
}

fn isqrt(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut r = (n as f64).sqrt() as u64;
    while (r as u128) * (r as u128) > n as u128 {
        r -= 1;
    }
    while ((r + 1) as u128) * ((r + 1) as u128) <= n as u128 {
        r += 1;
    }
    r
}

/// Odd primes in [3, limit] by a plain sieve; used for base primes.
fn simple_odd_primes(limit: u64) -> Vec<u64> {
    if limit < 3 {
        return Vec::new();
    }
    let n = ((limit - 3) / 2 + 1) as usize;
    let mut composite = vec![false; n];
    let mut i = 0usize;
    loop {
        let p = 3 + 2 * i as u64;
        if p * p > limit {
            break;
        }
        if !composite[i] {
            let mut j = ((p * p - 3) / 2) as usize;
            while j < n {
                composite[j] = true;
                j += p as usize;
            }
        }
        i += 1;
    }
    composite
        .iter()
        .enumerate()
        .filter(|(_, &c)| !c)
        .map(|(i, _)| 3 + 2 * i as u64)
        .collect()
}

/// Precomputed segmentation of an odd range plus the shared base primes.
pub(crate) struct Plan {
    /// (odd lo, odd count) per segment, ascending.
    segs: Vec<(u64, usize)>,
    base: Vec<u64>,
}

impl Plan {
    /// Covers all odd integers in [lo, hi]. Empty plan when the range
    /// contains none.
    fn new(lo: u64, hi: u64, cfg: &SieveConfig) -> Result<Plan> {
        if hi > WORKING_LIMIT {
            return Err(Error::range(format!(
                "upper bound {hi} exceeds the working limit {WORKING_LIMIT}"
            )));
        }
        let seg_len = cfg.segment_len.max(64) as u64;
        let first = lo.max(3) | 1;
        let mut segs = Vec::new();
        let mut cur = first;
        while cur <= hi {
            let remaining = (hi - cur) / 2 + 1;
            let count = remaining.min(seg_len) as usize;
            segs.push((cur, count));
            cur += 2 * count as u64;
        }
        let base = simple_odd_primes(isqrt(hi));
        Ok(Plan { segs, base })
    }

    /// Sieve segment `i`. Pure; safe to call from any thread.
    pub(crate) fn sieve(&self, i: usize) -> SieveSegment {
        let (lo, count) = self.segs[i];
        let words = count.div_ceil(64);
        let mut mask = vec![0u64; words];
        let seg_hi = lo + 2 * (count as u64 - 1);
        for &p in &self.base {
            let p2 = p * p;
            if p2 > seg_hi {
                break;
            }
            let m = if p2 >= lo {
                p2
            } else {
                let q = lo.div_ceil(p);
                let q = if q % 2 == 0 { q + 1 } else { q };
                q * p
            };
            let mut idx = ((m - lo) / 2) as usize;
            while idx < count {
                mask[idx >> 6] |= 1 << (idx & 63);
                idx += p as usize;
            }
        }
        // Tail bits past `count` are marked composite so popcounts and
        // clear-bit walks need no length fix-ups.
        for idx in count..words * 64 {
            mask[idx >> 6] |= 1 << (idx & 63);
        }
        SieveSegment { lo, count, mask }
    }

    pub(crate) fn len(&self) -> usize {
        self.segs.len()
    }
}

/// Segment plan over the odd integers in [lo, hi], for callers that drive
/// their own two-pass scans.
#[cfg_attr(not(feature = "parallel"), allow(dead_code))]
pub(crate) fn plan_range(lo: u64, hi: u64, cfg: &SieveConfig) -> Result<Plan> {
    Plan::new(lo, hi, cfg)
}

fn drive_sequential<F>(plan: &Plan, mut consume: F)
where
    F: FnMut(&SieveSegment) -> ControlFlow<()>,
{
    for i in 0..plan.len() {
        let seg = plan.sieve(i);
        if consume(&seg).is_break() {
            return;
        }
    }
}

#[cfg(feature = "parallel")]
fn drive_parallel<F>(plan: &Plan, mut consume: F)
where
    F: FnMut(&SieveSegment) -> ControlFlow<()>,
{
    use rayon::prelude::*;

    let batch = rayon::current_num_threads().max(1) * 4;
    let mut start = 0;
    while start < plan.len() {
        let end = (start + batch).min(plan.len());
        let segs: Vec<SieveSegment> = (start..end).into_par_iter().map(|i| plan.sieve(i)).collect();
        for seg in &segs {
            if consume(seg).is_break() {
                return;
            }
        }
        start = end;
    }
}

/// Sieve all odd integers in [lo, hi], handing segments to `consume` in
/// increasing order. Parallel mask computation when enabled; the consumer
/// always runs on the calling thread.
pub(crate) fn drive_segments<F>(lo: u64, hi: u64, cfg: &SieveConfig, consume: F) -> Result<()>
where
    F: FnMut(&SieveSegment) -> ControlFlow<()>,
{
    if lo > hi {
        return Ok(());
    }
    let plan = Plan::new(lo, hi, cfg)?;
    #[cfg(feature = "parallel")]
    if cfg.parallel {
        drive_parallel(&plan, consume);
        return Ok(());
    }
    drive_sequential(&plan, consume);
    Ok(())
}

/// Ordered stream of the primes in [lo, hi] (inclusive).
pub fn primes_in_range(lo: u64, hi: u64, cfg: &SieveConfig) -> Result<PrimeStream> {
    if hi < lo {
        return Err(Error::domain(format!(
            "invalid range: hi ({hi}) < lo ({lo})"
        )));
    }
    if lo < 2 {
        return Err(Error::domain(format!("range must start at 2 or above, got {lo}")));
    }
    let plan = Plan::new(lo, hi, cfg)?;
    Ok(PrimeStream {
        plan,
        next_seg: 0,
        buf: std::collections::VecDeque::new(),
        pending_two: lo <= 2,
    })
}

/// Lazy segment-at-a-time prime iterator returned by [`primes_in_range`].
pub struct PrimeStream {
    plan: Plan,
    next_seg: usize,
    buf: std::collections::VecDeque<u64>,
    pending_two: bool,
}

impl Iterator for PrimeStream {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if self.pending_two {
            self.pending_two = false;
            return Some(2);
        }
        while self.buf.is_empty() {
            if self.next_seg >= self.plan.len() {
                return None;
            }
            let seg = self.plan.sieve(self.next_seg);
            self.next_seg += 1;
            self.buf.extend(seg.iter_primes());
        }
        self.buf.pop_front()
    }
}

/// Exact prime-counting function pi(n).
pub fn prime_count(n: u64, cfg: &SieveConfig) -> Result<u64> {
    cfg.check_budget(n)?;
    if n < 2 {
        return Ok(0);
    }
    let mut count = 1; // the prime 2
    drive_segments(3, n, cfg, |seg| {
        count += seg.prime_count();
        ControlFlow::Continue(())
    })?;
    Ok(count)
}

/// Walk every consecutive-prime pair (p, p_next) with p < limit, in order,
/// passing the 1-based index k of p (p_1 = 2). The successor of the last
/// prime below `limit` is located even when it falls at or beyond `limit`.
pub fn for_each_pair<F>(limit: u64, cfg: &SieveConfig, mut f: F) -> Result<()>
where
    F: FnMut(u64, u64, u64) -> ControlFlow<()>,
{
    if limit < 3 {
        return Err(Error::domain(format!(
            "pair scan needs limit >= 3, got {limit}"
        )));
    }
    cfg.check_budget(limit)?;
    let mut prev = 2u64;
    let mut k = 0u64;
    let mut stopped = false;
    drive_segments(3, limit - 1, cfg, |seg| {
        for q in seg.iter_primes() {
            k += 1;
            if f(k, prev, q).is_break() {
                stopped = true;
                return ControlFlow::Break(());
            }
            prev = q;
        }
        ControlFlow::Continue(())
    })?;
    if !stopped {
        let q = primality::next_prime(prev)
            .ok_or_else(|| Error::range("next prime exceeds u64".to_string()))?;
        k += 1;
        let _ = f(k, prev, q);
    }
    Ok(())
}

/// A prime gap, anchored at the prime that opens it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GapRecord {
    pub gap: u64,
    pub start_prime: u64,
    /// True when no earlier pair below the scan limit has the same gap.
    pub first_occurrence: bool,
    /// True when the gap exceeds every gap between smaller primes.
    pub maximal: bool,
}

/// First occurrence of every distinct gap size realized below `limit`
/// (start prime < limit), sorted by gap ascending, with maximal-gap flags
/// assigned by the running-maximum rule.
pub fn scan_gaps(limit: u64, cfg: &SieveConfig) -> Result<Vec<GapRecord>> {
    if limit < 3 {
        return Err(Error::domain(format!(
            "gap scan needs limit >= 3, got {limit}"
        )));
    }
    let mut first: BTreeMap<u64, (u64, bool)> = BTreeMap::new();
    let mut running_max = 0u64;
    for_each_pair(limit, cfg, |_, p, q| {
        let gap = q - p;
        let maximal = gap > running_max;
        if maximal {
            running_max = gap;
        }
        first.entry(gap).or_insert((p, maximal));
        ControlFlow::Continue(())
    })?;
    Ok(first
        .into_iter()
        .map(|(gap, (start_prime, maximal))| GapRecord {
            gap,
            start_prime,
            first_occurrence: true,
            maximal,
        })
        .collect())
}

/// The largest gap whose start prime is below `limit`.
pub fn max_gap_below(limit: u64, cfg: &SieveConfig) -> Result<GapRecord> {
    if limit < 5 {
        return Err(Error::domain(format!(
            "max-gap scan needs limit >= 5, got {limit}"
        )));
    }
    let mut best: Option<(u64, u64)> = None;
    for_each_pair(limit, cfg, |_, p, q| {
        let gap = q - p;
        if best.map_or(true, |(g, _)| gap > g) {
            best = Some((gap, p));
        }
        ControlFlow::Continue(())
    })?;
    let (gap, start_prime) = best.expect("limit >= 5 yields at least two pairs");
    Ok(GapRecord {
        gap,
        start_prime,
        first_occurrence: true,
        maximal: true,
    })
}
