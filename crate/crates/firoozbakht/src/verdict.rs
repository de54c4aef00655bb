//! Per-gap-size safety decisions and the whole-range verification pipeline.
//!
//! A gap size g is safe when no pair of consecutive primes (p, p+g) with
//! p at or below the safe bound exists (first occurrence above threshold,
//! or no occurrence below the catalog coverage), or when every such pair
//! has been checked exactly. A verification run settles every even gap
//! size occurring below the limit, plus the unique odd gap (2, 3) and an
//! independent direct scan of all pairs below the million floor.

use std::ops::ControlFlow;
use std::time::Duration;

use crate::catalog::Catalog;
use crate::error::{Error, Result};
use crate::exact::{self, CheckOutcome, PrimePair, ScanSummary};
use crate::pi_bounds::PiBoundParams;
use crate::safe_bounds::{safe_bound, SafeBound};
use crate::sieve::{self, SieveConfig};

/// Direct scan floor asserted by every verification run.
const DIRECT_FLOOR: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictStatus {
    SafeByFirstOccurrence,
    SafeAfterDirectCheck,
    Violation,
    Inconclusive,
}

impl VerdictStatus {
    pub fn is_safe(self) -> bool {
        matches!(
            self,
            VerdictStatus::SafeByFirstOccurrence | VerdictStatus::SafeAfterDirectCheck
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            VerdictStatus::SafeByFirstOccurrence => "safe_by_first_occurrence",
            VerdictStatus::SafeAfterDirectCheck => "safe_after_direct_check",
            VerdictStatus::Violation => "violation",
            VerdictStatus::Inconclusive => "inconclusive",
        }
    }
}

/// Outcome of the pipeline for one gap size.
#[derive(Debug, Clone)]
pub struct GapVerdict {
    pub gap: u64,
    pub safe_bound: SafeBound,
    pub first_occurrence: Option<u64>,
    pub status: VerdictStatus,
    /// Every pair with this gap found at or below the threshold, with its
    /// exact check result.
    pub directly_checked: Vec<(PrimePair, CheckOutcome)>,
    /// The counterexample, when status is Violation.
    pub violation: Option<PrimePair>,
    /// (first_occurrence - x_star) / x_star when safe by a cataloged entry;
    /// surfaces how close the call was.
    pub slack: Option<f64>,
    /// Reason when status is Inconclusive.
    pub note: Option<String>,
}

/// Decide one gap size against the catalog.
pub fn verdict_for_gap(
    gap: u64,
    catalog: &Catalog,
    params: &PiBoundParams,
    cfg: &SieveConfig,
) -> Result<GapVerdict> {
    let sb = safe_bound(gap, params)?;
    verdict_at_threshold(sb, catalog, cfg, exact::check_pair)
}

/// Decision core, parameterized over the threshold (already solved) and the
/// pair checker; exposed so stability and fault-injection tests can drive
/// it directly.
pub fn verdict_at_threshold(
    sb: SafeBound,
    catalog: &Catalog,
    cfg: &SieveConfig,
    checker: impl Fn(&PrimePair) -> Result<CheckOutcome>,
) -> Result<GapVerdict> {
    let gap = sb.gap;
    let threshold = sb.threshold();
    let first = catalog.first_occurrence(gap)?;

    match first {
        Some(start) if (start as f64) > threshold => {
            return Ok(GapVerdict {
                gap,
                safe_bound: sb,
                first_occurrence: first,
                status: VerdictStatus::SafeByFirstOccurrence,
                directly_checked: Vec::new(),
                violation: None,
                slack: Some((start as f64 - sb.x_star) / sb.x_star),
                note: None,
            });
        }
        None => {
            // No occurrence below the coverage limit; only conclusive when
            // the coverage actually reaches the threshold.
            if (catalog.coverage_limit as f64) > threshold {
                return Ok(GapVerdict {
                    gap,
                    safe_bound: sb,
                    first_occurrence: None,
                    status: VerdictStatus::SafeByFirstOccurrence,
                    directly_checked: Vec::new(),
                    violation: None,
                    slack: None,
                    note: None,
                });
            }
            return Ok(GapVerdict {
                gap,
                safe_bound: sb,
                first_occurrence: None,
                status: VerdictStatus::Inconclusive,
                directly_checked: Vec::new(),
                violation: None,
                slack: None,
                note: Some(format!(
                    "catalog coverage {} does not reach the safe bound {threshold}",
                    catalog.coverage_limit
                )),
            });
        }
        Some(_) => {}
    }

    // A first occurrence at or below the threshold: enumerate and check
    // every pair with this exact gap up to the threshold.
    if threshold > cfg.budget as f64 {
        return Ok(GapVerdict {
            gap,
            safe_bound: sb,
            first_occurrence: first,
            status: VerdictStatus::Inconclusive,
            directly_checked: Vec::new(),
            violation: None,
            slack: None,
            note: Some(format!(
                "direct check requires sieving to {:.0}, beyond the budget {}",
                threshold, cfg.budget
            )),
        });
    }
    let scan_limit = (threshold.floor() as u64).saturating_add(1).max(3);
    let mut checked: Vec<(PrimePair, CheckOutcome)> = Vec::new();
    let mut violation = None;
    let mut fatal: Option<Error> = None;
    sieve::for_each_pair(scan_limit, cfg, |k, p, q| {
        if q - p != gap {
            return ControlFlow::Continue(());
        }
        let pair = PrimePair::new_unchecked(k, p, q);
        match checker(&pair) {
            Ok(outcome) => {
                let failed = !outcome.holds;
                checked.push((pair, outcome));
                if failed {
                    violation = Some(pair);
                    return ControlFlow::Break(());
                }
                ControlFlow::Continue(())
            }
            Err(e) => {
                fatal = Some(e);
                ControlFlow::Break(())
            }
        }
    })?;
    if let Some(e) = fatal {
        return Err(e);
    }
    let status = if violation.is_some() {
        VerdictStatus::Violation
    } else {
        VerdictStatus::SafeAfterDirectCheck
    };
    Ok(GapVerdict {
        gap,
        safe_bound: sb,
        first_occurrence: first,
        status,
        directly_checked: checked,
        violation,
        slack: None,
        note: None,
    })
}

/// Aggregate result of a verification run.
#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub limit: u64,
    pub c: f64,
    pub x_min: u64,
    pub coverage_limit: u64,
    pub catalog_entries: usize,
    pub g_max: u64,
    pub floor_scan: ScanSummary,
    /// Exact check of the unique odd-gap pair (2, 3).
    pub first_pair: CheckOutcome,
    pub verdicts: Vec<GapVerdict>,
    pub theorem_established: bool,
    /// Wall-clock time; never part of the machine-readable body.
    pub elapsed: Duration,
}

impl VerificationReport {
    pub fn count(&self, status: VerdictStatus) -> usize {
        self.verdicts.iter().filter(|v| v.status == status).count()
    }

    pub fn direct_pairs_checked(&self) -> usize {
        self.verdicts.iter().map(|v| v.directly_checked.len()).sum()
    }

    /// The tightest relative slack among catalog-settled gaps, for
    /// close-call inspection.
    pub fn min_slack(&self) -> Option<(u64, f64)> {
        self.verdicts
            .iter()
            .filter_map(|v| v.slack.map(|s| (v.gap, s)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Deterministic line-delimited records; field order is stable and no
    /// timing is included.
    pub fn render_records(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "report limit={} c={} x_min={} coverage={} catalog_entries={} g_max={} theorem={}\n",
            self.limit,
            self.c,
            self.x_min,
            self.coverage_limit,
            self.catalog_entries,
            self.g_max,
            self.theorem_established
        ));
        out.push_str(&format!(
            "floor limit={} pairs={} all_hold={} min_margin={} min_at_k={} min_at_p={}\n",
            self.floor_scan.limit,
            self.floor_scan.pairs_checked,
            self.floor_scan.all_hold,
            self.floor_scan.min_margin,
            self.floor_scan.min_margin_at.0,
            self.floor_scan.min_margin_at.1
        ));
        out.push_str(&format!(
            "pair k=1 p=2 p_next=3 holds={}\n",
            self.first_pair.holds
        ));
        for v in &self.verdicts {
            out.push_str(&render_verdict_record(v));
            out.push('\n');
        }
        out
    }

    /// Human-readable summary (includes timing).
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("verification up to {}\n", self.limit));
        out.push_str(&format!(
            "  pi bound         x/(ln x - {}) for x >= {}\n",
            self.c, self.x_min
        ));
        out.push_str(&format!(
            "  catalog          {} entries, coverage {}\n",
            self.catalog_entries, self.coverage_limit
        ));
        out.push_str(&format!(
            "  direct floor     {} pairs below {} all hold; min margin {:.9} at k={} (p={})\n",
            self.floor_scan.pairs_checked,
            self.floor_scan.limit,
            self.floor_scan.min_margin,
            self.floor_scan.min_margin_at.0,
            self.floor_scan.min_margin_at.1
        ));
        out.push_str(&format!(
            "  gap of 1         pair (2, 3) {}\n",
            if self.first_pair.holds { "holds" } else { "FAILS" }
        ));
        out.push_str(&format!(
            "  even gaps        {} sizes up to {}\n",
            self.verdicts.len(),
            self.g_max
        ));
        out.push_str(&format!(
            "    safe by first occurrence  {}\n",
            self.count(VerdictStatus::SafeByFirstOccurrence)
        ));
        out.push_str(&format!(
            "    safe after direct check   {} ({} pairs checked exactly)\n",
            self.count(VerdictStatus::SafeAfterDirectCheck),
            self.direct_pairs_checked()
        ));
        let violations = self.count(VerdictStatus::Violation);
        let inconclusive = self.count(VerdictStatus::Inconclusive);
        out.push_str(&format!("    violations                {violations}\n"));
        out.push_str(&format!("    inconclusive              {inconclusive}\n"));
        for v in &self.verdicts {
            match v.status {
                VerdictStatus::Violation => {
                    if let Some(pair) = v.violation {
                        out.push_str(&format!(
                            "    COUNTEREXAMPLE gap {}: k={} p={} p_next={}\n",
                            v.gap,
                            pair.k(),
                            pair.p(),
                            pair.p_next()
                        ));
                    }
                }
                VerdictStatus::Inconclusive => {
                    out.push_str(&format!(
                        "    inconclusive gap {}: {}\n",
                        v.gap,
                        v.note.as_deref().unwrap_or("-")
                    ));
                }
                _ => {}
            }
        }
        if let Some((gap, slack)) = self.min_slack() {
            out.push_str(&format!(
                "  closest call     gap {gap}: first occurrence exceeds threshold by {:.3}x relative slack\n",
                slack
            ));
        }
        out.push_str(&format!(
            "  theorem          {}\n",
            if self.theorem_established {
                "ESTABLISHED"
            } else {
                "NOT ESTABLISHED"
            }
        ));
        out.push_str(&format!("  elapsed          {:.3?}\n", self.elapsed));
        out
    }
}

fn render_verdict_record(v: &GapVerdict) -> String {
    let first = v
        .first_occurrence
        .map(|p| p.to_string())
        .unwrap_or_else(|| "-".to_string());
    let slack = v
        .slack
        .map(|s| s.to_string())
        .unwrap_or_else(|| "-".to_string());
    let violation = v
        .violation
        .map(|p| format!("{}:{}:{}", p.k(), p.p(), p.p_next()))
        .unwrap_or_else(|| "-".to_string());
    format!(
        "verdict gap={} c={} x_min={} x_star={} first_occurrence={} status={} checked={} violation={} slack={}",
        v.gap,
        v.safe_bound.c,
        v.safe_bound.x_min,
        v.safe_bound.x_star,
        first,
        v.status.as_str(),
        v.directly_checked.len(),
        violation,
        slack
    )
}

/// Run the whole pipeline: catalog-derived maximum gap, per-gap verdicts,
/// the direct floor scan, and the (2, 3) check.
pub fn run_theorem(
    limit: u64,
    catalog: &Catalog,
    params: &PiBoundParams,
    cfg: &SieveConfig,
) -> Result<VerificationReport> {
    let start = std::time::Instant::now();
    if limit < 5 {
        return Err(Error::domain(format!(
            "verification needs limit >= 5, got {limit}"
        )));
    }
    if catalog.coverage_limit < limit {
        return Err(Error::CoverageShortfall {
            coverage: catalog.coverage_limit,
            requested: limit,
        });
    }
    let g_max = catalog.max_gap_with_start_below(limit).ok_or_else(|| {
        Error::domain(format!("catalog has no entries below the limit {limit}"))
    })?;
    if limit <= cfg.budget {
        let sieved = sieve::max_gap_below(limit, cfg)?;
        if sieved.gap != g_max {
            return Err(Error::domain(format!(
                "catalog says the largest gap below {limit} is {g_max}, the sieve found {}",
                sieved.gap
            )));
        }
    }

    let floor_scan = exact::direct_scan(limit.min(DIRECT_FLOOR), cfg)?;
    let first_pair = exact::check_pair(&PrimePair::new_unchecked(1, 2, 3))?;

    let gaps: Vec<u64> = (1..=g_max / 2).map(|i| 2 * i).collect();
    #[cfg(feature = "parallel")]
    let verdicts: Result<Vec<GapVerdict>> = if cfg.parallel {
        use rayon::prelude::*;
        gaps.par_iter()
            .map(|&g| verdict_for_gap(g, catalog, params, cfg))
            .collect()
    } else {
        gaps.iter()
            .map(|&g| verdict_for_gap(g, catalog, params, cfg))
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let verdicts: Result<Vec<GapVerdict>> = gaps
        .iter()
        .map(|&g| verdict_for_gap(g, catalog, params, cfg))
        .collect();
    let verdicts = verdicts?;

    let theorem_established = floor_scan.all_hold
        && first_pair.holds
        && verdicts.iter().all(|v| v.status.is_safe());

    Ok(VerificationReport {
        limit,
        c: params.c,
        x_min: params.x_min,
        coverage_limit: catalog.coverage_limit,
        catalog_entries: catalog.len(),
        g_max,
        floor_scan,
        first_pair,
        verdicts,
        theorem_established,
        elapsed: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Catalog;
    use crate::exact::CheckPath;

    fn sieved_catalog(limit: u64, cfg: &SieveConfig) -> Catalog {
        let records = sieve::scan_gaps(limit, cfg).unwrap();
        Catalog::from_records(&records, limit, "sieved for tests")
    }

    #[test]
    fn gap_150_safe_by_first_occurrence() {
        let cfg = SieveConfig::default();
        let cat = sieved_catalog(20_000_000, &cfg);
        let v = verdict_for_gap(150, &cat, &PiBoundParams::TIGHT, &cfg).unwrap();
        assert_eq!(v.status, VerdictStatus::SafeByFirstOccurrence);
        assert_eq!(v.first_occurrence, Some(13_626_257));
        assert!(v.directly_checked.is_empty());
        assert!(v.slack.unwrap() > 0.0);
    }

    #[test]
    fn gap_2_needs_direct_checks() {
        let cfg = SieveConfig::default();
        let cat = sieved_catalog(1_000, &cfg);
        let v = verdict_for_gap(2, &cat, &PiBoundParams::WIDE, &cfg).unwrap();
        assert_eq!(v.status, VerdictStatus::SafeAfterDirectCheck);
        let pairs: Vec<(u64, u64)> = v
            .directly_checked
            .iter()
            .map(|(p, _)| (p.p(), p.p_next()))
            .collect();
        assert_eq!(pairs, vec![(3, 5), (5, 7)]);
    }

    #[test]
    fn gap_4_single_direct_check() {
        let cfg = SieveConfig::default();
        let cat = sieved_catalog(1_000, &cfg);
        let v = verdict_for_gap(4, &cat, &PiBoundParams::WIDE, &cfg).unwrap();
        assert_eq!(v.status, VerdictStatus::SafeAfterDirectCheck);
        let pairs: Vec<(u64, u64)> = v
            .directly_checked
            .iter()
            .map(|(p, _)| (p.p(), p.p_next()))
            .collect();
        assert_eq!(pairs, vec![(7, 11)]);
        // 11^4 = 14641 < 16807 = 7^5, checkable by hand.
        assert!(v.directly_checked[0].1.holds);
    }

    #[test]
    fn absent_gap_with_insufficient_coverage_is_inconclusive() {
        let cfg = SieveConfig::default();
        // Coverage 1000 but gap 100 solves to a threshold of ~57000.
        let cat = sieved_catalog(1_000, &cfg);
        let v = verdict_for_gap(100, &cat, &PiBoundParams::WIDE, &cfg).unwrap();
        assert_eq!(v.status, VerdictStatus::Inconclusive);
        assert!(v.note.unwrap().contains("coverage"));
    }

    #[test]
    fn absent_gap_with_wide_coverage_is_safe() {
        let cfg = SieveConfig::default();
        let mut cat = sieved_catalog(1_000, &cfg);
        cat.coverage_limit = 10_000_000;
        let v = verdict_for_gap(100, &cat, &PiBoundParams::WIDE, &cfg).unwrap();
        assert_eq!(v.status, VerdictStatus::SafeByFirstOccurrence);
        assert_eq!(v.first_occurrence, None);
    }

    #[test]
    fn flipped_checker_is_detected() {
        let cfg = SieveConfig::default();
        let cat = sieved_catalog(1_000, &cfg);
        let sb = safe_bound(2, &PiBoundParams::WIDE).unwrap();
        let v = verdict_at_threshold(sb, &cat, &cfg, |pair| {
            let out = exact::check_pair(pair)?;
            Ok(CheckOutcome {
                holds: !out.holds,
                margin: -out.margin,
                path: out.path,
            })
        })
        .unwrap();
        assert_eq!(v.status, VerdictStatus::Violation);
        let bad = v.violation.unwrap();
        assert_eq!((bad.p(), bad.p_next()), (3, 5));
    }

    #[test]
    fn beyond_budget_is_inconclusive_with_required_budget() {
        let cfg = SieveConfig {
            budget: 1_000,
            ..SieveConfig::default()
        };
        let records = sieve::scan_gaps(1_000, &SieveConfig::default()).unwrap();
        let mut cat = Catalog::from_records(&records, 1_000, "test");
        cat.coverage_limit = u64::MAX;
        // Threshold inflated past the budget; twin gap first occurs below
        // it, so the direct branch is required but cannot run.
        let v = verdict_at_threshold(
            SafeBound {
                gap: 2,
                c: 1.2,
                x_min: 4,
                x_star: 50_000.0,
                bracket: None,
            },
            &cat,
            &cfg,
            exact::check_pair,
        )
        .unwrap();
        assert_eq!(v.status, VerdictStatus::Inconclusive);
        assert!(v.note.unwrap().contains("budget"));
    }

    #[test]
    fn theorem_at_one_million() {
        let cfg = SieveConfig::default();
        let cat = sieved_catalog(1_000_000, &cfg);
        let report = run_theorem(1_000_000, &cat, &PiBoundParams::WIDE, &cfg).unwrap();
        assert!(report.theorem_established);
        assert_eq!(report.g_max, 114);
        assert_eq!(report.floor_scan.pairs_checked, 78_498);
        assert_eq!(report.count(VerdictStatus::Violation), 0);
        assert_eq!(report.count(VerdictStatus::Inconclusive), 0);
        // Only the twin and cousin gaps need manual pairs.
        assert_eq!(report.count(VerdictStatus::SafeAfterDirectCheck), 2);
        assert_eq!(report.first_pair.path, CheckPath::FloatFast);
    }

    #[test]
    fn refuses_coverage_shortfall() {
        let cfg = SieveConfig::default();
        let cat = sieved_catalog(1_000, &cfg);
        match run_theorem(1_000_000, &cat, &PiBoundParams::WIDE, &cfg) {
            Err(Error::CoverageShortfall { coverage, requested }) => {
                assert_eq!((coverage, requested), (1_000, 1_000_000));
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn catalog_sieve_gmax_disagreement_detected() {
        let cfg = SieveConfig::default();
        // Catalog derived from a smaller scan: claims g_max below 1e6 is
        // what it saw below 1e5, disagreeing with the sieve cross-check.
        let records = sieve::scan_gaps(100_000, &cfg).unwrap();
        let cat = Catalog::from_records(&records, 1_000_000, "stale");
        let err = run_theorem(1_000_000, &cat, &PiBoundParams::WIDE, &cfg).unwrap_err();
        assert!(err.to_string().contains("largest gap"), "{err}");
    }

    #[test]
    fn records_rendering_is_deterministic() {
        let cfg = SieveConfig::default();
        let cat = sieved_catalog(100_000, &cfg);
        let a = run_theorem(100_000, &cat, &PiBoundParams::WIDE, &cfg).unwrap();
        let b = run_theorem(100_000, &cat, &PiBoundParams::WIDE, &cfg).unwrap();
        assert_eq!(a.render_records(), b.render_records());
        assert!(a.render_records().contains("theorem=true"));
    }
}
