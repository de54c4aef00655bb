//! First-occurrence prime-gap catalogs: parsing, validation, reconciliation
//! against the sieve, and export.
//!
//! File format (UTF-8 text):
//!   - lines starting with '#' are comments;
//!   - one header line `coverage_limit <decimal>` before any entry;
//!   - one entry per line, `<gap> <start_prime>`, single-space separated,
//!     gaps strictly ascending.
//!
//! The coverage limit declares the bound below which the table is complete:
//! a gap size with no entry does not occur below it. Entry endpoints are
//! re-proved prime on load wherever they fit in 64 bits; gap interiors are
//! checked composite, exhaustively for small entries and by deterministic
//! sampling for the rest.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::primality;
use crate::sieve::{self, GapRecord, SieveConfig};

/// Where a catalog's rows came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntrySource {
    Bundled,
    Ingested,
    Sieved,
}

impl fmt::Display for EntrySource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            EntrySource::Bundled => "bundled",
            EntrySource::Ingested => "ingested",
            EntrySource::Sieved => "sieved",
        };
        f.write_str(s)
    }
}

/// One first-occurrence row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CatalogEntry {
    pub gap: u64,
    pub start_prime: u64,
    pub source: EntrySource,
    /// False when start + gap does not fit in 64 bits and endpoint
    /// primality had to be skipped.
    pub primality_verified: bool,
}

/// A validated first-occurrence table.
#[derive(Debug, Clone)]
pub struct Catalog {
    entries: BTreeMap<u64, CatalogEntry>,
    pub coverage_limit: u64,
    pub provenance: String,
    pub source: EntrySource,
}

/// Entries exhaustively interior-checked below these limits; larger ones
/// get 32 sampled interior compositeness probes.
const FULL_INTERIOR_GAP: u64 = 1000;
const FULL_INTERIOR_START: u64 = 1_000_000_000_000;
const INTERIOR_SAMPLES: usize = 32;

/// Load and validate a catalog file.
pub fn load_catalog(path: impl AsRef<Path>) -> Result<Catalog> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::CatalogIo {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    parse_catalog(&text, EntrySource::Ingested)
}

/// The catalog shipped with the crate (first occurrences below 4e18).
pub fn bundled() -> Result<Catalog> {
    parse_catalog(
        include_str!("../data/first_occurrence_gaps.txt"),
        EntrySource::Bundled,
    )
}

/// Parse catalog text and run full validation.
pub fn parse_catalog(text: &str, source: EntrySource) -> Result<Catalog> {
    let mut coverage_limit: Option<u64> = None;
    let mut provenance = String::new();
    let mut rows: Vec<(usize, u64, u64)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim_end();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if provenance.is_empty() {
                provenance = comment.trim().to_string();
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix("coverage_limit ") {
            if coverage_limit.is_some() {
                return Err(Error::CatalogParse {
                    line: lineno,
                    column: 1,
                    message: "duplicate coverage_limit header".to_string(),
                });
            }
            let value = rest.parse::<u64>().map_err(|e| Error::CatalogParse {
                line: lineno,
                column: "coverage_limit ".len() + 1,
                message: format!("bad coverage limit: {e}"),
            })?;
            coverage_limit = Some(value);
            continue;
        }
        if coverage_limit.is_none() {
            return Err(Error::CatalogParse {
                line: lineno,
                column: 1,
                message: "entry before coverage_limit header".to_string(),
            });
        }
        let mut parts = line.split(' ');
        let gap_tok = parts.next().unwrap_or_default();
        let gap = gap_tok.parse::<u64>().map_err(|e| Error::CatalogParse {
            line: lineno,
            column: 1,
            message: format!("bad gap: {e}"),
        })?;
        let start_tok = parts.next().ok_or(Error::CatalogParse {
            line: lineno,
            column: gap_tok.len() + 2,
            message: "missing start prime".to_string(),
        })?;
        let start = start_tok.parse::<u64>().map_err(|e| Error::CatalogParse {
            line: lineno,
            column: gap_tok.len() + 2,
            message: format!("bad start prime: {e}"),
        })?;
        if parts.next().is_some() {
            return Err(Error::CatalogParse {
                line: lineno,
                column: gap_tok.len() + start_tok.len() + 3,
                message: "trailing tokens after entry".to_string(),
            });
        }
        rows.push((lineno, gap, start));
    }

    let coverage_limit = coverage_limit.ok_or(Error::CatalogParse {
        line: text.lines().count().max(1),
        column: 1,
        message: "missing coverage_limit header".to_string(),
    })?;

    let violations = validate_rows(&rows, coverage_limit);
    if !violations.is_empty() {
        return Err(Error::CatalogInvalid(violations));
    }

    let mut entries = BTreeMap::new();
    for &(_, gap, start) in &rows {
        entries.insert(
            gap,
            CatalogEntry {
                gap,
                start_prime: start,
                source,
                primality_verified: start.checked_add(gap).is_some(),
            },
        );
    }
    if provenance.is_empty() {
        provenance = "(none)".to_string();
    }
    Ok(Catalog {
        entries,
        coverage_limit,
        provenance,
        source,
    })
}

fn validate_rows(rows: &[(usize, u64, u64)], coverage_limit: u64) -> Vec<String> {
    let mut violations: Vec<(usize, String)> = Vec::new();
    let mut prev_gap: Option<u64> = None;
    for &(lineno, gap, _) in rows {
        if let Some(pg) = prev_gap {
            if gap <= pg {
                violations.push((
                    lineno,
                    format!("line {lineno}: gap {gap} not strictly ascending after {pg}"),
                ));
            }
        }
        prev_gap = Some(gap);
    }

    let structural = |lineno: usize, gap: u64, start: u64| -> Option<String> {
        if gap < 2 || gap % 2 != 0 {
            return Some(format!("line {lineno}: gap {gap} must be even and >= 2"));
        }
        if start < 3 {
            return Some(format!("line {lineno}: start prime {start} too small"));
        }
        if start >= coverage_limit {
            return Some(format!(
                "line {lineno}: start prime {start} at or beyond the coverage limit {coverage_limit}"
            ));
        }
        None
    };

    let check_entry = |&(lineno, gap, start): &(usize, u64, u64)| -> Vec<String> {
        let mut errs = Vec::new();
        if let Some(e) = structural(lineno, gap, start) {
            errs.push(e);
            return errs;
        }
        match start.checked_add(gap) {
            None => {
                // Beyond the 64-bit oracle: accepted, flagged unverified.
            }
            Some(end) => {
                if !primality::is_prime(start) {
                    errs.push(format!("line {lineno}: start {start} is not prime"));
                }
                if !primality::is_prime(end) {
                    errs.push(format!(
                        "line {lineno}: end {end} = {start} + {gap} is not prime"
                    ));
                }
                if errs.is_empty() {
                    if let Some(q) = interior_prime(gap, start) {
                        errs.push(format!(
                            "line {lineno}: interior {q} is prime, so the gap at {start} is not {gap}"
                        ));
                    }
                }
            }
        }
        errs
    };

    #[cfg(feature = "parallel")]
    let entry_errs: Vec<Vec<String>> = {
        use rayon::prelude::*;
        rows.par_iter().map(check_entry).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let entry_errs: Vec<Vec<String>> = rows.iter().map(check_entry).collect();

    let mut all: Vec<String> = violations.into_iter().map(|(_, m)| m).collect();
    all.extend(entry_errs.into_iter().flatten());
    all
}

/// Find a prime strictly inside (start, start + gap), or None. Exhaustive
/// for small entries; 32 deterministic samples otherwise.
fn interior_prime(gap: u64, start: u64) -> Option<u64> {
    if gap <= 2 {
        return None;
    }
    if gap <= FULL_INTERIOR_GAP && start < FULL_INTERIOR_START {
        let mut q = start + 2;
        while q < start + gap {
            if primality::is_prime(q) {
                return Some(q);
            }
            q += 2;
        }
        None
    } else {
        // Odd interior candidates only; even ones are composite anyway.
        let mut rng = ChaCha8Rng::seed_from_u64(start ^ gap.rotate_left(32));
        for _ in 0..INTERIOR_SAMPLES {
            let off = 2 * rng.gen_range(1..gap / 2);
            let q = start + off;
            if primality::is_prime(q) {
                return Some(q);
            }
        }
        None
    }
}

impl Catalog {
    /// Build a catalog from sieve output; only even gaps are kept.
    pub fn from_records(records: &[GapRecord], coverage_limit: u64, provenance: &str) -> Catalog {
        let mut entries = BTreeMap::new();
        for r in records {
            if r.gap % 2 != 0 {
                continue;
            }
            entries.insert(
                r.gap,
                CatalogEntry {
                    gap: r.gap,
                    start_prime: r.start_prime,
                    source: EntrySource::Sieved,
                    primality_verified: true,
                },
            );
        }
        Catalog {
            entries,
            coverage_limit,
            provenance: provenance.to_string(),
            source: EntrySource::Sieved,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = &CatalogEntry> {
        self.entries.values()
    }

    pub fn get(&self, gap: u64) -> Option<&CatalogEntry> {
        self.entries.get(&gap)
    }

    /// Start prime of the first occurrence of `gap`, or None meaning the
    /// gap does not occur below the coverage limit.
    pub fn first_occurrence(&self, gap: u64) -> Result<Option<u64>> {
        if gap < 2 || gap % 2 != 0 {
            return Err(Error::domain(format!(
                "first-occurrence lookup needs an even gap >= 2, got {gap}"
            )));
        }
        Ok(self.entries.get(&gap).map(|e| e.start_prime))
    }

    /// Largest gap whose first occurrence lies below `limit`.
    pub fn max_gap_with_start_below(&self, limit: u64) -> Option<u64> {
        self.entries
            .values()
            .filter(|e| e.start_prime < limit)
            .map(|e| e.gap)
            .max()
    }
}

/// One disagreement between a catalog and a fresh sieve scan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Discrepancy {
    /// The sieve found a first occurrence the catalog lacks.
    Missing { gap: u64, sieved_start: u64 },
    /// The catalog claims a first occurrence below the scan limit that the
    /// sieve did not see.
    Extra { gap: u64, catalog_start: u64 },
    /// Both have the gap but at different starts.
    Mismatch {
        gap: u64,
        catalog_start: u64,
        sieved_start: u64,
    },
}

impl fmt::Display for Discrepancy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Discrepancy::Missing { gap, sieved_start } => {
                write!(f, "missing: gap {gap} first occurs at {sieved_start}")
            }
            Discrepancy::Extra { gap, catalog_start } => write!(
                f,
                "extra: catalog places gap {gap} at {catalog_start}, sieve found no such gap"
            ),
            Discrepancy::Mismatch {
                gap,
                catalog_start,
                sieved_start,
            } => write!(
                f,
                "mismatch: gap {gap} cataloged at {catalog_start}, sieved at {sieved_start}"
            ),
        }
    }
}

/// Compare catalog entries with start below `limit` against a fresh
/// [`sieve::scan_gaps`] run. An empty report means agreement.
pub fn reconcile(catalog: &Catalog, limit: u64, cfg: &SieveConfig) -> Result<Vec<Discrepancy>> {
    let sieved = sieve::scan_gaps(limit, cfg)?;
    let mut report = Vec::new();
    let sieved_map: BTreeMap<u64, u64> = sieved
        .iter()
        .filter(|r| r.gap % 2 == 0)
        .map(|r| (r.gap, r.start_prime))
        .collect();
    for (&gap, &start) in &sieved_map {
        match catalog.get(gap) {
            None => report.push(Discrepancy::Missing {
                gap,
                sieved_start: start,
            }),
            Some(e) if e.start_prime != start => report.push(Discrepancy::Mismatch {
                gap,
                catalog_start: e.start_prime,
                sieved_start: start,
            }),
            Some(_) => {}
        }
    }
    for e in catalog.entries() {
        if e.start_prime < limit && !sieved_map.contains_key(&e.gap) {
            report.push(Discrepancy::Extra {
                gap: e.gap,
                catalog_start: e.start_prime,
            });
        }
    }
    Ok(report)
}

/// Write records in the catalog file format. Odd gaps (the unique gap of 1
/// at p = 2) are not part of the format and are skipped.
pub fn write_catalog<W: Write>(
    records: &[GapRecord],
    coverage_limit: u64,
    provenance: &str,
    out: &mut W,
) -> Result<()> {
    if !provenance.is_empty() {
        writeln!(out, "# {provenance}")?;
    }
    writeln!(out, "coverage_limit {coverage_limit}")?;
    for r in records {
        if r.gap % 2 != 0 {
            continue;
        }
        writeln!(out, "{} {}", r.gap, r.start_prime)?;
    }
    Ok(())
}
