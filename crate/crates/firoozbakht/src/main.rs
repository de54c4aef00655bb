use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use firoozbakht::catalog::{self, Catalog};
use firoozbakht::exact;
use firoozbakht::pi_bounds::{self, PiBoundParams};
use firoozbakht::safe_bounds;
use firoozbakht::sieve::{self, SieveConfig};
use firoozbakht::verdict::{self, VerdictStatus};

/// Checks that consecutive primes satisfy p_{k+1}^k < p_k^{k+1}: directly
/// below a limit, and for arbitrary gap sizes via safe bounds plus a
/// first-occurrence gap catalog.
#[derive(Parser)]
#[command(name = "firoozbakht", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check every consecutive-prime pair below the limit exactly.
    Direct {
        #[command(flatten)]
        common: Common,
        /// Print one table row per pair (k, p, p^(1/k), OK/FAILURE).
        #[arg(long)]
        emit_table: bool,
    },
    /// Solve the safe bound for one gap size.
    SafeBound {
        #[command(flatten)]
        common: Common,
        /// Even gap size.
        #[arg(long)]
        gap: u64,
    },
    /// Solve safe bounds for every even gap up to a maximum.
    SafeBoundsTable {
        #[command(flatten)]
        common: Common,
        /// Largest gap size to solve.
        #[arg(long, default_value = "1476")]
        gap_max: u64,
    },
    /// Establish the conjecture below the limit from a gap catalog.
    Verify {
        #[command(flatten)]
        common: Common,
    },
    /// Reproduce the side-by-side conjecture bound comparison rows.
    Table1 {
        #[command(flatten)]
        common: Common,
    },
    /// Scan gaps below the limit and emit a first-occurrence catalog.
    ScanGaps {
        #[command(flatten)]
        common: Common,
    },
    /// Validate the pi upper bound against exact counts up to the limit.
    PiCheck {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Limit, plain or scientific (e.g. 1000000, 1e9, 4e18).
    #[arg(long, value_parser = parse_limit)]
    limit: Option<u64>,

    /// Bound constant: 1.1 (valid from 60184) or 1.2 (valid from 4).
    #[arg(long, default_value = "1.2")]
    constant: f64,

    /// Catalog file; the bundled snapshot is used when omitted.
    #[arg(long)]
    catalog: Option<PathBuf>,

    /// Output format for reports.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Odd entries per sieve segment; must be a power of two.
    #[arg(long, value_parser = parse_segment_size)]
    segment_size: Option<usize>,

    /// Write the report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Records,
}

fn parse_limit(s: &str) -> Result<u64, String> {
    let s = s.trim();
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    // Scientific notation with an integer value, e.g. 4e18 or 2.5e10.
    let lower = s.to_ascii_lowercase();
    let (mant, exp) = lower
        .split_once('e')
        .ok_or_else(|| format!("not a number: {s}"))?;
    let exp: u32 = exp.parse().map_err(|_| format!("bad exponent in {s}"))?;
    let (int_part, frac_part) = match mant.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mant, ""),
    };
    if frac_part.len() as u32 > exp {
        return Err(format!("{s} is not an integer"));
    }
    let digits = format!("{int_part}{frac_part}");
    let zeros = exp - frac_part.len() as u32;
    let base: u64 = digits
        .parse()
        .map_err(|_| format!("bad mantissa in {s}"))?;
    let mut v = base;
    for _ in 0..zeros {
        v = v
            .checked_mul(10)
            .ok_or_else(|| format!("{s} exceeds 64 bits"))?;
    }
    Ok(v)
}

fn parse_segment_size(s: &str) -> Result<usize, String> {
    let v: usize = s.parse().map_err(|_| format!("not a number: {s}"))?;
    if !v.is_power_of_two() {
        return Err(format!("segment size must be a power of two, got {v}"));
    }
    Ok(v)
}

impl Common {
    fn sieve_config(&self) -> SieveConfig {
        match self.segment_size {
            Some(len) => SieveConfig::with_segment_len(len),
            None => SieveConfig::default(),
        }
    }

    fn params(&self) -> anyhow::Result<PiBoundParams> {
        PiBoundParams::preset(self.constant)
            .with_context(|| format!("--constant must be 1.1 or 1.2, got {}", self.constant))
    }

    fn limit(&self) -> anyhow::Result<u64> {
        self.limit.context("--limit is required")
    }

    fn catalog(&self) -> anyhow::Result<Catalog> {
        match &self.catalog {
            Some(path) => Ok(catalog::load_catalog(path)?),
            None => Ok(catalog::bundled()?),
        }
    }

    fn writer(&self) -> anyhow::Result<Box<dyn Write>> {
        Ok(match &self.output {
            Some(path) => {
                let f = File::create(path)
                    .with_context(|| format!("cannot create {}", path.display()))?;
                Box::new(BufWriter::new(f))
            }
            None => Box::new(BufWriter::new(std::io::stdout())),
        })
    }
}

/// Exit codes: 0 verified/success, 1 violation found, 2 inconclusive or
/// usage/input error.
fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Direct { common, emit_table } => cmd_direct(common, emit_table),
        Command::SafeBound { common, gap } => cmd_safe_bound(common, gap),
        Command::SafeBoundsTable { common, gap_max } => cmd_safe_bounds_table(common, gap_max),
        Command::Verify { common } => cmd_verify(common),
        Command::Table1 { common } => cmd_table1(common),
        Command::ScanGaps { common } => cmd_scan_gaps(common),
        Command::PiCheck { common } => cmd_pi_check(common),
    }
}

fn cmd_direct(common: Common, emit_table: bool) -> anyhow::Result<ExitCode> {
    let limit = common.limit()?;
    let cfg = common.sieve_config();
    let mut out = common.writer()?;
    let summary = if emit_table {
        exact::direct_scan_emit(limit, &cfg, &mut out)?
    } else {
        exact::direct_scan(limit, &cfg)?
    };
    match common.format {
        Format::Text => {
            writeln!(out, "checked {} pairs with p < {}", summary.pairs_checked, limit)?;
            writeln!(
                out,
                "minimum margin {:.9} at k={} (p={})",
                summary.min_margin, summary.min_margin_at.0, summary.min_margin_at.1
            )?;
            if summary.high_precision_escalations + summary.bigint_escalations > 0 {
                writeln!(
                    out,
                    "escalations: {} high precision, {} big integer",
                    summary.high_precision_escalations, summary.bigint_escalations
                )?;
            }
            match summary.failure {
                None => writeln!(out, "result: all hold")?,
                Some((k, p, q)) => writeln!(out, "result: FAILURE at k={k} p={p} p_next={q}")?,
            }
        }
        Format::Records => {
            writeln!(
                out,
                "scan limit={} pairs={} all_hold={} min_margin={} min_at_k={} min_at_p={}",
                limit,
                summary.pairs_checked,
                summary.all_hold,
                summary.min_margin,
                summary.min_margin_at.0,
                summary.min_margin_at.1
            )?;
        }
    }
    out.flush()?;
    Ok(if summary.all_hold {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_safe_bound(common: Common, gap: u64) -> anyhow::Result<ExitCode> {
    let params = common.params()?;
    let sb = safe_bounds::safe_bound(gap, &params)?;
    let mut out = common.writer()?;
    match common.format {
        Format::Text => {
            writeln!(out, "{:.4}", sb.x_star)?;
        }
        Format::Records => {
            writeln!(
                out,
                "safe_bound gap={} c={} x_min={} x_star={}",
                sb.gap, sb.c, sb.x_min, sb.x_star
            )?;
        }
    }
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_safe_bounds_table(common: Common, gap_max: u64) -> anyhow::Result<ExitCode> {
    let params = common.params()?;
    let table = safe_bounds::safe_bound_table(gap_max, &params)?;
    let mut out = common.writer()?;
    match common.format {
        Format::Text => {
            writeln!(out, "{:>6} {:>6} {:>8} {:>20}", "gap", "c", "x_min", "x_star")?;
            for sb in &table {
                writeln!(
                    out,
                    "{:>6} {:>6} {:>8} {:>20.4}",
                    sb.gap, sb.c, sb.x_min, sb.x_star
                )?;
            }
        }
        Format::Records => {
            for sb in &table {
                writeln!(
                    out,
                    "safe_bound gap={} c={} x_min={} x_star={}",
                    sb.gap, sb.c, sb.x_min, sb.x_star
                )?;
            }
        }
    }
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(common: Common) -> anyhow::Result<ExitCode> {
    let limit = common.limit()?;
    let params = common.params()?;
    let cfg = common.sieve_config();
    let cat = common.catalog()?;
    let report = verdict::run_theorem(limit, &cat, &params, &cfg)?;
    let mut out = common.writer()?;
    match common.format {
        Format::Text => write!(out, "{}", report.render_text())?,
        Format::Records => write!(out, "{}", report.render_records())?,
    }
    out.flush()?;
    if report.theorem_established {
        Ok(ExitCode::SUCCESS)
    } else if report.count(VerdictStatus::Violation) > 0 || !report.floor_scan.all_hold {
        Ok(ExitCode::from(1))
    } else {
        Ok(ExitCode::from(2))
    }
}

fn cmd_table1(common: Common) -> anyhow::Result<ExitCode> {
    let cfg = common.sieve_config();
    let rows = safe_bounds::conjecture_bounds_table(&cfg)?;
    let mut out = common.writer()?;
    match common.format {
        Format::Text => {
            writeln!(
                out,
                "{:>8} {:>9} {:>9} {:>14} {:>14}",
                "k", "p_k", "p_k+1", "cramer", "firoozbakht"
            )?;
            for r in &rows {
                writeln!(
                    out,
                    "{:>8} {:>9} {:>9} {:>14.3} {:>14.3}",
                    r.k, r.p, r.p_next, r.cramer_bound, r.firoozbakht_bound
                )?;
            }
        }
        Format::Records => {
            for r in &rows {
                writeln!(
                    out,
                    "bounds k={} p={} p_next={} cramer={} firoozbakht={}",
                    r.k, r.p, r.p_next, r.cramer_bound, r.firoozbakht_bound
                )?;
            }
        }
    }
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_scan_gaps(common: Common) -> anyhow::Result<ExitCode> {
    let limit = common.limit()?;
    let cfg = common.sieve_config();
    let records = sieve::scan_gaps(limit, &cfg)?;
    let mut out = common.writer()?;
    catalog::write_catalog(
        &records,
        limit,
        &format!("first-occurrence prime gaps sieved below {limit}"),
        &mut out,
    )?;
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_pi_check(common: Common) -> anyhow::Result<ExitCode> {
    let limit = common.limit()?;
    let params = common.params()?;
    let cfg = common.sieve_config();
    let check = pi_bounds::verify_pi_bound_small(limit, &params, &cfg)?;
    let mut out = common.writer()?;
    match common.format {
        Format::Text => {
            writeln!(
                out,
                "pi(x) < x/(ln x - {}) checked for x in [{}, {}]: {}",
                params.c,
                params.x_min,
                limit,
                if check.holds { "holds" } else { "VIOLATED" }
            )?;
            if let Some((x, pi, bound)) = check.counterexample {
                writeln!(out, "counterexample: x={x} pi={pi} bound={bound}")?;
            }
        }
        Format::Records => {
            writeln!(
                out,
                "pi_check c={} x_min={} limit={} holds={} checked={}",
                params.c, params.x_min, limit, check.holds, check.checked
            )?;
        }
    }
    out.flush()?;
    Ok(if check.holds {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
