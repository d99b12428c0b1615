//! CSV and JSON emitters for the CLI.
//!
//! CSV output has fixed headers and `%.17g` numbers. JSON output wraps a
//! result in an envelope carrying the resolved configuration, so a report can
//! be reproduced from the file alone.

use std::io::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::error::Result;
use crate::grid::fmt_g17;
use crate::monomials::Constants;
use crate::operator::{AnnuliHistogram, QuotientSeries};
use crate::weights::EquivalenceReport;

pub const TOOL: &str = "blochlab";

const DETERMINISM_NOTE: &str =
    "deterministic grids, no random sampling; output is independent of the worker count";

#[derive(Debug, Serialize)]
pub struct RunMeta {
    pub tool: &'static str,
    pub version: &'static str,
    /// Seconds since the Unix epoch; only present when requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
    pub determinism: &'static str,
}

impl RunMeta {
    pub fn new(with_timestamp: bool) -> Self {
        RunMeta {
            tool: TOOL,
            version: env!("CARGO_PKG_VERSION"),
            timestamp: with_timestamp.then(|| {
                SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0)
            }),
            determinism: DETERMINISM_NOTE,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Envelope<'a, C: Serialize, R: Serialize> {
    pub run: RunMeta,
    pub config: &'a C,
    pub result: &'a R,
}

pub fn write_json<C: Serialize, R: Serialize, W: Write>(
    config: &C,
    result: &R,
    meta: RunMeta,
    mut out: W,
) -> Result<()> {
    let env = Envelope {
        run: meta,
        config,
        result,
    };
    serde_json::to_writer_pretty(&mut out, &env)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

/// Header `j,q,numerator,denominator,boundary_dominated,diverged`.
pub fn write_series_csv<W: Write>(series: &QuotientSeries, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "j",
        "q",
        "numerator",
        "denominator",
        "boundary_dominated",
        "diverged",
    ])?;
    for t in &series.terms {
        w.write_record([
            t.j.to_string(),
            fmt_g17(t.q),
            fmt_g17(t.numerator),
            fmt_g17(t.denominator),
            t.sup.boundary_dominated.to_string(),
            t.sup.diverged.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Header `j,r_lo,r_hi,count`; the overflow bucket is the row with `j = overflow`.
pub fn write_annuli_csv<W: Write>(hist: &AnnuliHistogram, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["j", "r_lo", "r_hi", "count"])?;
    for b in &hist.buckets {
        w.write_record([
            b.j.to_string(),
            fmt_g17(b.r_lo),
            fmt_g17(b.r_hi),
            b.count.to_string(),
        ])?;
    }
    let last = hist.buckets.last().map(|b| b.r_hi).unwrap_or(0.0);
    w.write_record([
        "overflow".to_string(),
        fmt_g17(last),
        "1".to_string(),
        hist.overflow.to_string(),
    ])?;
    w.flush()?;
    Ok(())
}

pub fn write_equivalence_csv<W: Write>(rep: &EquivalenceReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "ratio_min",
        "ratio_max",
        "argmin_r",
        "argmax_r",
        "grid_size",
    ])?;
    w.write_record([
        fmt_g17(rep.ratio_min),
        fmt_g17(rep.ratio_max),
        fmt_g17(rep.argmin_r),
        fmt_g17(rep.argmax_r),
        rep.grid_size.to_string(),
    ])?;
    w.flush()?;
    Ok(())
}

/// One header row and one value row for any flat serializable record.
pub fn write_record_csv<T: Serialize, W: Write>(record: &T, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.serialize(record)?;
    w.flush()?;
    Ok(())
}

/// Named constants as `(name, value)` pairs.
pub fn constant_table() -> Vec<(&'static str, f64)> {
    let c = Constants::get();
    vec![
        ("L", c.l),
        ("c_lower_h", c.c_lower_h),
        ("c_upper_band", c.c_upper_band),
        ("ratio_cap", c.ratio_cap),
    ]
}

pub fn write_constants_csv<W: Write>(out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["name", "value"])?;
    for (name, v) in constant_table() {
        w.write_record([name.to_string(), fmt_g17(v)])?;
    }
    w.flush()?;
    Ok(())
}
