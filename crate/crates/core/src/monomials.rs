//! Log-Bloch norms of the monomials `F_j(z) = z^j` and the auxiliary sequences
//! built around them.
//!
//! `||F_j||_log = max_{0<t<1} H_j(t)` with
//! `H_j(t) = j t^(j-1) (1 - t) log(3 / (1 - t))`. For `j >= 11` the maximiser is
//! the unique zero of `g_j(t) = ((j-1) - j t) log(3/(1-t)) + t`; smaller `j`
//! fall back to an exhaustive scan. All work is done in `s = 1 - t`, since
//! `t_j` agrees with 1 to about `log10(j)` digits.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::sync::{Mutex, OnceLock};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{fmt_g17, golden_max};

/// Numerical constants shared by the norm estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Constants {
    /// `L = 1 - 1/log 3`.
    pub l: f64,
    /// Lower bound `L / (2 e^L)` of `h_j` on `[r_{j-1}, r_j]`.
    pub c_lower_h: f64,
    /// Band factor `(2L + 6 e^(L-1)) / L` of the essential norm estimate.
    pub c_upper_band: f64,
    /// Eventual cap `3 / (2e)` on `||F_m||_log / log(m+1)`.
    pub ratio_cap: f64,
}

impl Constants {
    pub fn get() -> &'static Constants {
        static CONSTANTS: OnceLock<Constants> = OnceLock::new();
        CONSTANTS.get_or_init(|| {
            let l = 1.0 - 1.0 / 3f64.ln();
            Constants {
                l,
                c_lower_h: l / (2.0 * l.exp()),
                c_upper_band: (2.0 * l + 6.0 * (l - 1.0).exp()) / l,
                ratio_cap: 3.0 / (2.0 * std::f64::consts::E),
            }
        })
    }
}

fn big_l() -> f64 {
    Constants::get().l
}

/// `r_0 = 0`, `r_j = 1 - L / (j + L)`.
pub fn r_seq(j: u64) -> f64 {
    if j == 0 {
        0.0
    } else {
        1.0 - r_seq_gap(j)
    }
}

/// `1 - r_j`, without cancellation.
pub fn r_seq_gap(j: u64) -> f64 {
    if j == 0 {
        1.0
    } else {
        big_l() / (j as f64 + big_l())
    }
}

/// `g_j` in the variable `s = 1 - t`: `(j s - 1) log(3/s) + 1 - s`.
pub fn g(j: u64, s: f64) -> Result<f64> {
    if j == 0 {
        return Err(Error::Domain("j must be >= 1".into()));
    }
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Domain(format!("s must lie in (0, 1), got {s}")));
    }
    Ok(g_unchecked(j as f64, s))
}

fn g_unchecked(j: f64, s: f64) -> f64 {
    (j * s - 1.0) * (3.0 / s).ln() + 1.0 - s
}

/// `dg/ds = j log(3/s) - j + 1/s - 1`.
fn g_prime_s(j: f64, s: f64) -> f64 {
    j * (3.0 / s).ln() - j + 1.0 / s - 1.0
}

/// `t^(j-1)` with `t = 1 - s`, via `exp((j-1) log1p(-s))`.
fn safe_pow_complement(j: f64, s: f64) -> f64 {
    if j == 1.0 {
        1.0
    } else if s >= 1.0 {
        0.0
    } else {
        ((j - 1.0) * (-s).ln_1p()).exp()
    }
}

/// `H_j` in the variable `s = 1 - t`, for `s in (0, 1]`.
pub fn big_h_s(j: u64, s: f64) -> f64 {
    let jf = j as f64;
    jf * safe_pow_complement(jf, s) * s * (3.0 / s).ln()
}

fn check_t(j: u64, t: f64) -> Result<f64> {
    if j == 0 {
        return Err(Error::Domain("j must be >= 1".into()));
    }
    // t = 0 is admitted as the continuous extension (t^0 = 1 when j = 1).
    if !(0.0..1.0).contains(&t) {
        return Err(Error::Domain(format!("t must lie in [0, 1), got {t}")));
    }
    Ok(1.0 - t)
}

/// `H_j(t) = j t^(j-1) (1-t) log(3/(1-t))`.
pub fn big_h(j: u64, t: f64) -> Result<f64> {
    let s = check_t(j, t)?;
    Ok(big_h_s(j, s))
}

/// `h_j(t) = H_j(t) / log(j+1)`.
pub fn h(j: u64, t: f64) -> Result<f64> {
    Ok(big_h(j, t)? / (j as f64 + 1.0).ln())
}

/// `A(x) = (x / (x + L))^(x-1)` for `x >= 1`.
pub fn a_fn(x: f64) -> Result<f64> {
    if !(x >= 1.0) || !x.is_finite() {
        return Err(Error::Domain(format!("A(x) needs finite x >= 1, got {x}")));
    }
    Ok(((x - 1.0) * -(big_l() / x).ln_1p()).exp())
}

/// Lower end of the root bracket in `s`.
const BRACKET_LO: f64 = 1e-18;
/// Upper end of the root bracket, `1 - 10^-12`.
const BRACKET_HI: f64 = 1.0 - 1e-12;
pub const ROOT_TOL: f64 = 1e-10;
const NEWTON_CAP: usize = 100;
const BISECTION_CAP: usize = 400;

/// Unique zero `s_j = 1 - t_j` of `g(j, .)` for `j >= 11`, with its residual.
///
/// Safeguarded Newton seeded at `1/j - 1/(j log 3j)`; any step leaving the
/// current sign bracket is replaced by bisection.
pub fn solve_tj(j: u64) -> Result<(f64, f64)> {
    if j < 11 {
        return Err(Error::Precondition(format!(
            "solve_tj needs j >= 11 (got {j}); use monomial_log_norm for small j"
        )));
    }
    let jf = j as f64;
    let mut lo = BRACKET_LO;
    let mut hi = BRACKET_HI;
    let mut s = 1.0 / jf - 1.0 / (jf * (3.0 * jf).ln());
    if !(s > lo && s < hi) {
        s = 0.5 * (lo + hi);
    }
    let mut gs = g_unchecked(jf, s);
    let mut converged = false;
    for _ in 0..NEWTON_CAP {
        if gs == 0.0 {
            converged = true;
            break;
        }
        // g increases in s for j >= 11
        if gs < 0.0 {
            lo = s;
        } else {
            hi = s;
        }
        let d = g_prime_s(jf, s);
        let mut next = s - gs / d;
        if !(next > lo && next < hi) || !d.is_finite() || d <= 0.0 {
            next = 0.5 * (lo + hi);
        }
        let step = (next - s).abs();
        s = next;
        gs = g_unchecked(jf, s);
        if step <= 4.0 * f64::EPSILON * s {
            converged = gs.abs() <= ROOT_TOL;
            break;
        }
    }
    if !converged {
        for _ in 0..BISECTION_CAP {
            if gs.abs() <= ROOT_TOL * 1e-3 || hi - lo <= f64::EPSILON * lo {
                break;
            }
            if gs < 0.0 {
                lo = s;
            } else {
                hi = s;
            }
            s = 0.5 * (lo + hi);
            gs = g_unchecked(jf, s);
        }
    }
    Ok((s, gs))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMethod {
    RootFind,
    GlobalScan,
}

impl fmt::Display for NormMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormMethod::RootFind => "root_find",
            NormMethod::GlobalScan => "global_scan",
        })
    }
}

/// `||F_j||_log` together with where the maximum sits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonomialNormRecord {
    pub j: u64,
    /// `1 - t_j`; equals 1 when the supremum sits at the `t = 0` boundary.
    pub s_j: f64,
    pub norm: f64,
    /// `g(j, s_j)` at the computed root (root-find records only).
    pub residual: Option<f64>,
    pub method: NormMethod,
    /// The supremum is attained only in the closure, at `t = 0`.
    pub boundary: bool,
}

const SCAN_POINTS: usize = 10_000;

/// `||F_j||_log = sup_{0<t<1} H_j(t)` for `j >= 1`.
pub fn monomial_log_norm(j: u64) -> Result<MonomialNormRecord> {
    if j == 0 {
        return Err(Error::Domain("monomial index j must be >= 1".into()));
    }
    if j >= 11 {
        let (s, residual) = solve_tj(j)?;
        return Ok(MonomialNormRecord {
            j,
            s_j: s,
            norm: big_h_s(j, s),
            residual: Some(residual),
            method: NormMethod::RootFind,
            boundary: false,
        });
    }
    // Global scan over t in [0, 1), closure point t = 0 included.
    let f = |t: f64| big_h_s(j, 1.0 - t);
    let step = 1.0 / SCAN_POINTS as f64;
    let (mut best_i, mut best) = (0usize, f(0.0));
    for i in 1..SCAN_POINTS {
        let v = f(i as f64 * step);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let a = best_i.saturating_sub(1) as f64 * step;
    let b = ((best_i + 1) as f64 * step).min(1.0 - f64::EPSILON);
    let (t_ref, v_ref) = golden_max(f, a, b, 1e-15, 200);
    let (t_star, norm) = if v_ref > best {
        (t_ref, v_ref)
    } else {
        (best_i as f64 * step, best)
    };
    Ok(MonomialNormRecord {
        j,
        s_j: 1.0 - t_star,
        norm,
        residual: None,
        method: NormMethod::GlobalScan,
        boundary: t_star == 0.0,
    })
}

/// Memoised `j -> MonomialNormRecord` table.
///
/// Concurrent fills of the same `j` are idempotent: the computation is pure
/// and the first stored record wins.
#[derive(Debug, Default)]
pub struct NormTable {
    records: Mutex<BTreeMap<u64, MonomialNormRecord>>,
}

impl NormTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, j: u64) -> Result<MonomialNormRecord> {
        if let Some(rec) = self.records.lock().expect("norm table poisoned").get(&j) {
            return Ok(*rec);
        }
        let rec = monomial_log_norm(j)?;
        let mut map = self.records.lock().expect("norm table poisoned");
        Ok(*map.entry(j).or_insert(rec))
    }

    pub fn norm(&self, j: u64) -> Result<f64> {
        Ok(self.get(j)?.norm)
    }

    pub fn len(&self) -> usize {
        self.records.lock().expect("norm table poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Snapshot of the stored records in increasing `j`.
    pub fn records(&self) -> Vec<MonomialNormRecord> {
        self.records
            .lock()
            .expect("norm table poisoned")
            .values()
            .copied()
            .collect()
    }
}

/// Writes records as CSV with header `j,s_j,norm,residual,method`.
pub fn write_records_csv<W: Write>(records: &[MonomialNormRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["j", "s_j", "norm", "residual", "method"])?;
    for r in records {
        w.write_record([
            r.j.to_string(),
            fmt_g17(r.s_j),
            fmt_g17(r.norm),
            r.residual.map(fmt_g17).unwrap_or_default(),
            r.method.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub const THRESHOLD_WINDOW: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdReport {
    /// Smallest `N` with `||F_m||_log / log(m+1) < 3/(2e)` on `[N, N + window]`.
    pub n: u64,
    pub window: u64,
    /// Largest ratio observed in the verified window.
    pub max_ratio_in_window: f64,
}

fn norm_ratio(table: &NormTable, m: u64) -> Result<f64> {
    Ok(table.norm(m)? / (m as f64 + 1.0).ln())
}

/// Smallest `N` such that the ratio stays below `3/(2e)` for every `m` in
/// `[N, N + window]`. Terminates because the ratio tends to `1/e`.
pub fn find_threshold_n_with(table: &NormTable, window: u64) -> Result<ThresholdReport> {
    let cap = Constants::get().ratio_cap;
    let mut candidate = 1u64;
    loop {
        while norm_ratio(table, candidate)? >= cap {
            candidate += 1;
        }
        let mut max_ratio = 0.0f64;
        let mut violation = None;
        for m in candidate..=candidate + window {
            let q = norm_ratio(table, m)?;
            if q >= cap {
                violation = Some(m);
                break;
            }
            max_ratio = max_ratio.max(q);
        }
        match violation {
            Some(m) => candidate = m + 1,
            None => {
                return Ok(ThresholdReport {
                    n: candidate,
                    window,
                    max_ratio_in_window: max_ratio,
                })
            }
        }
    }
}

pub fn find_threshold_n() -> Result<u64> {
    Ok(find_threshold_n_with(&NormTable::new(), THRESHOLD_WINDOW)?.n)
}
