//! The built-in verification suite behind `blochlab verify`.
//!
//! Each criterion is a plain function returning a [`CriterionResult`]; the
//! CLI runs them all and the integration tests call them one by one. `fast`
//! shortens the `j` ranges of the expensive criteria and skips their timing
//! budgets.

use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::Result;
use crate::monomials::{
    a_fn, find_threshold_n_with, g, h, monomial_log_norm, r_seq, solve_tj, Constants, NormTable,
    THRESHOLD_WINDOW,
};
use crate::operator::{
    classify, essential_norm_band, quotient_sequence, ClassifyPolicy, Denominator, Evidence,
    DEFAULT_TAIL_FRACTION,
};
use crate::report::write_series_csv;
use crate::seminorm::{sup_weighted_deriv, GridConfig};
use crate::symbols::{every_node_kind, parse_symbol_spec, probe_points, HoloMap};
use crate::weights::{equivalence_constants, Weight};

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "[{}] criterion {:>2} {}: {} ({:.2}s)",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.seconds
        )
    }
}

fn timed(
    id: u8,
    name: &'static str,
    budget: Option<f64>,
    body: impl FnOnce() -> Result<(bool, String)>,
) -> CriterionResult {
    let start = Instant::now();
    let outcome = body();
    let seconds = start.elapsed().as_secs_f64();
    let (mut pass, mut detail) = match outcome {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    if let Some(limit) = budget {
        if seconds >= limit {
            pass = false;
            detail.push_str(&format!("; runtime {seconds:.1}s exceeds {limit}s"));
        }
    }
    CriterionResult {
        id,
        name,
        pass,
        detail,
        seconds,
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// 2-D engine on `j z^(j-1)` against the 1-D monomial solver.
pub fn monomial_engine_agreement(fast: bool) -> CriterionResult {
    let j_max = if fast { 20 } else { 50 };
    timed(
        1,
        "engine vs monomial norms",
        (!fast).then_some(30.0),
        || {
            let cfg = GridConfig::default();
            let w = Weight::vlog();
            let mut worst = (0u32, 0.0f64);
            for j in 1..=j_max {
                let est =
                    sup_weighted_deriv(move |z: Complex64| Ok(z.powu(j - 1) * j as f64), &w, &cfg)?;
                let exact = monomial_log_norm(j as u64)?.norm;
                let e = rel(est.value, exact);
                if e > worst.1 {
                    worst = (j, e);
                }
            }
            Ok((
                worst.1 <= 1e-6,
                format!(
                    "j = 1..{j_max}, worst relative error {:.3e} at j = {}",
                    worst.1, worst.0
                ),
            ))
        },
    )
}

/// `e ||F_j|| / log(j+1)` at `j = 2^k`.
pub fn monomial_asymptotic_ratio() -> CriterionResult {
    timed(2, "monomial norm ~ log(j+1)/e", Some(5.0), || {
        let vals: Vec<(u32, f64)> = (4..=30u32)
            .map(|k| {
                let j = 1u64 << k;
                Ok((
                    k,
                    std::f64::consts::E * monomial_log_norm(j)?.norm / (j as f64 + 1.0).ln(),
                ))
            })
            .collect::<Result<_>>()?;
        let tail: Vec<&(u32, f64)> = vals.iter().filter(|(k, _)| *k >= 6).collect();
        let decreasing = tail.windows(2).all(|w| w[1].1 < w[0].1);
        let last = vals.last().expect("nonempty").1;
        Ok((
            decreasing && (1.0..=1.08).contains(&last),
            format!("decreasing for k >= 6: {decreasing}; value at k = 30: {last:.6}"),
        ))
    })
}

/// Residual of the root and the identity `j s = 1 - (1 - s)/log(3/s)`.
pub fn root_identity() -> CriterionResult {
    timed(3, "root identity", None, || {
        let mut ok = true;
        let mut parts = Vec::new();
        for j in [11u64, 100, 10_000, 100_000_000] {
            let (s, _) = solve_tj(j)?;
            let resid = g(j, s)?.abs();
            let lhs = j as f64 * s;
            let rhs = 1.0 - (1.0 - s) / (3.0 / s).ln();
            let e = rel(lhs, rhs);
            ok &= resid <= 1e-10 && e <= 1e-9;
            parts.push(format!("j={j}: |g|={resid:.1e} rel={e:.1e}"));
        }
        Ok((ok, parts.join(", ")))
    })
}

/// `j s_j` increases toward 1 and `(1 - s_j)^(j-1)` approaches `1/e`.
pub fn root_asymptotics() -> CriterionResult {
    timed(4, "root asymptotics", None, || {
        let mut prev = 0.0;
        let mut increasing = true;
        let mut below_one = true;
        // half-decade samples 10^2, 10^2.5, ..., 10^8
        for i in 0..=12 {
            let j = 10f64.powf(2.0 + 0.5 * i as f64).round() as u64;
            let (s, _) = solve_tj(j)?;
            let js = j as f64 * s;
            increasing &= js > prev;
            below_one &= js < 1.0;
            prev = js;
        }
        let j = 1_000_000u64;
        let (s, _) = solve_tj(j)?;
        let power = ((j - 1) as f64 * (-s).ln_1p()).exp();
        let gap = (power - (-1f64).exp()).abs();
        Ok((
            increasing && below_one && gap <= 0.05,
            format!("j s_j increasing: {increasing}, below 1: {below_one}, j s_j at 1e8 = {prev:.6}; |t^(j-1) - 1/e| at 1e6 = {gap:.4}"),
        ))
    })
}

/// `A(x)` decreasing on a log-spaced sample of `[1, 1e8]` with limit `e^(-L)`.
pub fn a_function_monotone() -> CriterionResult {
    timed(5, "A(x) decreasing to e^-L", None, || {
        let n = 1000;
        let xs: Vec<f64> = (0..n)
            .map(|i| 10f64.powf(8.0 * i as f64 / (n - 1) as f64))
            .collect();
        let vals: Vec<f64> = xs.iter().map(|&x| a_fn(x)).collect::<Result<_>>()?;
        let decreasing = vals.windows(2).all(|w| w[1] < w[0]);
        let gap = (a_fn(1e8)? - (-Constants::get().l).exp()).abs();
        Ok((
            decreasing && gap <= 1e-7,
            format!("strictly decreasing: {decreasing}; |A(1e8) - e^-L| = {gap:.3e}"),
        ))
    })
}

/// Lower bound of `h_j` on `[r_(j-1), r_j]` and monotonicity beyond `r_(j-1)`.
pub fn h_lower_bound_and_monotone() -> CriterionResult {
    timed(6, "h_j lower bound and decrease", None, || {
        let bound = Constants::get().c_lower_h;
        let mut min_seen = (0u64, f64::INFINITY);
        let mut worst_step = (0u64, f64::NEG_INFINITY);
        for j in 1..=1000u64 {
            let (lo, hi) = (r_seq(j - 1), r_seq(j));
            for i in 0..=64 {
                let t = lo + (hi - lo) * i as f64 / 64.0;
                let v = h(j, t)?;
                if v < min_seen.1 {
                    min_seen = (j, v);
                }
            }
            // log-spaced in 1 - t from 1 - r_(j-1) down to 1e-6
            let (g0, g1) = ((1.0 - lo).ln(), 1e-6f64.ln());
            let mut prev = h(j, lo)?;
            for i in 1..=400 {
                let t = 1.0 - (g0 + (g1 - g0) * i as f64 / 400.0).exp();
                if t >= 1.0 - 1e-6 {
                    break;
                }
                let v = h(j, t)?;
                if v - prev > worst_step.1 {
                    worst_step = (j, v - prev);
                }
                prev = v;
            }
        }
        Ok((
            min_seen.1 >= bound && worst_step.1 <= 0.0,
            format!(
                "min h = {:.6} (j = {}) vs bound {bound:.6}; largest forward difference {:.3e} (j = {})",
                min_seen.1, min_seen.0, worst_step.1, worst_step.0
            ),
        ))
    })
}

/// Threshold `N` for `||F_m|| / log(m+1) < 3/(2e)`.
pub fn threshold_search() -> CriterionResult {
    timed(7, "threshold N", None, || {
        let table = NormTable::new();
        let base = find_threshold_n_with(&table, THRESHOLD_WINDOW)?;
        let doubled = find_threshold_n_with(&table, 2 * THRESHOLD_WINDOW)?;
        let cap = Constants::get().ratio_cap;
        Ok((
            base.n == doubled.n
                && base.max_ratio_in_window < cap
                && doubled.max_ratio_in_window < cap,
            format!(
                "N = {} (window {}), N = {} (window {}); max ratio {:.6} < {cap:.6}",
                base.n, base.window, doubled.n, doubled.window, doubled.max_ratio_in_window
            ),
        ))
    })
}

/// Identity symbol into `B^vlog`.
pub fn identity_calibration(fast: bool) -> CriterionResult {
    let j_max = if fast { 60 } else { 200 };
    timed(8, "identity calibration", None, || {
        let series = quotient_sequence(
            &HoloMap::Identity,
            &Weight::vlog(),
            j_max,
            &GridConfig::default(),
            Denominator::ExactNorm,
            false,
        )?;
        let worst = series
            .terms
            .iter()
            .map(|t| (t.q - 1.0).abs())
            .fold(0.0, f64::max);
        let policy = ClassifyPolicy::default();
        let class = classify(&series, &policy)?;
        let band = essential_norm_band(&series, DEFAULT_TAIL_FRACTION, &policy)?;
        let q_ok = worst <= 1e-6;
        let class_ok = class.bounded_evidence == Evidence::StrongYes
            && class.compact_evidence == Evidence::StrongNo;
        let lower_ok = (band.lower - 1.0).abs() <= 1e-6;
        let upper_ok = (band.upper - 28.9011).abs() <= 1e-3;
        Ok((
            q_ok && class_ok && lower_ok && upper_ok,
            format!(
                "max |q_j - 1| = {worst:.2e} (j <= {j_max}); bounded {} compact {}; band [{:.9}, {:.6}] vs expected [1, 28.9011 +- 1e-3]",
                class.bounded_evidence, class.compact_evidence, band.lower, band.upper
            ),
        ))
    })
}

/// `dilate:0.9` into `B^vlog`.
pub fn dilation_compactness(fast: bool) -> CriterionResult {
    let j_max = if fast { 60 } else { 200 };
    timed(9, "dilation compactness", (!fast).then_some(60.0), || {
        let phi = parse_symbol_spec("dilate:0.9")?;
        let series = quotient_sequence(
            &phi,
            &Weight::vlog(),
            j_max,
            &GridConfig::default(),
            Denominator::ExactNorm,
            false,
        )?;
        let worst = series
            .terms
            .iter()
            .map(|t| rel(t.q, 0.9f64.powi(t.j as i32)))
            .fold(0.0, f64::max);
        let class = classify(&series, &ClassifyPolicy::default())?;
        Ok((
            worst <= 1e-5 && class.compact_evidence == Evidence::StrongYes,
            format!(
                "max relative |q_j - 0.9^j| = {worst:.2e} (j <= {j_max}); compact {}",
                class.compact_evidence
            ),
        ))
    })
}

/// `v^(1) / v^(2)` per `theta`, and cross-`theta` bands.
pub fn log_weight_equivalence() -> CriterionResult {
    timed(10, "log weight equivalence", None, || {
        let thetas = [std::f64::consts::E, 3.0, 10.0];
        // i = 0..=n gives n + 1 radii
        let grid = 9_999;
        let mut ok = true;
        let mut parts = Vec::new();
        for &theta in &thetas {
            let rep =
                equivalence_constants(&Weight::log_k(1, theta)?, &Weight::log_k(2, theta)?, grid)?;
            ok &= rep.ratio_min >= 0.5 && rep.ratio_max <= 1.0;
            parts.push(format!(
                "theta={theta:.4}: [{:.6}, {:.6}]",
                rep.ratio_min, rep.ratio_max
            ));
        }
        for k in [1u32, 2] {
            for (a, b) in [(0, 1), (0, 2), (1, 2)] {
                let rep = equivalence_constants(
                    &Weight::log_k(k, thetas[a])?,
                    &Weight::log_k(k, thetas[b])?,
                    grid,
                )?;
                ok &= rep.ratio_min.is_finite() && rep.ratio_max.is_finite() && rep.ratio_min > 0.0;
            }
        }
        parts.push("cross-theta bands finite".into());
        Ok((ok, parts.join(", ")))
    })
}

/// Derivatives against central differences and the Mobius involution.
pub fn symbol_algebra() -> CriterionResult {
    timed(11, "symbol algebra", None, || {
        let h = 1e-6;
        let mut worst = 0.0f64;
        for phi in every_node_kind() {
            for z in probe_points() {
                let d = phi.deriv(z)?;
                let fd = (phi.eval(z + h)? - phi.eval(z - h)?) / (2.0 * h);
                let e = if d.norm() == 0.0 {
                    fd.norm()
                } else {
                    (d - fd).norm() / d.norm()
                };
                worst = worst.max(e);
            }
        }
        let m = HoloMap::mobius(Complex64::new(0.3, 0.4))?;
        let mut inv = 0.0f64;
        for z in probe_points() {
            inv = inv.max((m.eval(m.eval(z)?)? - z).norm());
        }
        Ok((
            worst <= 1e-6 && inv <= 1e-12,
            format!("worst derivative error {worst:.2e}; Mobius involution error {inv:.2e}"),
        ))
    })
}

/// Quotient CSV bytes for `mobius:0.3,0.0` under the given worker count.
pub fn mobius_series_csv(threads: usize, j_max: u32) -> Result<Vec<u8>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| crate::Error::Precondition(format!("thread pool: {e}")))?;
    pool.install(|| {
        let phi = parse_symbol_spec("mobius:0.3,0.0")?;
        let series = quotient_sequence(
            &phi,
            &Weight::vlog(),
            j_max,
            &GridConfig::default(),
            Denominator::ExactNorm,
            false,
        )?;
        let mut buf = Vec::new();
        write_series_csv(&series, &mut buf)?;
        Ok(buf)
    })
}

pub fn determinism() -> CriterionResult {
    timed(12, "determinism across thread counts", None, || {
        let one = mobius_series_csv(1, 50)?;
        let four = mobius_series_csv(4, 50)?;
        let again = mobius_series_csv(4, 50)?;
        Ok((
            one == four && four == again,
            format!(
                "{} bytes; 1 vs 4 threads identical: {}; repeat identical: {}",
                one.len(),
                one == four,
                four == again
            ),
        ))
    })
}

pub fn run_all(fast: bool) -> Vec<CriterionResult> {
    vec![
        monomial_engine_agreement(fast),
        monomial_asymptotic_ratio(),
        root_identity(),
        root_asymptotics(),
        a_function_monotone(),
        h_lower_bound_and_monotone(),
        threshold_search(),
        identity_calibration(fast),
        dilation_compactness(fast),
        log_weight_equivalence(),
        symbol_algebra(),
        determinism(),
    ]
}
