//! Numerical estimation of `sup_{z in D} mu(z) |f'(z)|`.
//!
//! The 2-D engine runs a coarse polar sweep over boundary-clustered radii
//! followed by rounds of re-gridding in a shrinking polar rectangle around the
//! incumbent. The radial engine is a 1-D scan plus golden-section refinement
//! for inputs where `|f'|` depends only on `|z|`.
//!
//! Every reported value is an evaluated point value, so it is a lower bound of
//! the true supremum. Results do not depend on the number of worker threads:
//! the sweep is a max-reduction with ties broken by smallest radius, then
//! smallest angle.

use std::cmp::Ordering;
use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{golden_max, RadialMap};
use crate::weights::Weight;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub n_radii: usize,
    pub n_angles: usize,
    pub r_max: f64,
    pub refine_rounds: usize,
    pub refine_shrink: f64,
    pub rel_tol: f64,
    pub divergence_cap: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            n_radii: 512,
            n_angles: 256,
            r_max: 1.0 - 1e-12,
            refine_rounds: 6,
            refine_shrink: 0.25,
            rel_tol: 1e-7,
            divergence_cap: 1e12,
        }
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_max > 0.0 && self.r_max < 1.0) {
            return Err(Error::Precondition(format!(
                "r_max must lie in (0, 1), got {}",
                self.r_max
            )));
        }
        if !(self.refine_shrink > 0.0 && self.refine_shrink < 1.0) {
            return Err(Error::Precondition(format!(
                "refine_shrink must lie in (0, 1), got {}",
                self.refine_shrink
            )));
        }
        if self.n_radii < 2 || self.n_angles < 1 {
            return Err(Error::Precondition(
                "n_radii must be >= 2 and n_angles >= 1".into(),
            ));
        }
        if !(self.rel_tol > 0.0) || !(self.divergence_cap > 0.0) {
            return Err(Error::Precondition(
                "rel_tol and divergence_cap must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Same configuration with `n_radii` and `n_angles` doubled.
    pub fn doubled(&self) -> Self {
        GridConfig {
            n_radii: 2 * self.n_radii,
            n_angles: 2 * self.n_angles,
            ..*self
        }
    }
}

/// Lower-bound estimate of a weighted supremum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupEstimate {
    pub value: f64,
    pub argmax: Complex64,
    /// The maximiser sits within `10 (1 - r_max)` of the truncation radius.
    pub boundary_dominated: bool,
    /// The value exceeded `divergence_cap` at a boundary-dominated maximiser.
    pub diverged: bool,
    pub evaluations: u64,
}

/// Points per axis of each refinement window.
const REFINE_POINTS: usize = 33;
/// Initial refinement half-width, in coarse cells.
const REFINE_CELLS: f64 = 2.0;

#[derive(Debug, Clone, Copy)]
struct Candidate {
    value: f64,
    u: f64,
    r: f64,
    angle: f64,
}

impl Candidate {
    /// Total order: larger value first, then smaller radius, then smaller angle.
    fn beats(&self, other: &Candidate) -> bool {
        match self.value.partial_cmp(&other.value) {
            Some(Ordering::Greater) => true,
            Some(Ordering::Less) => false,
            _ => (self.r, self.angle) < (other.r, other.angle),
        }
    }

    fn best(a: Candidate, b: Candidate) -> Candidate {
        if b.beats(&a) {
            b
        } else {
            a
        }
    }

    fn none() -> Candidate {
        Candidate {
            value: f64::NEG_INFINITY,
            u: 0.0,
            r: f64::INFINITY,
            angle: f64::INFINITY,
        }
    }
}

fn weighted_value<F>(df: &F, w: &Weight, map: &RadialMap, u: f64, angle: f64) -> Result<Candidate>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    let p = map.point(u);
    let z = Complex64::from_polar(p.r, angle);
    let attach = |message: String| Error::Evaluation { point: z, message };
    let d = df(z).map_err(|e| attach(e.to_string()))?;
    let weight = if p.gap > 0.0 {
        w.eval_polar(p.gap, z).map_err(|e| attach(e.to_string()))?
    } else {
        return Err(attach("radius reached 1".into()));
    };
    let value = weight * d.norm();
    if value.is_nan() {
        return Err(attach(format!("weighted derivative is NaN (f'(z) = {d})")));
    }
    Ok(Candidate {
        value,
        u,
        r: p.r,
        angle,
    })
}

fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

fn finish(best: Candidate, cfg: &GridConfig, evaluations: u64) -> SupEstimate {
    let slack = 10.0 * (1.0 - cfg.r_max);
    let boundary_dominated = cfg.r_max - best.r <= slack;
    let value = best.value.max(0.0);
    SupEstimate {
        value,
        argmax: Complex64::from_polar(best.r, best.angle),
        boundary_dominated,
        diverged: boundary_dominated && value > cfg.divergence_cap,
        evaluations,
    }
}

/// Estimates `sup_{|z| <= r_max} w(z) |df(z)|` on a polar grid with local refinement.
pub fn sup_weighted_deriv<F>(df: F, w: &Weight, cfg: &GridConfig) -> Result<SupEstimate>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    cfg.validate()?;
    let map = RadialMap::new(cfg.r_max);
    let du = 1.0 / (cfg.n_radii - 1) as f64;
    let da = TAU / cfg.n_angles as f64;

    // coarse sweep; the origin ring is a single point
    let mut best = (0..cfg.n_radii)
        .into_par_iter()
        .map(|i| -> Result<Candidate> {
            let u = i as f64 * du;
            if i == 0 {
                return weighted_value(&df, w, &map, 0.0, 0.0);
            }
            let mut ring = Candidate::none();
            for k in 0..cfg.n_angles {
                ring = Candidate::best(ring, weighted_value(&df, w, &map, u, k as f64 * da)?);
            }
            Ok(ring)
        })
        .try_reduce(Candidate::none, |a, b| Ok(Candidate::best(a, b)))?;
    let mut evaluations = 1 + ((cfg.n_radii - 1) * cfg.n_angles) as u64;

    let mut half_u = REFINE_CELLS * du;
    let mut half_a = REFINE_CELLS * da;
    let step = 1.0 / (REFINE_POINTS - 1) as f64;
    let mut quiet_rounds = 0;
    for _ in 0..cfg.refine_rounds {
        let previous = best;
        let center_u = best.u;
        let center_a = best.angle;
        let lo_u = (center_u - half_u).max(0.0);
        let hi_u = (center_u + half_u).min(1.0);
        let round = (0..REFINE_POINTS)
            .into_par_iter()
            .map(|i| -> Result<Candidate> {
                let u = lo_u + (hi_u - lo_u) * i as f64 * step;
                let mut row = Candidate::none();
                for k in 0..REFINE_POINTS {
                    let a = wrap_angle(center_a - half_a + 2.0 * half_a * k as f64 * step);
                    row = Candidate::best(row, weighted_value(&df, w, &map, u, a)?);
                }
                Ok(row)
            })
            .try_reduce(Candidate::none, |a, b| Ok(Candidate::best(a, b)))?;
        evaluations += (REFINE_POINTS * REFINE_POINTS) as u64;
        best = Candidate::best(best, round);
        half_u *= cfg.refine_shrink;
        half_a *= cfg.refine_shrink;
        // one small gain can be a lucky incumbent; two in a row is convergence
        let gain = best.value - previous.value;
        if gain < cfg.rel_tol * previous.value.abs() {
            quiet_rounds += 1;
            if quiet_rounds == 2 {
                break;
            }
        } else {
            quiet_rounds = 0;
        }
    }
    Ok(finish(best, cfg, evaluations))
}

/// 1-D fast path for `|df(z)| = profile(|z|)`.
///
/// The caller certifies radial symmetry. Scans `n_radii * n_angles / 8` radii
/// (at least `n_radii`) and refines the best bracket by golden section.
pub fn sup_weighted_deriv_radial<P>(profile: P, w: &Weight, cfg: &GridConfig) -> Result<SupEstimate>
where
    P: Fn(f64) -> Result<f64> + Sync,
{
    cfg.validate()?;
    if !w.is_radial() {
        return Err(Error::Unsupported(format!(
            "radial engine needs a radial weight; `{}` is not radial",
            w.spec()
        )));
    }
    let map = RadialMap::new(cfg.r_max);
    let n = (cfg.n_radii * cfg.n_angles / 8).max(cfg.n_radii);
    let du = 1.0 / (n - 1) as f64;
    let eval = |u: f64| -> Result<Candidate> {
        let p = map.point(u);
        let z = Complex64::new(p.r, 0.0);
        let attach = |message: String| Error::Evaluation { point: z, message };
        let d = profile(p.r).map_err(|e| attach(e.to_string()))?;
        let weight = w.eval_gap(p.gap).map_err(|e| attach(e.to_string()))?;
        let value = weight * d.abs();
        if value.is_nan() {
            return Err(attach("weighted profile is NaN".into()));
        }
        Ok(Candidate {
            value,
            u,
            r: p.r,
            angle: 0.0,
        })
    };
    let mut best = (0..n)
        .into_par_iter()
        .map(|i| eval(i as f64 * du))
        .try_reduce(Candidate::none, |a, b| Ok(Candidate::best(a, b)))?;
    let mut evaluations = n as u64;

    if best.value > 0.0 {
        let lo = (best.u - du).max(0.0);
        let hi = (best.u + du).min(1.0);
        let count = std::cell::Cell::new(0u64);
        let failure = std::cell::RefCell::new(None);
        let (u_ref, _) = golden_max(
            |u| {
                count.set(count.get() + 1);
                match eval(u) {
                    Ok(c) => c.value,
                    Err(e) => {
                        failure.borrow_mut().get_or_insert(e);
                        f64::NEG_INFINITY
                    }
                }
            },
            lo,
            hi,
            1e-15,
            200,
        );
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        evaluations += count.get();
        best = Candidate::best(best, eval(u_ref)?);
        evaluations += 1;
    }
    Ok(finish(best, cfg, evaluations))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monomials::monomial_log_norm;

    fn monomial_df(j: u32) -> impl Fn(Complex64) -> Result<Complex64> + Sync {
        move |z: Complex64| Ok(z.powu(j - 1) * j as f64)
    }

    fn monomial_profile(j: u32) -> impl Fn(f64) -> Result<f64> + Sync {
        move |r: f64| {
            Ok(if j == 1 {
                1.0
            } else if r == 0.0 {
                0.0
            } else {
                j as f64 * ((j - 1) as f64 * r.ln()).exp()
            })
        }
    }

    #[test]
    fn zero_derivative_gives_zero_at_origin() {
        let est = sup_weighted_deriv(
            |_| Ok(Complex64::new(0.0, 0.0)),
            &Weight::vlog(),
            &GridConfig::default(),
        )
        .unwrap();
        assert_eq!(est.value, 0.0);
        assert_eq!(est.argmax, Complex64::new(0.0, 0.0));
        assert!(!est.boundary_dominated && !est.diverged);
    }

    #[test]
    fn constant_profiles() {
        let cfg = GridConfig::default();
        let one = |_r: f64| Ok(1.0);
        let a = sup_weighted_deriv_radial(one, &Weight::alpha(1.0).unwrap(), &cfg).unwrap();
        assert_eq!(a.value, 1.0);
        assert_eq!(a.argmax, Complex64::new(0.0, 0.0));
        let v = sup_weighted_deriv_radial(one, &Weight::vlog(), &cfg).unwrap();
        assert_eq!(v.value, 3f64.ln());
    }

    #[test]
    fn engines_match_exact_monomial_norms() {
        let cfg = GridConfig::default();
        for j in [1u32, 2, 3, 7, 11, 25, 50] {
            let exact = monomial_log_norm(j as u64).unwrap().norm;
            let two_d = sup_weighted_deriv(monomial_df(j), &Weight::vlog(), &cfg).unwrap();
            let radial =
                sup_weighted_deriv_radial(monomial_profile(j), &Weight::vlog(), &cfg).unwrap();
            assert!(
                ((two_d.value - exact) / exact).abs() < 1e-6,
                "j={j} 2d {} vs {exact}",
                two_d.value
            );
            assert!(
                ((radial.value - exact) / exact).abs() < 1e-6,
                "j={j} radial {} vs {exact}",
                radial.value
            );
            // lower-bound soundness against the exact supremum
            assert!(two_d.value <= exact * (1.0 + 1e-14));
            assert!(radial.value <= exact * (1.0 + 1e-14));
        }
    }

    #[test]
    fn dilation_power_scales_exactly() {
        let cfg = GridConfig::default();
        let a = 0.7f64;
        for j in [3u32, 20] {
            let exact = a.powi(j as i32) * monomial_log_norm(j as u64).unwrap().norm;
            let est = sup_weighted_deriv(
                move |z: Complex64| Ok((z * a).powu(j - 1) * a * j as f64),
                &Weight::vlog(),
                &cfg,
            )
            .unwrap();
            assert!(((est.value - exact) / exact).abs() < 1e-5);
        }
    }

    #[test]
    fn divergent_candidate_is_flagged() {
        // mu = 1, f'(z) = 1/(1-z)^2: blows up at z = 1
        let w = Weight::custom_radial("one", |_| 1.0);
        let est = sup_weighted_deriv(
            |z: Complex64| {
                Ok(Complex64::new(1.0, 0.0)
                    / ((Complex64::new(1.0, 0.0) - z) * (Complex64::new(1.0, 0.0) - z)))
            },
            &w,
            &GridConfig::default(),
        )
        .unwrap();
        assert!(est.boundary_dominated);
        assert!(est.diverged);
        assert!(est.value > 1e12);
    }

    #[test]
    fn planar_weight_through_2d_engine() {
        // mu(z) = 2 + Re z, f' = 1: sup at z -> r_max on the positive axis
        let w = Weight::custom_planar("tilt", |z| 2.0 + z.re);
        let est = sup_weighted_deriv(|_| Ok(Complex64::new(1.0, 0.0)), &w, &GridConfig::default())
            .unwrap();
        assert!((est.value - 3.0).abs() < 1e-9);
        assert!(est.boundary_dominated && !est.diverged);
        assert!(sup_weighted_deriv_radial(|_| Ok(1.0), &w, &GridConfig::default()).is_err());
    }

    #[test]
    fn evaluator_fault_carries_point() {
        let err = sup_weighted_deriv(
            |z: Complex64| {
                if z.norm() > 0.5 {
                    Err(Error::Domain("boom".into()))
                } else {
                    Ok(z)
                }
            },
            &Weight::vlog(),
            &GridConfig::default(),
        )
        .unwrap_err();
        match err {
            Error::Evaluation { point, message } => {
                assert!(point.norm() > 0.5);
                assert!(message.contains("boom"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn refinement_never_lowers_incumbent() {
        let df = |z: Complex64| {
            let one = Complex64::new(1.0, 0.0);
            Ok((one - z * Complex64::new(0.3, 0.2)).powi(-2) * 5.0 * z.powu(4))
        };
        let mut prev = 0.0;
        for rounds in 0..=6 {
            let cfg = GridConfig {
                refine_rounds: rounds,
                rel_tol: 1e-300,
                ..GridConfig::default()
            };
            let v = sup_weighted_deriv(df, &Weight::vlog(), &cfg).unwrap().value;
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn invalid_config_rejected() {
        let bad = GridConfig {
            r_max: 1.0,
            ..GridConfig::default()
        };
        assert!(sup_weighted_deriv(Ok, &Weight::vlog(), &bad).is_err());
        let bad = GridConfig {
            refine_shrink: 1.5,
            ..GridConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn independent_of_thread_count() {
        let df = |z: Complex64| {
            let m = (Complex64::new(0.3, 0.0) - z) / (Complex64::new(1.0, 0.0) - z * 0.3);
            Ok(m.powu(6) * (0.91 / ((Complex64::new(1.0, 0.0) - z * 0.3).powu(2))) * 7.0)
        };
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| {
                    sup_weighted_deriv(df, &Weight::vlog(), &GridConfig::default()).unwrap()
                })
        };
        let a = run(1);
        let b = run(3);
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.argmax, b.argmax);
    }
}
