use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::monomials::monomial_log_norm;
use crate::seminorm::{sup_weighted_deriv, sup_weighted_deriv_radial, GridConfig, SupEstimate};
use crate::symbols::{validate_self_map, HoloMap, SelfMapReport};
use crate::weights::Weight;

/// Disk samples used when a symbol has to be validated numerically.
const VALIDATION_SAMPLES: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Denominator {
    /// `||F_j||_log` from the monomial solver.
    ExactNorm,
    /// `log(j + 1)`.
    LogJPlus1,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuotientTerm {
    pub j: u32,
    pub q: f64,
    /// `||phi^j||_mu` as estimated by the engine.
    pub numerator: f64,
    pub denominator: f64,
    pub sup: SupEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuotientSeries {
    pub symbol_spec: String,
    pub weight_spec: String,
    pub denominator: Denominator,
    pub j_max: u32,
    /// Present when the symbol needed numerical self-map validation.
    pub validation: Option<SelfMapReport>,
    pub terms: Vec<QuotientTerm>,
}

impl QuotientSeries {
    pub fn any_diverged(&self) -> bool {
        self.terms.iter().any(|t| t.sup.diverged)
    }

    pub fn sup_q(&self) -> f64 {
        self.terms.iter().map(|t| t.q).fold(0.0, f64::max)
    }
}

/// `q_j = ||phi^j||_mu / D_j` for `j = 1..=j_max`.
///
/// Symbols that are not self-maps by construction are validated on a disk
/// sample first; a failing symbol is refused unless `force` is set. When
/// `phi` is a dilation or rotation of the identity and the weight is radial,
/// the 1-D engine is used on the profile `j c^j r^(j-1)`.
pub fn quotient_sequence(
    phi: &HoloMap,
    mu: &Weight,
    j_max: u32,
    cfg: &GridConfig,
    denominator: Denominator,
    force: bool,
) -> Result<QuotientSeries> {
    if j_max < 1 {
        return Err(Error::Precondition("j_max must be >= 1".into()));
    }
    cfg.validate()?;
    let validation = if phi.needs_validation() {
        let report = validate_self_map(phi, VALIDATION_SAMPLES);
        if !report.pass && !force {
            return Err(Error::Refused(format!(
                "`{phi}` is not a self-map of the disk: |phi| reaches {} at {} (pass --force to run anyway)",
                report.max_modulus, report.arg_max
            )));
        }
        Some(report)
    } else {
        None
    };
    let radial = mu.is_radial().then(|| phi.radial_scale()).flatten();

    let terms = (1..=j_max)
        .into_par_iter()
        .map(|j| -> Result<QuotientTerm> {
            let sup = match radial {
                Some(c) => {
                    sup_weighted_deriv_radial(|r| Ok(dilated_monomial_profile(c, j, r)), mu, cfg)?
                }
                None => sup_weighted_deriv(
                    |z: Complex64| {
                        let d = phi.power_deriv_unchecked(j, z);
                        // overflow of a forced non-self-map counts as divergence
                        Ok(if d.re.is_finite() && d.im.is_finite() {
                            d
                        } else {
                            Complex64::new(f64::INFINITY, 0.0)
                        })
                    },
                    mu,
                    cfg,
                )?,
            };
            let denom = match denominator {
                Denominator::ExactNorm => monomial_log_norm(j as u64)?.norm,
                Denominator::LogJPlus1 => (j as f64 + 1.0).ln(),
            };
            Ok(QuotientTerm {
                j,
                q: sup.value / denom,
                numerator: sup.value,
                denominator: denom,
                sup,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(QuotientSeries {
        symbol_spec: phi.to_string(),
        weight_spec: mu.spec(),
        denominator,
        j_max,
        validation,
        terms,
    })
}

/// `|((c z)^j)'|` at `|z| = r`.
fn dilated_monomial_profile(c: f64, j: u32, r: f64) -> f64 {
    if c == 0.0 {
        0.0
    } else if j == 1 {
        c
    } else if r == 0.0 {
        0.0
    } else {
        j as f64 * (j as f64 * c.ln() + (j - 1) as f64 * r.ln()).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::parse_symbol_spec;

    fn fast() -> GridConfig {
        GridConfig {
            n_radii: 256,
            n_angles: 64,
            ..GridConfig::default()
        }
    }

    #[test]
    fn identity_calibrates_to_one() {
        let s = quotient_sequence(
            &HoloMap::Identity,
            &Weight::vlog(),
            60,
            &GridConfig::default(),
            Denominator::ExactNorm,
            false,
        )
        .unwrap();
        assert_eq!(s.terms.len(), 60);
        for (i, t) in s.terms.iter().enumerate() {
            assert_eq!(t.j as usize, i + 1);
            assert!((t.q - 1.0).abs() < 1e-6, "j={} q={}", t.j, t.q);
        }
    }

    #[test]
    fn constant_symbol_is_zero() {
        let phi = parse_symbol_spec("const:0.3,0.1").unwrap();
        let s = quotient_sequence(
            &phi,
            &Weight::vlog(),
            10,
            &fast(),
            Denominator::ExactNorm,
            false,
        )
        .unwrap();
        assert!(s.terms.iter().all(|t| t.q == 0.0));
    }

    #[test]
    fn dilation_is_geometric() {
        let phi = parse_symbol_spec("dilate:0.9").unwrap();
        let s = quotient_sequence(
            &phi,
            &Weight::vlog(),
            200,
            &GridConfig::default(),
            Denominator::ExactNorm,
            false,
        )
        .unwrap();
        for t in &s.terms {
            let expect = 0.9f64.powi(t.j as i32);
            assert!(
                ((t.q - expect) / expect).abs() < 1e-5,
                "j={} q={} expect={expect}",
                t.j,
                t.q
            );
        }
        let q200 = s.terms[199].q;
        assert!((q200 / 7.055e-10 - 1.0).abs() < 1e-3, "{q200}");
    }

    #[test]
    fn rotated_dilation_through_2d_engine_matches_radial() {
        // planar weight forces the 2-D engine; it equals vlog
        let planar = Weight::custom_planar("vlog2d", |z: Complex64| {
            let gap = 1.0 - z.norm();
            gap * (3.0 / gap).ln()
        });
        let phi = parse_symbol_spec("compose(rotate:0.7,dilate:0.8)").unwrap();
        let a = quotient_sequence(
            &phi,
            &Weight::vlog(),
            12,
            &GridConfig::default(),
            Denominator::ExactNorm,
            false,
        )
        .unwrap();
        let b = quotient_sequence(
            &phi,
            &planar,
            12,
            &GridConfig::default(),
            Denominator::ExactNorm,
            false,
        )
        .unwrap();
        for (x, y) in a.terms.iter().zip(&b.terms) {
            assert!(
                ((x.q - y.q) / x.q).abs() < 1e-6,
                "j={} {} {}",
                x.j,
                x.q,
                y.q
            );
        }
    }

    #[test]
    fn log_denominator_factor() {
        let a = quotient_sequence(
            &HoloMap::Identity,
            &Weight::vlog(),
            30,
            &fast(),
            Denominator::ExactNorm,
            false,
        )
        .unwrap();
        let b = quotient_sequence(
            &HoloMap::Identity,
            &Weight::vlog(),
            30,
            &fast(),
            Denominator::LogJPlus1,
            false,
        )
        .unwrap();
        for (x, y) in a.terms.iter().zip(&b.terms) {
            let factor = y.q / x.q;
            let expect = monomial_log_norm(x.j as u64).unwrap().norm / (x.j as f64 + 1.0).ln();
            assert!((factor / expect - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn refuses_non_self_map() {
        let phi = parse_symbol_spec("poly:0.6,0.6").unwrap();
        let err = quotient_sequence(
            &phi,
            &Weight::vlog(),
            10,
            &fast(),
            Denominator::ExactNorm,
            false,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Refused(_)));
        let forced = quotient_sequence(
            &phi,
            &Weight::vlog(),
            40,
            &fast(),
            Denominator::ExactNorm,
            true,
        )
        .unwrap();
        assert!(!forced.validation.as_ref().unwrap().pass);
        // |phi| reaches 1.2 at the boundary so q_j grows geometrically
        assert!(forced.terms[39].q > forced.terms[20].q);
    }

    #[test]
    fn larger_j_max_extends_prefix() {
        let phi = parse_symbol_spec("mobius:0.3,0").unwrap();
        let a = quotient_sequence(
            &phi,
            &Weight::vlog(),
            8,
            &fast(),
            Denominator::ExactNorm,
            false,
        )
        .unwrap();
        let b = quotient_sequence(
            &phi,
            &Weight::vlog(),
            12,
            &fast(),
            Denominator::ExactNorm,
            false,
        )
        .unwrap();
        assert_eq!(&b.terms[..8], &a.terms[..]);
        assert!(b.sup_q() >= a.sup_q());
    }
}
