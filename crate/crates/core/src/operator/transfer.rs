use num_complex::Complex64;
use serde::Serialize;

use super::Evidence;
use crate::error::{Error, Result};
use crate::monomials::monomial_log_norm;
use crate::seminorm::{sup_weighted_deriv, sup_weighted_deriv_radial, GridConfig};
use crate::symbols::HoloMap;
use crate::weights::Weight;

/// A test function in `B^log`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    /// `scale * z^j`.
    Monomial { j: u32, scale: f64 },
    /// `sum_k c_k z^k`.
    Polynomial { coefficients: Vec<Complex64> },
}

impl TestFunction {
    pub fn label(&self) -> String {
        match self {
            TestFunction::Monomial { j, scale } if *scale == 1.0 => format!("F_{j}"),
            TestFunction::Monomial { j, scale } => format!("{scale}*F_{j}"),
            TestFunction::Polynomial { coefficients } => {
                let parts: Vec<String> = coefficients
                    .iter()
                    .map(|c| {
                        if c.im == 0.0 {
                            format!("{}", c.re)
                        } else {
                            format!("({},{})", c.re, c.im)
                        }
                    })
                    .collect();
                format!("poly:{}", parts.join(","))
            }
        }
    }

    pub fn value(&self, z: Complex64) -> Complex64 {
        match self {
            TestFunction::Monomial { j, scale } => z.powu(*j) * *scale,
            TestFunction::Polynomial { coefficients } => coefficients
                .iter()
                .rev()
                .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c),
        }
    }

    pub fn deriv(&self, z: Complex64) -> Complex64 {
        match self {
            TestFunction::Monomial { j, scale } => z.powu(j - 1) * (*j as f64 * scale),
            TestFunction::Polynomial { coefficients } => {
                let mut p = Complex64::new(0.0, 0.0);
                let mut dp = Complex64::new(0.0, 0.0);
                for c in coefficients.iter().rev() {
                    dp = dp * z + p;
                    p = p * z + c;
                }
                dp
            }
        }
    }

    /// `|f'(z)|` as a function of `|z|`, when it depends on `|z|` only.
    fn radial_profile(&self, c: f64) -> Option<impl Fn(f64) -> Result<f64> + Sync + '_> {
        match self {
            TestFunction::Monomial { j, scale } => {
                let (j, scale) = (*j, *scale);
                Some(move |r: f64| {
                    let k = j as f64;
                    Ok(if j == 1 {
                        scale.abs() * c
                    } else if r == 0.0 || c == 0.0 {
                        0.0
                    } else {
                        scale.abs() * k * (k * c.ln() + (k - 1.0) * r.ln()).exp()
                    })
                })
            }
            TestFunction::Polynomial { .. } => None,
        }
    }
}

/// Monomials `F_j`, normalised monomials `F_j / ||F_j||_log` and two fixed
/// polynomials.
pub fn standard_test_family(js: &[u32]) -> Result<Vec<TestFunction>> {
    let mut family = Vec::new();
    for &j in js {
        if j == 0 {
            return Err(Error::Domain("test monomial index must be >= 1".into()));
        }
        family.push(TestFunction::Monomial { j, scale: 1.0 });
        family.push(TestFunction::Monomial {
            j,
            scale: 1.0 / monomial_log_norm(j as u64)?.norm,
        });
    }
    let re = |v: &[f64]| {
        v.iter()
            .map(|&x| Complex64::new(x, 0.0))
            .collect::<Vec<_>>()
    };
    family.push(TestFunction::Polynomial {
        coefficients: re(&[0.0, 1.0, 0.5, 1.0 / 3.0]),
    });
    family.push(TestFunction::Polynomial {
        coefficients: vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(-0.5, 0.0),
        ],
    });
    Ok(family)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransferEntry {
    pub label: String,
    /// `|f(0)| + ||f||_log`.
    pub source_norm: f64,
    /// `||f o phi||_mu`.
    pub image_seminorm: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransferReport {
    pub symbol_spec: String,
    pub weight_spec: String,
    pub entries: Vec<TransferEntry>,
    /// Largest observed `||f o phi||_mu / ||f||_{B^log}`.
    pub c_report: f64,
    pub bounded_evidence: Option<Evidence>,
    /// False only when the series said bounded but `c_report` is not finite.
    pub consistent: bool,
}

/// Empirical constant in `||f o phi||_mu <= C ||f||_{B^log}` over a test family.
pub fn direct_transfer_check(
    phi: &HoloMap,
    mu: &Weight,
    family: &[TestFunction],
    cfg: &GridConfig,
    bounded_evidence: Option<Evidence>,
) -> Result<TransferReport> {
    let vlog = Weight::vlog();
    let radial_phi = mu.is_radial().then(|| phi.radial_scale()).flatten();
    let mut entries = Vec::with_capacity(family.len());
    for f in family {
        let seminorm = match f.radial_profile(1.0) {
            Some(p) => sup_weighted_deriv_radial(p, &vlog, cfg)?,
            None => sup_weighted_deriv(|z| Ok(f.deriv(z)), &vlog, cfg)?,
        };
        let source_norm = f.value(Complex64::new(0.0, 0.0)).norm() + seminorm.value;
        let image = match (radial_phi, f.radial_profile(radial_phi.unwrap_or(1.0))) {
            (Some(_), Some(p)) => sup_weighted_deriv_radial(p, mu, cfg)?,
            _ => sup_weighted_deriv(
                |z| {
                    let (w, dw) = phi.value_and_deriv(z);
                    Ok(f.deriv(w) * dw)
                },
                mu,
                cfg,
            )?,
        };
        let ratio = if source_norm > 0.0 {
            image.value / source_norm
        } else {
            0.0
        };
        entries.push(TransferEntry {
            label: f.label(),
            source_norm,
            image_seminorm: image.value,
            ratio,
        });
    }
    let c_report = entries.iter().map(|e| e.ratio).fold(0.0, f64::max);
    Ok(TransferReport {
        symbol_spec: phi.to_string(),
        weight_spec: mu.spec(),
        entries,
        c_report,
        bounded_evidence,
        consistent: bounded_evidence != Some(Evidence::StrongYes) || c_report.is_finite(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::parse_symbol_spec;

    #[test]
    fn identity_ratios_at_most_one() {
        let fam = standard_test_family(&[1, 5, 20]).unwrap();
        let rep = direct_transfer_check(
            &HoloMap::Identity,
            &Weight::vlog(),
            &fam,
            &GridConfig::default(),
            Some(Evidence::StrongYes),
        )
        .unwrap();
        assert_eq!(rep.entries.len(), 8);
        for e in &rep.entries {
            assert!(e.ratio <= 1.0 + 1e-12, "{} {}", e.label, e.ratio);
        }
        // F_j(0) = 0, so the ratio is q_j = 1 for pure monomials
        assert!((rep.entries[2].ratio - 1.0).abs() < 1e-12);
        // the second polynomial has f(0) = 1, so its ratio is strictly below 1
        assert!(rep.entries[7].ratio < 0.9);
        assert!(rep.consistent);
    }

    #[test]
    fn dilation_f10() {
        let fam = [TestFunction::Monomial { j: 10, scale: 1.0 }];
        let phi = parse_symbol_spec("dilate:0.5").unwrap();
        let rep = direct_transfer_check(&phi, &Weight::vlog(), &fam, &GridConfig::default(), None)
            .unwrap();
        assert!((rep.entries[0].ratio / 0.5f64.powi(10) - 1.0).abs() < 1e-5);
    }

    #[test]
    fn planar_path_agrees_with_radial_path() {
        let fam = [TestFunction::Monomial { j: 7, scale: 1.0 }];
        let phi = parse_symbol_spec("compose(rotate:1,dilate:0.7)").unwrap();
        let radial =
            direct_transfer_check(&phi, &Weight::vlog(), &fam, &GridConfig::default(), None)
                .unwrap();
        let planar_mu = Weight::custom_planar("vlog2d", |z: Complex64| {
            let gap = 1.0 - z.norm();
            gap * (3.0 / gap).ln()
        });
        let planar =
            direct_transfer_check(&phi, &planar_mu, &fam, &GridConfig::default(), None).unwrap();
        assert!((radial.c_report / planar.c_report - 1.0).abs() < 1e-6);
    }

    #[test]
    fn derivatives_match_differences() {
        let fam = standard_test_family(&[3]).unwrap();
        let z = Complex64::new(0.3, -0.2);
        let h = 1e-6;
        for f in &fam {
            let fd = (f.value(z + h) - f.value(z - h)) / (2.0 * h);
            assert!((fd - f.deriv(z)).norm() <= 1e-6 * f.deriv(z).norm().max(1.0));
        }
    }
}
