//! Holomorphic self-maps of the unit disk with exact derivatives.
//!
//! A [`HoloMap`] is a finite expression tree. Evaluation returns the value and
//! the derivative in one pass; `Compose` applies the chain rule.

mod parse;
mod validate;

use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

pub use parse::{parse_symbol_spec, parse_symbol_spec_with_depth, DEFAULT_MAX_DEPTH};
pub use validate::{validate_self_map, SelfMapReport, MIN_VALIDATION_SAMPLES};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum HoloMap {
    Identity,
    Constant {
        c: Complex64,
    },
    /// `z -> a z`, `|a| <= 1`.
    Dilate {
        a: Complex64,
    },
    /// `z -> e^{i angle} z`.
    Rotate {
        angle: f64,
    },
    /// Disk automorphism `z -> (a - z) / (1 - conj(a) z)`, `|a| < 1`.
    Mobius {
        a: Complex64,
    },
    Power {
        n: u32,
    },
    /// `z -> sum_k c_k z^k`; not a self-map in general.
    Poly {
        coefficients: Vec<Complex64>,
    },
    /// Finite product of Mobius factors `(a_k - z) / (1 - conj(a_k) z)`.
    Blaschke {
        zeros: Vec<Complex64>,
    },
    Compose {
        outer: Box<HoloMap>,
        inner: Box<HoloMap>,
    },
}

fn check_open(what: &str, a: Complex64) -> Result<()> {
    if !(a.norm() < 1.0) {
        return Err(Error::Domain(format!(
            "{what} needs |a| < 1, got |{a}| = {}",
            a.norm()
        )));
    }
    Ok(())
}

impl HoloMap {
    pub fn constant(c: Complex64) -> Result<Self> {
        check_open("const", c)?;
        Ok(HoloMap::Constant { c })
    }

    pub fn dilate(a: Complex64) -> Result<Self> {
        if !(a.norm() <= 1.0) {
            return Err(Error::Domain(format!(
                "dilate needs |a| <= 1, got {}",
                a.norm()
            )));
        }
        Ok(HoloMap::Dilate { a })
    }

    pub fn rotate(angle: f64) -> Result<Self> {
        if !angle.is_finite() {
            return Err(Error::Domain("rotation angle must be finite".into()));
        }
        Ok(HoloMap::Rotate { angle })
    }

    pub fn mobius(a: Complex64) -> Result<Self> {
        check_open("mobius", a)?;
        Ok(HoloMap::Mobius { a })
    }

    pub fn power(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("power needs n >= 1".into()));
        }
        Ok(HoloMap::Power { n })
    }

    pub fn poly(coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::Domain("poly needs at least one coefficient".into()));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("poly coefficients must be finite".into()));
        }
        Ok(HoloMap::Poly { coefficients })
    }

    pub fn blaschke(zeros: Vec<Complex64>) -> Result<Self> {
        if zeros.is_empty() {
            return Err(Error::Domain("blaschke needs at least one zero".into()));
        }
        for a in &zeros {
            check_open("blaschke zero", *a)?;
        }
        Ok(HoloMap::Blaschke { zeros })
    }

    pub fn compose(outer: HoloMap, inner: HoloMap) -> Self {
        HoloMap::Compose {
            outer: Box::new(outer),
            inner: Box::new(inner),
        }
    }

    /// Nesting depth of `Compose` nodes.
    pub fn depth(&self) -> usize {
        match self {
            HoloMap::Compose { outer, inner } => 1 + outer.depth().max(inner.depth()),
            _ => 0,
        }
    }

    /// True when the tree contains a node whose self-map property is not
    /// guaranteed by construction.
    pub fn needs_validation(&self) -> bool {
        !self.is_exact_self_map()
    }

    /// Node kinds that map the disk into itself by construction.
    pub fn is_exact_self_map(&self) -> bool {
        match self {
            HoloMap::Poly { .. } => false,
            HoloMap::Compose { outer, inner } => {
                outer.is_exact_self_map() && inner.is_exact_self_map()
            }
            _ => true,
        }
    }

    /// `Some(c)` when `|phi(z)| = c |z|` and `|phi'(z)| = c` for all `z`,
    /// i.e. `phi` is a dilation or rotation of the identity.
    pub fn radial_scale(&self) -> Option<f64> {
        match self {
            HoloMap::Identity => Some(1.0),
            HoloMap::Dilate { a } => Some(a.norm()),
            HoloMap::Rotate { .. } => Some(1.0),
            HoloMap::Power { n: 1 } => Some(1.0),
            HoloMap::Mobius { a } if *a == Complex64::new(0.0, 0.0) => Some(1.0),
            HoloMap::Compose { outer, inner } => {
                Some(outer.radial_scale()? * inner.radial_scale()?)
            }
            _ => None,
        }
    }

    /// `phi(z)` for `|z| < 1`.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.eval_with_deriv(z)?.0)
    }

    /// `phi'(z)` for `|z| < 1`.
    pub fn deriv(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.eval_with_deriv(z)?.1)
    }

    /// `(phi(z), phi'(z))` for `|z| < 1`.
    pub fn eval_with_deriv(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        check_point(z)?;
        Ok(self.value_and_deriv(z))
    }

    /// `(phi^j)'(z) = j phi(z)^(j-1) phi'(z)`.
    pub fn power_deriv(&self, j: u32, z: Complex64) -> Result<Complex64> {
        check_point(z)?;
        Ok(self.power_deriv_unchecked(j, z))
    }

    pub(crate) fn power_deriv_unchecked(&self, j: u32, z: Complex64) -> Complex64 {
        let (w, d) = self.value_and_deriv(z);
        power_deriv_from(j, w, d)
    }

    /// Value and derivative with no disk check; inner nodes of a composition
    /// may legitimately be evaluated anywhere their formula is defined.
    pub(crate) fn value_and_deriv(&self, z: Complex64) -> (Complex64, Complex64) {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        match self {
            HoloMap::Identity => (z, one),
            HoloMap::Constant { c } => (*c, zero),
            HoloMap::Dilate { a } => (a * z, *a),
            HoloMap::Rotate { angle } => {
                let u = Complex64::from_polar(1.0, *angle);
                (u * z, u)
            }
            HoloMap::Mobius { a } => mobius_factor(*a, z),
            HoloMap::Power { n } => {
                if *n == 1 {
                    (z, one)
                } else {
                    let zn1 = z.powu(n - 1);
                    (zn1 * z, zn1 * *n as f64)
                }
            }
            HoloMap::Poly { coefficients } => {
                // Horner for value and derivative together
                let mut p = zero;
                let mut dp = zero;
                for c in coefficients.iter().rev() {
                    dp = dp * z + p;
                    p = p * z + c;
                }
                (p, dp)
            }
            HoloMap::Blaschke { zeros } => {
                let mut v = one;
                let mut d = zero;
                for a in zeros {
                    let (f, df) = mobius_factor(*a, z);
                    d = d * f + v * df;
                    v *= f;
                }
                (v, d)
            }
            HoloMap::Compose { outer, inner } => {
                let (w, dw) = inner.value_and_deriv(z);
                let (v, dv) = outer.value_and_deriv(w);
                (v, dv * dw)
            }
        }
    }
}

/// `j w^(j-1) d`, with `w^(j-1)` formed in polar form so that
/// `|w|^(j-1)` is `exp((j-1) ln|w|)` rather than a repeated product.
pub(crate) fn power_deriv_from(j: u32, w: Complex64, d: Complex64) -> Complex64 {
    if j == 1 {
        return d;
    }
    let modulus = w.norm();
    if modulus == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let k = (j - 1) as f64;
    let wp = Complex64::from_polar((k * modulus.ln()).exp(), k * w.arg());
    wp * d * j as f64
}

fn mobius_factor(a: Complex64, z: Complex64) -> (Complex64, Complex64) {
    let den = Complex64::new(1.0, 0.0) - a.conj() * z;
    let val = (a - z) / den;
    let der = Complex64::new(a.norm_sqr() - 1.0, 0.0) / (den * den);
    (val, der)
}

fn check_point(z: Complex64) -> Result<()> {
    if !(z.norm() < 1.0) {
        return Err(Error::Domain(format!(
            "point must lie in the open unit disk, got {z}"
        )));
    }
    Ok(())
}

fn fmt_num(x: f64) -> String {
    format!("{x}")
}

impl fmt::Display for HoloMap {
    /// Canonical spec text accepted by [`parse_symbol_spec`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HoloMap::Identity => f.write_str("id"),
            HoloMap::Constant { c } => write!(f, "const:{},{}", fmt_num(c.re), fmt_num(c.im)),
            HoloMap::Dilate { a } if a.im == 0.0 => write!(f, "dilate:{}", fmt_num(a.re)),
            HoloMap::Dilate { a } => write!(f, "dilate:{},{}", fmt_num(a.re), fmt_num(a.im)),
            HoloMap::Rotate { angle } => write!(f, "rotate:{}", fmt_num(*angle)),
            HoloMap::Mobius { a } => write!(f, "mobius:{},{}", fmt_num(a.re), fmt_num(a.im)),
            HoloMap::Power { n } => write!(f, "power:{n}"),
            HoloMap::Poly { coefficients } => {
                f.write_str("poly:")?;
                for (i, c) in coefficients.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    if c.im == 0.0 {
                        f.write_str(&fmt_num(c.re))?;
                    } else {
                        write!(f, "({},{})", fmt_num(c.re), fmt_num(c.im))?;
                    }
                }
                Ok(())
            }
            HoloMap::Blaschke { zeros } => {
                f.write_str("blaschke:")?;
                for (i, a) in zeros.iter().enumerate() {
                    if i > 0 {
                        f.write_str(";")?;
                    }
                    write!(f, "{},{}", fmt_num(a.re), fmt_num(a.im))?;
                }
                Ok(())
            }
            HoloMap::Compose { outer, inner } => write!(f, "compose({outer},{inner})"),
        }
    }
}

/// 100 deterministic points in the annulus 0.1 <= |z| <= 0.85.
pub fn probe_points() -> Vec<Complex64> {
    (0..100)
        .map(|k| {
            let r = 0.1 + 0.75 * ((k * 37) % 100) as f64 / 99.0;
            let a = 2.0 * std::f64::consts::PI * ((k * 61) % 100) as f64 / 100.0 + 0.1;
            Complex64::from_polar(r, a)
        })
        .collect()
}

/// One instance of every node kind, including a composition.
pub fn every_node_kind() -> Vec<HoloMap> {
    vec![
        HoloMap::Identity,
        HoloMap::constant(Complex64::new(0.2, -0.3)).unwrap(),
        HoloMap::dilate(Complex64::new(0.7, 0.2)).unwrap(),
        HoloMap::rotate(1.1).unwrap(),
        HoloMap::mobius(Complex64::new(0.3, 0.4)).unwrap(),
        HoloMap::power(3).unwrap(),
        HoloMap::poly(vec![
            Complex64::new(0.1, 0.0),
            Complex64::new(0.5, 0.1),
            Complex64::new(0.0, -0.2),
            Complex64::new(0.1, 0.0),
        ])
        .unwrap(),
        HoloMap::blaschke(vec![
            Complex64::new(0.5, 0.0),
            Complex64::new(-0.5, 0.0),
            Complex64::new(0.1, 0.6),
        ])
        .unwrap(),
        HoloMap::compose(
            HoloMap::power(2).unwrap(),
            HoloMap::mobius(Complex64::new(0.3, 0.0)).unwrap(),
        ),
    ]
}
