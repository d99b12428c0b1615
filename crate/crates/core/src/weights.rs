//! Weight functions on the unit disk and sampled equivalence constants.
//!
//! Built-in weights are radial:
//!
//! * `Alpha(a)`: `(1 - r^2)^a`, the alpha-Bloch weight (`classic` is `a = 1`);
//! * `LogK(k, theta)`: `(1 - r^k) log(theta / (1 - r^k))`, with `vlog = LogK(1, 3)`.
//!
//! Custom weights wrap a user closure and must say whether they are radial.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{clustered_gap, clustered_radius};

/// Above this radius `1 - r^k` is evaluated through `expm1`/`ln_1p`.
const NEAR_BOUNDARY: f64 = 1.0 - 1e-8;

type PlanarFn = dyn Fn(Complex64) -> f64 + Send + Sync;

#[derive(Clone)]
pub struct CustomWeight {
    name: String,
    radial: bool,
    func: Arc<PlanarFn>,
}

#[derive(Clone)]
pub enum WeightKind {
    Alpha(f64),
    LogK { k: u32, theta: f64 },
    Custom(CustomWeight),
}

/// An evaluable, strictly positive, bounded weight on the open unit disk.
#[derive(Clone)]
pub struct Weight {
    kind: WeightKind,
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Weight({})", self.spec())
    }
}

impl Weight {
    pub fn alpha(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::Domain(format!(
                "alpha must be a finite nonnegative real, got {alpha}"
            )));
        }
        Ok(Weight {
            kind: WeightKind::Alpha(alpha),
        })
    }

    pub fn log_k(k: u32, theta: f64) -> Result<Self> {
        if k != 1 && k != 2 {
            return Err(Error::Domain(format!("k must be 1 or 2, got {k}")));
        }
        if !(theta.is_finite() && theta > 1.0) {
            return Err(Error::Domain(format!(
                "theta must be a finite real > 1, got {theta}"
            )));
        }
        Ok(Weight {
            kind: WeightKind::LogK { k, theta },
        })
    }

    /// The log-Bloch weight `(1 - |z|) log(3 / (1 - |z|))`.
    pub fn vlog() -> Self {
        Weight {
            kind: WeightKind::LogK { k: 1, theta: 3.0 },
        }
    }

    /// A custom radial weight given by its radial profile.
    pub fn custom_radial<F>(name: impl Into<String>, profile: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Weight {
            kind: WeightKind::Custom(CustomWeight {
                name: name.into(),
                radial: true,
                func: Arc::new(move |z: Complex64| profile(z.norm())),
            }),
        }
    }

    /// A custom weight evaluated at the complex point. Only the 2-D semi-norm
    /// engine accepts these.
    pub fn custom_planar<F>(name: impl Into<String>, func: F) -> Self
    where
        F: Fn(Complex64) -> f64 + Send + Sync + 'static,
    {
        Weight {
            kind: WeightKind::Custom(CustomWeight {
                name: name.into(),
                radial: false,
                func: Arc::new(func),
            }),
        }
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    pub fn is_radial(&self) -> bool {
        match &self.kind {
            WeightKind::Custom(c) => c.radial,
            _ => true,
        }
    }

    /// Canonical spec text; parses back to an identical weight for built-ins.
    pub fn spec(&self) -> String {
        match &self.kind {
            WeightKind::Alpha(a) => format!("alpha:{a}"),
            WeightKind::LogK { k, theta } => format!("logk:{k},{theta}"),
            WeightKind::Custom(c) => format!("custom:{}", c.name),
        }
    }

    /// Weight at radius `r in [0, 1)`.
    pub fn eval(&self, r: f64) -> Result<f64> {
        check_radius(r)?;
        match &self.kind {
            WeightKind::Alpha(a) => Ok(alpha_profile(*a, one_minus_pow(r, 2))),
            WeightKind::LogK { k, theta } => Ok(log_profile(*theta, one_minus_pow(r, *k))),
            WeightKind::Custom(c) => {
                if !c.radial {
                    return Err(Error::Unsupported(format!(
                        "custom weight `{}` is not radial; evaluate it at a complex point",
                        c.name
                    )));
                }
                custom_value(c, Complex64::new(r, 0.0))
            }
        }
    }

    /// Weight at a radius given by its complement `gap = 1 - r`, `gap in (0, 1]`.
    ///
    /// Avoids the cancellation in `1 - r^k` when the caller already holds `1 - r`.
    pub fn eval_gap(&self, gap: f64) -> Result<f64> {
        if !(gap > 0.0 && gap <= 1.0) {
            return Err(Error::Domain(format!(
                "1 - r must lie in (0, 1], got {gap}"
            )));
        }
        match &self.kind {
            WeightKind::Alpha(a) => Ok(alpha_profile(*a, gap * (2.0 - gap))),
            WeightKind::LogK { k: 1, theta } => Ok(log_profile(*theta, gap)),
            WeightKind::LogK { theta, .. } => Ok(log_profile(*theta, gap * (2.0 - gap))),
            WeightKind::Custom(_) => self.eval(1.0 - gap),
        }
    }

    /// Weight at a complex point of the disk.
    pub fn eval_at(&self, z: Complex64) -> Result<f64> {
        match &self.kind {
            WeightKind::Custom(c) if !c.radial => {
                let r = z.norm();
                check_radius(r)?;
                custom_value(c, z)
            }
            _ => self.eval(z.norm()),
        }
    }

    /// Weight at `z = r e^{i angle}` where the caller also supplies `gap = 1 - r`.
    pub(crate) fn eval_polar(&self, gap: f64, z: Complex64) -> Result<f64> {
        match &self.kind {
            WeightKind::Custom(c) if !c.radial => custom_value(c, z),
            _ => self.eval_gap(gap),
        }
    }
}

fn check_radius(r: f64) -> Result<()> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::Domain(format!("radius must lie in [0, 1), got {r}")));
    }
    Ok(())
}

fn custom_value(c: &CustomWeight, z: Complex64) -> Result<f64> {
    let v = (c.func)(z);
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::Domain(format!(
            "custom weight `{}` returned {v} at {z}; weights must be finite and positive",
            c.name
        )))
    }
}

/// `1 - r^k` for `r in [0, 1)`.
pub fn one_minus_pow(r: f64, k: u32) -> f64 {
    if k == 1 {
        1.0 - r
    } else if r > NEAR_BOUNDARY {
        -(k as f64 * (-(1.0 - r)).ln_1p()).exp_m1()
    } else {
        1.0 - r.powi(k as i32)
    }
}

fn alpha_profile(alpha: f64, one_minus_r2: f64) -> f64 {
    if alpha == 0.0 {
        1.0
    } else {
        one_minus_r2.powf(alpha)
    }
}

fn log_profile(theta: f64, t: f64) -> f64 {
    t * (theta / t).ln()
}

/// `mu_theta(t) = t log(theta / t)` on `(0, 1]`.
pub fn mu_theta(theta: f64, t: f64) -> f64 {
    log_profile(theta, t)
}

/// Parses `alpha:<a>`, `logk:<k>,<theta>`, `vlog` or `classic`.
pub fn parse_weight_spec(text: &str) -> Result<Weight> {
    let trimmed = text.trim();
    let offset = text.len() - text.trim_start().len();
    match trimmed {
        "vlog" => return Ok(Weight::vlog()),
        "classic" => return Weight::alpha(1.0),
        _ => {}
    }
    let Some((head, args)) = trimmed.split_once(':') else {
        return Err(Error::parse(
            offset,
            trimmed,
            "expected `vlog`, `classic`, `alpha:<a>` or `logk:<k>,<theta>`",
        ));
    };
    let args_pos = offset + head.len() + 1;
    match head {
        "alpha" => {
            let a = parse_number(args, args_pos)?;
            Weight::alpha(a)
        }
        "logk" => {
            let Some((k_txt, theta_txt)) = args.split_once(',') else {
                return Err(Error::parse(args_pos, args, "expected `<k>,<theta>`"));
            };
            let k: u32 = k_txt
                .trim()
                .parse()
                .map_err(|_| Error::parse(args_pos, k_txt, "k must be a positive integer"))?;
            let theta = parse_number(theta_txt, args_pos + k_txt.len() + 1)?;
            Weight::log_k(k, theta)
        }
        other => Err(Error::parse(offset, other, "unknown weight kind")),
    }
}

fn parse_number(token: &str, position: usize) -> Result<f64> {
    let t = token.trim();
    let v: f64 = t
        .parse()
        .map_err(|_| Error::parse(position, token, "expected a real number"))?;
    if !v.is_finite() {
        return Err(Error::parse(
            position,
            token,
            "expected a finite real number",
        ));
    }
    Ok(v)
}

/// Sampled bounds of `w1 / w2` on the boundary-clustered grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub argmin_r: f64,
    pub argmax_r: f64,
    pub grid_size: usize,
}

/// Min and max of `w1(r) / w2(r)` over `r_i = 1 - 2^(-14 i / n)`, `i = 0..=n`.
pub fn equivalence_constants(
    w1: &Weight,
    w2: &Weight,
    grid_size: usize,
) -> Result<EquivalenceReport> {
    for w in [w1, w2] {
        if !w.is_radial() {
            return Err(Error::Unsupported(format!(
                "equivalence constants need radial weights; `{}` is not radial",
                w.spec()
            )));
        }
    }
    if grid_size < 2 {
        return Err(Error::Precondition(format!(
            "grid_size must be >= 2, got {grid_size}"
        )));
    }
    let mut report = EquivalenceReport {
        ratio_min: f64::INFINITY,
        ratio_max: f64::NEG_INFINITY,
        argmin_r: 0.0,
        argmax_r: 0.0,
        grid_size,
    };
    for i in 0..=grid_size {
        let gap = clustered_gap(i, grid_size);
        let ratio = w1.eval_gap(gap)? / w2.eval_gap(gap)?;
        let r = clustered_radius(i, grid_size);
        if ratio < report.ratio_min {
            report.ratio_min = ratio;
            report.argmin_r = r;
        }
        if ratio > report.ratio_max {
            report.ratio_max = ratio;
            report.argmax_r = r;
        }
    }
    Ok(report)
}

/// Outcome of the sandwich `mu(1-t^2)/2 <= mu(1-t) <= mu(1-t^2)` on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SquareCheck {
    pub holds: bool,
    /// Smallest of the two slacks over the grid; negative means violated.
    pub min_slack: f64,
    pub argmin_t: f64,
    pub grid_size: usize,
}

/// Rounding allowance on the O(1) profile values.
const SANDWICH_TOL: f64 = 1e-14;

/// Checks `mu_theta(1-t^2)/2 <= mu_theta(1-t) <= mu_theta(1-t^2)` for `t` on the
/// boundary-clustered grid. Requires `theta >= e`, where `mu_theta` is increasing.
pub fn check_square_equivalence(theta: f64, grid_size: usize) -> Result<SquareCheck> {
    if !(theta >= std::f64::consts::E) {
        return Err(Error::Precondition(format!(
            "theta must be >= e for mu_theta to be increasing on (0, 1], got {theta}"
        )));
    }
    if grid_size < 2 {
        return Err(Error::Precondition(format!(
            "grid_size must be >= 2, got {grid_size}"
        )));
    }
    let mut min_slack = f64::INFINITY;
    let mut argmin_t = 0.0;
    for i in 0..=grid_size {
        let one_minus_t = clustered_gap(i, grid_size);
        let one_minus_t2 = one_minus_t * (2.0 - one_minus_t);
        let mid = mu_theta(theta, one_minus_t);
        let hi = mu_theta(theta, one_minus_t2);
        let slack = (mid - 0.5 * hi).min(hi - mid);
        if slack < min_slack {
            min_slack = slack;
            argmin_t = clustered_radius(i, grid_size);
        }
    }
    Ok(SquareCheck {
        holds: min_slack >= -SANDWICH_TOL,
        min_slack,
        argmin_t,
        grid_size,
    })
}
