//! Boundary-clustered radius grids and a golden-section maximiser.
//!
//! Everything extremal in this crate happens near `|z| = 1`, so radii are
//! sampled uniformly in `log(1 - r)` rather than in `r`.

/// Radius `r_i = 1 - 2^(-14 i / n)` of the equivalence grid, `i = 0..=n`.
pub fn clustered_radius(i: usize, n: usize) -> f64 {
    1.0 - clustered_gap(i, n)
}

/// The complement `1 - r_i` of [`clustered_radius`], computed without cancellation.
pub fn clustered_gap(i: usize, n: usize) -> f64 {
    (-14.0 * i as f64 / n as f64).exp2()
}

/// Maps a unit parameter `u in [0, 1]` onto `[0, r_max]` with `1 - r = (1 - r_max)^u`.
///
/// This is the mapping used by the semi-norm engine and the disk samplers.
#[derive(Debug, Clone, Copy)]
pub struct RadialMap {
    log_gap_min: f64,
}

/// A sampled radius together with its exact complement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialPoint {
    pub r: f64,
    /// `1 - r`, exact for the stored `r`.
    pub gap: f64,
}

impl RadialMap {
    pub fn new(r_max: f64) -> Self {
        debug_assert!(r_max > 0.0 && r_max < 1.0);
        RadialMap {
            log_gap_min: (1.0 - r_max).ln(),
        }
    }

    pub fn point(&self, u: f64) -> RadialPoint {
        let u = u.clamp(0.0, 1.0);
        let r = 1.0 - (u * self.log_gap_min).exp();
        // 1 - r is exact (Sterbenz) once r >= 1/2, and harmless below.
        RadialPoint { r, gap: 1.0 - r }
    }
}

/// Deterministic boundary-clustered polar sample of the disk with exactly
/// `samples` points: `n_angles = floor(sqrt(samples))` angles per ring and as
/// many rings as needed, radii spaced by [`RadialMap`].
#[derive(Debug, Clone, Copy)]
pub struct DiskSampler {
    samples: usize,
    n_radii: usize,
    n_angles: usize,
    map: RadialMap,
}

impl DiskSampler {
    pub fn new(samples: usize, r_max: f64) -> Self {
        let samples = samples.max(1);
        let n_angles = ((samples as f64).sqrt().floor() as usize).max(1);
        let n_radii = samples.div_ceil(n_angles);
        DiskSampler {
            samples,
            n_radii,
            n_angles,
            map: RadialMap::new(r_max),
        }
    }

    pub fn len(&self) -> usize {
        self.samples
    }

    pub fn is_empty(&self) -> bool {
        self.samples == 0
    }

    /// The `i`-th sample as `(radius, angle)`.
    pub fn point(&self, i: usize) -> (RadialPoint, f64) {
        let ring = i / self.n_angles;
        let k = i % self.n_angles;
        let u = if self.n_radii > 1 {
            ring as f64 / (self.n_radii - 1) as f64
        } else {
            1.0
        };
        let angle = std::f64::consts::TAU * k as f64 / self.n_angles as f64;
        (self.map.point(u), angle)
    }

    pub fn iter(&self) -> impl Iterator<Item = (RadialPoint, f64)> + '_ {
        (0..self.samples).map(move |i| self.point(i))
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a maximum of `f` on `[a, b]`.
///
/// Returns the best evaluated `(x, f(x))`; the endpoints themselves are never
/// evaluated. Stops when the bracket is narrower than `xtol` or after
/// `max_iter` iterations.
pub fn golden_max<F>(f: F, mut a: f64, mut b: f64, xtol: f64, max_iter: usize) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let (mut best_x, mut best_f) = if fd > fc { (d, fd) } else { (c, fc) };
    for _ in 0..max_iter {
        if (b - a).abs() <= xtol {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
            if fc > best_f {
                best_x = c;
                best_f = fc;
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
            if fd > best_f {
                best_x = d;
                best_f = fd;
            }
        }
    }
    (best_x, best_f)
}

/// Formats `x` like C's `%.17g`: 17 significant digits, trailing zeros trimmed.
pub fn fmt_g17(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..17).contains(&exp) {
        let fixed = format!("{:.*}", (16 - exp) as usize, x);
        trim_zeros(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mantissa), sign, exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
