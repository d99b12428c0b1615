use num_complex::Complex64;
use serde::Serialize;

use super::HoloMap;
use crate::grid::DiskSampler;

pub const MIN_VALIDATION_SAMPLES: usize = 1_000;
const VALIDATION_R_MAX: f64 = 1.0 - 1e-12;
const MODULUS_LIMIT: f64 = 1.0 - 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfMapReport {
    pub max_modulus: f64,
    pub arg_max: Complex64,
    /// The node kinds alone guarantee `phi(D) ⊆ D`.
    pub exact_kind: bool,
    pub pass: bool,
    pub samples: usize,
}

/// Samples `|phi|` on a boundary-clustered polar grid.
///
/// Passes when the sampled maximum stays below `1 - 1e-12` or when the tree
/// is built only from node kinds that are self-maps by construction. By the
/// maximum principle a grid reaching `r_max` is strong (not conclusive)
/// evidence for the interior.
pub fn validate_self_map(phi: &HoloMap, samples: usize) -> SelfMapReport {
    let samples = samples.max(MIN_VALIDATION_SAMPLES);
    let sampler = DiskSampler::new(samples, VALIDATION_R_MAX);
    let mut max_modulus = f64::NEG_INFINITY;
    let mut arg_max = Complex64::new(0.0, 0.0);
    for (p, angle) in sampler.iter() {
        let z = Complex64::from_polar(p.r, angle);
        let m = phi.value_and_deriv(z).0.norm();
        // NaN (a pole hit by the grid) counts as a failure
        if m > max_modulus || m.is_nan() {
            max_modulus = if m.is_nan() { f64::INFINITY } else { m };
            arg_max = z;
        }
    }
    let exact_kind = phi.is_exact_self_map();
    SelfMapReport {
        max_modulus,
        arg_max,
        exact_kind,
        pass: exact_kind || max_modulus <= MODULUS_LIMIT,
        samples,
    }
}
