use num_complex::Complex64;
use serde::Serialize;

use crate::grid::DiskSampler;
use crate::monomials::{r_seq, Constants};
use crate::symbols::HoloMap;

const ANNULI_R_MAX: f64 = 1.0 - 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnnulusBucket {
    pub j: u64,
    pub r_lo: f64,
    pub r_hi: f64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnuliHistogram {
    pub symbol_spec: String,
    pub j_max: u64,
    pub samples: usize,
    pub buckets: Vec<AnnulusBucket>,
    /// Samples with `|phi(z)| >= r_(j_max)`, including any with `|phi| >= 1`.
    pub overflow: u64,
}

impl AnnuliHistogram {
    pub fn total(&self) -> u64 {
        self.overflow + self.buckets.iter().map(|b| b.count).sum::<u64>()
    }
}

/// The `j >= 1` with `r_(j-1) <= rho < r_j`, or `None` when `rho >= 1`.
///
/// Since `r_j = j / (j + L)`, this is `floor(rho L / (1 - rho)) + 1` up to
/// rounding, which is corrected against [`r_seq`].
pub fn annulus_index(rho: f64) -> Option<u64> {
    if !(rho < 1.0) {
        return None;
    }
    let rho = rho.max(0.0);
    let l = Constants::get().l;
    let x = rho * l / (1.0 - rho);
    if x >= 9.0e18 {
        return None;
    }
    let mut j = x.floor() as u64 + 1;
    while j > 1 && rho < r_seq(j - 1) {
        j -= 1;
    }
    while rho >= r_seq(j) {
        j += 1;
    }
    Some(j)
}

/// Histogram of a deterministic disk sample by the annulus `A_j` holding `|phi(z)|`.
pub fn annuli_diagnostic(phi: &HoloMap, j_max: u64, samples: usize) -> AnnuliHistogram {
    let j_max = j_max.max(1);
    let mut buckets: Vec<AnnulusBucket> = (1..=j_max)
        .map(|j| AnnulusBucket {
            j,
            r_lo: r_seq(j - 1),
            r_hi: r_seq(j),
            count: 0,
        })
        .collect();
    let mut overflow = 0;
    let sampler = DiskSampler::new(samples, ANNULI_R_MAX);
    for (p, angle) in sampler.iter() {
        let rho = phi
            .value_and_deriv(Complex64::from_polar(p.r, angle))
            .0
            .norm();
        match annulus_index(rho) {
            Some(j) if j <= j_max => buckets[(j - 1) as usize].count += 1,
            _ => overflow += 1,
        }
    }
    AnnuliHistogram {
        symbol_spec: phi.to_string(),
        j_max,
        samples: sampler.len(),
        buckets,
        overflow,
    }
}
