use serde::Serialize;

use super::{classify, tail_len, ClassifyPolicy, Denominator, Evidence, QuotientSeries};
use crate::error::{Error, Result};
use crate::monomials::Constants;

pub const DEFAULT_TAIL_FRACTION: f64 = 0.25;

/// `[E, c E]` with `E` the tail maximum of `q_j` and `c = (2L + 6e^(L-1)) / L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EssentialNormBand {
    #[serde(rename = "E_est")]
    pub e_est: f64,
    pub lower: f64,
    pub upper: f64,
    pub tail_fraction: f64,
    /// First index of the tail window.
    pub tail_start_j: u32,
    pub bounded_evidence: Evidence,
}

/// Essential-norm band from the last `tail_fraction` of a quotient series.
///
/// The tail maximum stands in for the limsup. Needs the exact-norm
/// denominator and a series not classified as unbounded; refuses when a tail
/// numerator diverged.
pub fn essential_norm_band(
    series: &QuotientSeries,
    tail_fraction: f64,
    policy: &ClassifyPolicy,
) -> Result<EssentialNormBand> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::Precondition(format!(
            "tail_fraction must lie in (0, 1], got {tail_fraction}"
        )));
    }
    if series.denominator != Denominator::ExactNorm {
        return Err(Error::Precondition(
            "the essential-norm band needs the exact_norm denominator".into(),
        ));
    }
    let class = classify(series, policy)?;
    let n = series.terms.len();
    let tail = &series.terms[n - tail_len(n, tail_fraction)..];
    if let Some(bad) = tail.iter().find(|t| t.sup.diverged) {
        return Err(Error::Refused(format!(
            "numerator diverged at j = {} (value {:e} at z = {}); the essential norm is not finite on this evidence",
            bad.j, bad.numerator, bad.sup.argmax
        )));
    }
    if class.bounded_evidence == Evidence::StrongNo {
        return Err(Error::Precondition(format!(
            "series is classified unbounded ({}); no band",
            class.notes
        )));
    }
    let e_est = tail.iter().map(|t| t.q).fold(0.0, f64::max);
    Ok(EssentialNormBand {
        e_est,
        lower: e_est,
        upper: Constants::get().c_upper_band * e_est,
        tail_fraction,
        tail_start_j: tail[0].j,
        bounded_evidence: class.bounded_evidence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::quotient_sequence;
    use crate::seminorm::GridConfig;
    use crate::symbols::{parse_symbol_spec, HoloMap};
    use crate::weights::Weight;

    fn fast() -> GridConfig {
        GridConfig {
            n_radii: 256,
            n_angles: 64,
            ..GridConfig::default()
        }
    }

    #[test]
    fn identity_band() {
        let s = quotient_sequence(
            &HoloMap::Identity,
            &Weight::vlog(),
            40,
            &GridConfig::default(),
            Denominator::ExactNorm,
            false,
        )
        .unwrap();
        let b = essential_norm_band(&s, DEFAULT_TAIL_FRACTION, &ClassifyPolicy::default()).unwrap();
        assert!((b.lower - 1.0).abs() < 1e-6);
        let c = Constants::get().c_upper_band;
        assert!((b.upper / b.lower - c).abs() <= 4.0 * f64::EPSILON * c);
        assert_eq!(b.tail_start_j, 31);
    }

    #[test]
    fn constant_band_is_zero() {
        let s = quotient_sequence(
            &parse_symbol_spec("const:0.5,0").unwrap(),
            &Weight::vlog(),
            12,
            &fast(),
            Denominator::ExactNorm,
            false,
        )
        .unwrap();
        let b = essential_norm_band(&s, DEFAULT_TAIL_FRACTION, &ClassifyPolicy::default()).unwrap();
        assert_eq!((b.lower, b.upper), (0.0, 0.0));
    }

    #[test]
    fn dilation_band_collapses() {
        let s = quotient_sequence(
            &parse_symbol_spec("dilate:0.9").unwrap(),
            &Weight::vlog(),
            200,
            &GridConfig::default(),
            Denominator::ExactNorm,
            false,
        )
        .unwrap();
        let b = essential_norm_band(&s, DEFAULT_TAIL_FRACTION, &ClassifyPolicy::default()).unwrap();
        // tail is j = 151..200; the maximum is q_151 = 0.9^151
        assert_eq!(b.tail_start_j, 151);
        assert!((b.e_est / 0.9f64.powi(151) - 1.0).abs() < 1e-5);
        assert!(b.upper < 1e-5);
    }

    #[test]
    fn preconditions() {
        let s = quotient_sequence(
            &HoloMap::Identity,
            &Weight::vlog(),
            10,
            &fast(),
            Denominator::LogJPlus1,
            false,
        )
        .unwrap();
        assert!(matches!(
            essential_norm_band(&s, 0.25, &ClassifyPolicy::default()),
            Err(Error::Precondition(_))
        ));
        let s = quotient_sequence(
            &HoloMap::Identity,
            &Weight::vlog(),
            10,
            &fast(),
            Denominator::ExactNorm,
            false,
        )
        .unwrap();
        assert!(essential_norm_band(&s, 0.0, &ClassifyPolicy::default()).is_err());
        assert!(essential_norm_band(&s, 1.5, &ClassifyPolicy::default()).is_err());
    }

    #[test]
    fn divergent_tail_refused() {
        // mu = 1 and a forced non-self-map: the maximiser is pinned to r_max
        let phi = parse_symbol_spec("poly:0,1.5").unwrap();
        let one = Weight::custom_radial("one", |_| 1.0);
        let cfg = GridConfig {
            divergence_cap: 1e3,
            ..fast()
        };
        let s = quotient_sequence(&phi, &one, 40, &cfg, Denominator::ExactNorm, true).unwrap();
        assert!(s.any_diverged());
        assert!(matches!(
            essential_norm_band(&s, 0.25, &ClassifyPolicy::default()),
            Err(Error::Refused(_))
        ));
    }
}
