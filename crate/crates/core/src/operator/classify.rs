use serde::Serialize;

use super::{Evidence, QuotientSeries};
use crate::error::{Error, Result};

pub const MIN_TERMS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassifyPolicy {
    pub stabilization_slack: f64,
    pub compact_threshold: f64,
}

impl Default for ClassifyPolicy {
    fn default() -> Self {
        ClassifyPolicy {
            stabilization_slack: 0.05,
            compact_threshold: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub bounded_evidence: Evidence,
    pub compact_evidence: Evidence,
    pub sup_q: f64,
    /// Max of `q_j` over the last quartile of indices.
    pub tail_max_q: f64,
    /// Least-squares slope of `log q_j` against `log j` on the tail; absent
    /// when some tail term is zero.
    pub tail_trend: Option<f64>,
    pub notes: String,
}

/// Number of terms in the final `fraction` of a series of length `n`.
pub fn tail_len(n: usize, fraction: f64) -> usize {
    ((n as f64 * fraction).ceil() as usize).clamp(1, n.max(1))
}

fn log_log_slope(points: &[(u32, f64)]) -> Option<f64> {
    if points.len() < 2 || points.iter().any(|&(_, q)| !(q > 0.0) || !q.is_finite()) {
        return None;
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|&(j, _)| (j as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, q)| q.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Some(sxy / sxx)
}

/// Boundedness and compactness evidence from a finite quotient series.
///
/// The tail is the last quartile of terms and the head is everything before
/// it. Bounded is `strong_yes` when the tail never climbs more than the slack
/// above the head supremum; `strong_no` when a term diverged or the tail
/// grows on a log-log scale and is still rising at `j_max`. Compact is
/// `strong_yes` when the tail is below the threshold and decaying, and
/// `strong_no` when the tail sits above it with a flat trend.
pub fn classify(series: &QuotientSeries, policy: &ClassifyPolicy) -> Result<Classification> {
    let n = series.terms.len();
    if n < MIN_TERMS {
        return Err(Error::Precondition(format!(
            "classification needs at least {MIN_TERMS} terms, got {n}"
        )));
    }
    let slack = policy.stabilization_slack;
    let t = tail_len(n, 0.25);
    let (head, tail) = series.terms.split_at(n - t);
    let qs = |terms: &[super::QuotientTerm]| terms.iter().map(|x| x.q).collect::<Vec<_>>();
    let head_sup = qs(head).into_iter().fold(0.0, f64::max);
    let tail_q = qs(tail);
    let tail_max_q = tail_q.iter().copied().fold(0.0, f64::max);
    let tail_min_q = tail_q.iter().copied().fold(f64::INFINITY, f64::min);
    let sup_q = head_sup.max(tail_max_q);
    let points: Vec<(u32, f64)> = tail.iter().map(|x| (x.j, x.q)).collect();
    let tail_trend = log_log_slope(&points);
    let diverged = series.any_diverged();
    let rising = n >= 2 && series.terms[n - 1].q > series.terms[n - 2].q;

    let bounded_evidence = if diverged || (tail_trend.is_some_and(|s| s > slack) && rising) {
        Evidence::StrongNo
    } else if tail_max_q <= (1.0 + slack) * head_sup {
        Evidence::StrongYes
    } else {
        Evidence::Inconclusive
    };

    let last_q = series.terms[n - 1].q;
    let decaying = match tail_trend {
        Some(s) => s < 0.0,
        None => last_q == 0.0,
    };
    let compact_evidence = if diverged {
        Evidence::StrongNo
    } else if tail_max_q <= policy.compact_threshold && decaying {
        Evidence::StrongYes
    } else if tail_min_q > policy.compact_threshold && tail_trend.is_some_and(|s| s.abs() <= slack)
    {
        Evidence::StrongNo
    } else {
        Evidence::Inconclusive
    };

    let trend_text = tail_trend.map_or_else(
        || "undefined (zero tail terms)".to_string(),
        |s| format!("{s:.6}"),
    );
    let notes = format!(
        "finite-j numerical evidence from j = 1..{}, not a proof; tail = last {t} terms, \
         head sup {head_sup:.6e}, tail max {tail_max_q:.6e}, log-log tail slope {trend_text}{}",
        series.terms[n - 1].j,
        if diverged {
            "; at least one numerator diverged"
        } else {
            ""
        }
    );

    Ok(Classification {
        bounded_evidence,
        compact_evidence,
        sup_q,
        tail_max_q,
        tail_trend,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{Denominator, QuotientTerm};
    use crate::seminorm::SupEstimate;
    use num_complex::Complex64;

    fn series(qs: &[f64], diverged_at: Option<usize>) -> QuotientSeries {
        QuotientSeries {
            symbol_spec: "test".into(),
            weight_spec: "vlog".into(),
            denominator: Denominator::ExactNorm,
            j_max: qs.len() as u32,
            validation: None,
            terms: qs
                .iter()
                .enumerate()
                .map(|(i, &q)| QuotientTerm {
                    j: i as u32 + 1,
                    q,
                    numerator: q,
                    denominator: 1.0,
                    sup: SupEstimate {
                        value: q,
                        argmax: Complex64::new(0.5, 0.0),
                        boundary_dominated: diverged_at == Some(i),
                        diverged: diverged_at == Some(i),
                        evaluations: 1,
                    },
                })
                .collect(),
        }
    }

    #[test]
    fn flat_series() {
        let c = classify(&series(&[1.0; 40], None), &ClassifyPolicy::default()).unwrap();
        assert_eq!(c.bounded_evidence, Evidence::StrongYes);
        assert_eq!(c.compact_evidence, Evidence::StrongNo);
        assert_eq!(c.tail_trend, Some(0.0));
        assert!(c.notes.contains("not a proof"));
    }

    #[test]
    fn geometric_decay() {
        let qs: Vec<f64> = (1..=100).map(|j| 0.5f64.powi(j)).collect();
        let c = classify(&series(&qs, None), &ClassifyPolicy::default()).unwrap();
        assert_eq!(c.bounded_evidence, Evidence::StrongYes);
        assert_eq!(c.compact_evidence, Evidence::StrongYes);
        assert_eq!(c.sup_q, 0.5);
    }

    #[test]
    fn zeros() {
        let c = classify(&series(&[0.0; 10], None), &ClassifyPolicy::default()).unwrap();
        assert_eq!(c.compact_evidence, Evidence::StrongYes);
        assert_eq!(c.bounded_evidence, Evidence::StrongYes);
        assert_eq!(c.tail_trend, None);
    }

    #[test]
    fn growth_and_divergence() {
        let qs: Vec<f64> = (1..=64).map(|j| j as f64).collect();
        let c = classify(&series(&qs, None), &ClassifyPolicy::default()).unwrap();
        assert_eq!(c.bounded_evidence, Evidence::StrongNo);
        let c = classify(&series(&[1.0; 20], Some(17)), &ClassifyPolicy::default()).unwrap();
        assert_eq!(c.bounded_evidence, Evidence::StrongNo);
        assert_eq!(c.compact_evidence, Evidence::StrongNo);
    }

    #[test]
    fn log_growth_and_late_step() {
        // q ~ log j: tail slope about 1 / log j, above the slack
        let qs: Vec<f64> = (1..=200).map(|j| (j as f64 + 1.0).ln()).collect();
        let c = classify(&series(&qs, None), &ClassifyPolicy::default()).unwrap();
        assert_eq!(c.bounded_evidence, Evidence::StrongNo);
        // a flat tail 10% above the head is neither
        let qs: Vec<f64> = (1..=40).map(|j| if j > 30 { 1.1 } else { 1.0 }).collect();
        let c = classify(&series(&qs, None), &ClassifyPolicy::default()).unwrap();
        assert_eq!(c.bounded_evidence, Evidence::Inconclusive);
        assert_eq!(c.compact_evidence, Evidence::StrongNo);
    }

    #[test]
    fn too_short() {
        assert!(matches!(
            classify(&series(&[1.0; 7], None), &ClassifyPolicy::default()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn invariant_sup_over_tail() {
        let qs: Vec<f64> = (1..=30).map(|j| ((j * 7919) % 13) as f64 / 13.0).collect();
        let c = classify(&series(&qs, None), &ClassifyPolicy::default()).unwrap();
        assert!(c.sup_q >= c.tail_max_q && c.tail_max_q >= 0.0);
    }
}
