use blochlab::monomials::{monomial_log_norm, NormTable};
use blochlab::operator::{
    classify, direct_transfer_check, essential_norm_band, quotient_sequence, standard_test_family,
    ClassifyPolicy, Denominator, Evidence,
};
use blochlab::seminorm::GridConfig;
use blochlab::symbols::parse_symbol_spec;
use blochlab::weights::Weight;

#[test]
fn log_denominator_factor_stays_in_band() {
    let lo = (-1f64).exp() - 0.05;
    let hi = 3f64.ln() / 2f64.ln() + 0.05;
    let table = NormTable::new();
    for j in 1..=10_000u64 {
        let f = table.norm(j).unwrap() / (j as f64 + 1.0).ln();
        assert!(f > lo && f < hi, "j={j}: {f}");
    }
    // j = 1 attains log 3 / log 2
    let f1 = monomial_log_norm(1).unwrap().norm / 2f64.ln();
    assert!((f1 - 3f64.ln() / 2f64.ln()).abs() < 1e-15);
}

#[test]
fn compact_verdict_implies_small_band() {
    let policy = ClassifyPolicy::default();
    for spec in [
        "dilate:0.5",
        "compose(rotate:2,dilate:0.6)",
        "const:0.2,0.2",
    ] {
        let phi = parse_symbol_spec(spec).unwrap();
        let s = quotient_sequence(
            &phi,
            &Weight::vlog(),
            100,
            &GridConfig::default(),
            Denominator::ExactNorm,
            false,
        )
        .unwrap();
        let c = classify(&s, &policy).unwrap();
        assert_eq!(c.compact_evidence, Evidence::StrongYes, "{spec}");
        let b = essential_norm_band(&s, 0.25, &policy).unwrap();
        assert!(b.lower <= policy.compact_threshold, "{spec}: {}", b.lower);
    }
}

#[test]
fn transfer_constant_finite_when_bounded() {
    let phi = parse_symbol_spec("compose(power:2,mobius:0.3,0)").unwrap();
    let cfg = GridConfig {
        n_radii: 256,
        n_angles: 128,
        ..GridConfig::default()
    };
    let s = quotient_sequence(
        &phi,
        &Weight::vlog(),
        24,
        &cfg,
        Denominator::ExactNorm,
        false,
    )
    .unwrap();
    let c = classify(&s, &ClassifyPolicy::default()).unwrap();
    let fam = standard_test_family(&[1, 4, 12]).unwrap();
    let rep =
        direct_transfer_check(&phi, &Weight::vlog(), &fam, &cfg, Some(c.bounded_evidence)).unwrap();
    assert!(rep.consistent);
    assert!(rep.c_report.is_finite() && rep.c_report > 0.0);
    // F_j(0) = 0: the ratio for F_j equals q_j of the same symbol
    for (entry, j) in rep.entries.iter().step_by(2).zip([1usize, 4, 12]) {
        let q = s.terms[j - 1].q;
        assert!(
            (entry.ratio / q - 1.0).abs() < 1e-9,
            "j={j}: {} vs {q}",
            entry.ratio
        );
    }
}

#[test]
fn mobius_series_is_reported_with_evidence() {
    let phi = parse_symbol_spec("mobius:0.5,0.5").unwrap();
    let s = quotient_sequence(
        &phi,
        &Weight::vlog(),
        40,
        &GridConfig::default(),
        Denominator::ExactNorm,
        false,
    )
    .unwrap();
    assert!(s.validation.is_none());
    assert!(s
        .terms
        .iter()
        .all(|t| t.q.is_finite() && t.q > 0.0 && !t.sup.diverged));
    let c = classify(&s, &ClassifyPolicy::default()).unwrap();
    assert!(c.sup_q >= c.tail_max_q);
    assert!(c.notes.contains("not a proof"));
}
