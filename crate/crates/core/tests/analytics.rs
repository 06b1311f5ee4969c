use proptest::prelude::*;
use rimay_core::analytics::{
    build_report, normal_cdf, pairwise_ztests, render_tables, saturation, summarize, ztest,
    AnalyticsError, CauseCounts, CorpusReport, ZTestInput, DEFAULT_ALPHA,
};
use rimay_core::parser::{FailureClass, HumanCause, RecordSummary};

/// Reference rows: (id, total, representable, cause1, cause2, cause3).
const REFERENCE_COUNTS: [(&str, usize, usize, usize, usize, usize); 4] = [
    ("SRS 1", 87, 65, 11, 9, 2),
    ("SRS 2", 113, 96, 6, 8, 3),
    ("SRS 3", 192, 180, 2, 7, 3),
    ("SRS 4", 68, 64, 0, 4, 0),
];

/// Reference (z, p) for the six pairs in i<j order.
const REFERENCE_TESTS: [(f64, f64); 6] = [
    (-1.81, 0.03),
    (-4.50, 3.35e-6),
    (-3.21, 6.67e-4),
    (-2.53, 0.01),
    (-1.86, 0.03),
    (-0.11, 0.46),
];

fn reference_reports() -> Vec<CorpusReport> {
    REFERENCE_COUNTS
        .iter()
        .map(|&(id, n, x, c1, c2, c3)| {
            CorpusReport::from_counts(id, n, x, CauseCounts { cause1: c1, cause2: c2, cause3: c3 }).unwrap()
        })
        .collect()
}

// Oracle: composite Simpson integration of the standard normal density.
fn phi_oracle(z: f64) -> f64 {
    let density = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let (a, b) = if z < 0.0 { (z, 0.0) } else { (0.0, z) };
    let n = 20_000;
    let h = (b - a) / n as f64;
    let mut s = density(a) + density(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * density(a + k as f64 * h);
    }
    let area = s * h / 3.0;
    if z < 0.0 {
        0.5 - area
    } else {
        0.5 + area
    }
}

#[test]
fn pairwise_tests_match_reference_values() {
    let tests = pairwise_ztests(&reference_reports(), DEFAULT_ALPHA).unwrap();
    assert_eq!(tests.len(), 6);
    let pairs: Vec<_> = tests.iter().map(|t| (t.srs_i.as_str(), t.srs_j.as_str())).collect();
    assert_eq!(
        pairs,
        [
            ("SRS 1", "SRS 2"),
            ("SRS 1", "SRS 3"),
            ("SRS 1", "SRS 4"),
            ("SRS 2", "SRS 3"),
            ("SRS 2", "SRS 4"),
            ("SRS 3", "SRS 4")
        ]
    );
    for (k, (t, &(z, p))) in tests.iter().zip(REFERENCE_TESTS.iter()).enumerate() {
        assert!((t.result.z - z).abs() <= 0.02, "test {}: z {} vs {z}", k + 1, t.result.z);
        assert!((t.result.p_value - p).abs() <= 0.01, "test {}: p {} vs {p}", k + 1, t.result.p_value);
        assert_eq!(t.result.reject_h0, k < 5, "test {}", k + 1);
    }
    assert!((tests[1].result.p_value - 3.35e-6).abs() < 1e-6);
}

#[test]
fn ztest_examples() {
    let r = ztest(ZTestInput { n1: 87, x1: 65, n2: 113, x2: 96 }, DEFAULT_ALPHA).unwrap();
    assert!((r.z + 1.81).abs() <= 0.02 && r.reject_h0);
    let r = ztest(ZTestInput { n1: 192, x1: 180, n2: 68, x2: 64 }, DEFAULT_ALPHA).unwrap();
    assert!((r.z + 0.11).abs() <= 0.02 && !r.reject_h0);
    let r = ztest(ZTestInput { n1: 100, x1: 50, n2: 100, x2: 50 }, DEFAULT_ALPHA).unwrap();
    assert_eq!(r.z, 0.0);
    assert!((r.p_value - 0.5).abs() < 1e-12);
    assert!(!r.reject_h0);
}

#[test]
fn ztest_formula_matches_hand_computation() {
    let (n1, x1, n2, x2) = (87.0, 65.0, 113.0, 96.0);
    let p1: f64 = x1 / n1;
    let p2: f64 = x2 / n2;
    let pb: f64 = (x1 + x2) / (n1 + n2);
    let z = (p1 - p2) / (pb * (1.0 - pb) * (1.0 / n1 + 1.0 / n2)).sqrt();
    let r = ztest(ZTestInput { n1: 87, x1: 65, n2: 113, x2: 96 }, DEFAULT_ALPHA).unwrap();
    assert!((r.z - z).abs() < 1e-12);
    assert!((r.p_bar - pb).abs() < 1e-15);
}

#[test]
fn alpha_override_changes_decision() {
    let input = ZTestInput { n1: 87, x1: 65, n2: 113, x2: 96 };
    assert!(ztest(input, 0.05).unwrap().reject_h0);
    assert!(!ztest(input, 0.01).unwrap().reject_h0);
}

#[test]
fn ztest_rejects_invalid_input() {
    let bad = [
        ZTestInput { n1: 0, x1: 0, n2: 5, x2: 1 },
        ZTestInput { n1: 5, x1: 6, n2: 5, x2: 1 },
        ZTestInput { n1: 5, x1: 1, n2: 5, x2: 9 },
    ];
    for input in bad {
        assert!(matches!(ztest(input, DEFAULT_ALPHA), Err(AnalyticsError::InvalidInput(_))));
    }
    let ok = ZTestInput { n1: 5, x1: 1, n2: 5, x2: 2 };
    assert!(ztest(ok, 0.0).is_err());
    assert!(ztest(ok, 1.0).is_err());
}

#[test]
fn normal_cdf_matches_quadrature() {
    let mut z = -6.0;
    while z <= 6.0 {
        let (got, want) = (normal_cdf(z), phi_oracle(z));
        assert!((got - want).abs() <= 1e-7, "z={z}: {got} vs {want}");
        z += 0.05;
    }
}

#[test]
fn reference_percentages() {
    let want = [74.7, 85.0, 93.8, 94.1];
    for (r, w) in reference_reports().iter().zip(want) {
        assert!((r.percent_representable * 100.0 - w).abs() <= 0.05, "{}: {}", r.srs_id, r.percent_representable);
    }
    let total: usize = reference_reports().iter().map(|r| r.total).sum();
    let repr: usize = reference_reports().iter().map(|r| r.representable).sum();
    assert_eq!((total, repr), (460, 405));
    assert_eq!((repr as f64 / total as f64 * 100.0).round(), 88.0);
}

#[test]
fn saturation_examples() {
    let reports = reference_reports();
    for k in 1..=4 {
        let s = saturation(&reports[..k]).unwrap();
        assert_eq!(s.saturated, k == 4, "after {k} reports");
    }
    let s = saturation(&reports).unwrap();
    let seq: Vec<usize> = s.per_srs.iter().map(|(_, c)| *c).collect();
    assert_eq!(seq, [11, 6, 2, 0]);

    let one = CorpusReport::from_counts("a", 10, 7, CauseCounts { cause1: 3, ..Default::default() }).unwrap();
    assert!(!saturation(&[one.clone()]).unwrap().saturated);

    let zero = CorpusReport::from_counts("z", 10, 10, CauseCounts::default()).unwrap();
    assert!(saturation(&[zero.clone(), one.clone(), zero.clone()]).unwrap().saturated);
    assert!(!saturation(&[zero.clone(), one]).unwrap().saturated);
    assert!(saturation(&[]).is_err());
}

#[test]
fn pairwise_edge_cases() {
    let reports = reference_reports();
    assert_eq!(pairwise_ztests(&reports[..2], DEFAULT_ALPHA).unwrap().len(), 1);
    assert!(pairwise_ztests(&reports[..1], DEFAULT_ALPHA).is_err());
    let dup = vec![reports[0].clone(); 3];
    for t in pairwise_ztests(&dup, DEFAULT_ALPHA).unwrap() {
        assert_eq!(t.result.z, 0.0);
    }
}

#[test]
fn scale_check_increases_magnitude() {
    for (n1, x1, n2, x2) in [(87, 65, 113, 96), (192, 180, 68, 64), (50, 20, 40, 30)] {
        let base = ztest(ZTestInput { n1, x1, n2, x2 }, DEFAULT_ALPHA).unwrap().z.abs();
        for k in [2, 3, 10] {
            let scaled = ZTestInput { n1: n1 * k, x1: x1 * k, n2: n2 * k, x2: x2 * k };
            assert!(ztest(scaled, DEFAULT_ALPHA).unwrap().z.abs() > base);
        }
    }
}

fn summary(id: usize, representable: bool, auto: Option<FailureClass>, annotation: Option<HumanCause>) -> RecordSummary {
    RecordSummary { id: format!("R{id}"), representable, auto_cause: auto, annotation }
}

#[test]
fn build_report_from_records() {
    let mut records = Vec::new();
    for i in 0..65 {
        records.push(summary(i, true, None, None));
    }
    for i in 0..11 {
        records.push(summary(100 + i, false, Some(FailureClass::Cause1), None));
    }
    for i in 0..9 {
        records.push(summary(200 + i, false, Some(FailureClass::Cause2), None));
    }
    // Annotation wins over the automatic class.
    records.push(summary(300, false, Some(FailureClass::Cause2), Some(HumanCause::Cause3)));
    records.push(summary(301, false, Some(FailureClass::Unknown), Some(HumanCause::Cause3)));
    let r = build_report(&records, "SRS 1").unwrap();
    assert_eq!((r.total, r.representable), (87, 65));
    assert_eq!(r.cause_counts, CauseCounts { cause1: 11, cause2: 9, cause3: 2 });
    assert!((r.percent_representable * 100.0 - 74.7).abs() <= 0.05);
}

#[test]
fn build_report_errors() {
    assert!(matches!(build_report(&[], "x"), Err(AnalyticsError::Empty(_))));
    let records = [
        summary(1, true, None, None),
        summary(2, false, Some(FailureClass::Unknown), None),
        summary(3, false, None, None),
    ];
    match build_report(&records, "x") {
        Err(AnalyticsError::IncompleteAnnotation(ids)) => assert_eq!(ids, ["R2", "R3"]),
        other => panic!("{other:?}"),
    }
}

#[test]
fn rendered_tables_have_every_row() {
    let text = render_tables(&summarize(reference_reports(), DEFAULT_ALPHA).unwrap());
    for needle in ["74.7", "85.0", "93.8", "94.1", "-1.81", "-4.50", "3.35e-6", "-0.11", "saturated: yes"] {
        assert!(text.contains(needle), "missing {needle} in\n{text}");
    }
    assert_eq!(text.matches("reject").count(), 5);
    assert_eq!(text.matches("retain").count(), 1);
    let single = render_tables(&summarize(reference_reports()[..1].to_vec(), DEFAULT_ALPHA).unwrap());
    assert!(!single.contains("p-value"));
}

fn input() -> impl Strategy<Value = ZTestInput> {
    (1usize..400, 1usize..400)
        .prop_flat_map(|(n1, n2)| (Just(n1), 0..=n1, Just(n2), 0..=n2))
        .prop_map(|(n1, x1, n2, x2)| ZTestInput { n1, x1, n2, x2 })
        .prop_filter("non-degenerate", |i| {
            let s = i.x1 + i.x2;
            s > 0 && s < i.n1 + i.n2
        })
}

proptest! {
    #[test]
    fn ztest_antisymmetry(i in input()) {
        let a = ztest(i, DEFAULT_ALPHA).unwrap();
        let b = ztest(ZTestInput { n1: i.n2, x1: i.x2, n2: i.n1, x2: i.x1 }, DEFAULT_ALPHA).unwrap();
        prop_assert!((a.z + b.z).abs() < 1e-9);
        prop_assert!((a.p_value - (1.0 - b.p_value)).abs() < 1e-9);
    }

    #[test]
    fn ztest_reject_iff_below_alpha(i in input(), alpha in 0.001f64..0.5) {
        let r = ztest(i, alpha).unwrap();
        prop_assert_eq!(r.reject_h0, r.p_value < alpha);
        prop_assert!((0.0..=1.0).contains(&r.p_value));
    }

    #[test]
    fn build_report_conserves_counts(kinds in prop::collection::vec(0u8..6, 1..200)) {
        let records: Vec<_> = kinds
            .iter()
            .enumerate()
            .map(|(i, k)| match k {
                0 | 1 => summary(i, true, None, None),
                2 => summary(i, false, Some(FailureClass::Cause1), None),
                3 => summary(i, false, Some(FailureClass::Cause2), None),
                4 => summary(i, false, Some(FailureClass::Unknown), Some(HumanCause::Cause3)),
                _ => summary(i, false, Some(FailureClass::Cause1), Some(HumanCause::Cause2)),
            })
            .collect();
        let r = build_report(&records, "p").unwrap();
        prop_assert_eq!(r.representable + r.cause_counts.sum(), r.total);
        prop_assert_eq!(r.total, records.len());
        prop_assert!((r.percent_representable - r.representable as f64 / r.total as f64).abs() < 1e-15);
    }
}
