use rg_spectra::kernel::{KernelSpec, TransformKind};
use rg_spectra::report::{Check, Comparison, Report, Status};
use rg_spectra::spin::EnumerationCap;
use rg_spectra::verify::{jacobian_agreement, majority_uniform_field_oracle, run_suite, Suite, VerifyOptions};

#[test]
fn check_verdicts() {
    assert_eq!(Check::compare("a", "", 0.5, Comparison::AtMost, 1.0).status, Status::Pass);
    assert_eq!(Check::compare("a", "", 0.5, Comparison::AtLeast, 1.0).status, Status::Fail);
    assert_eq!(Check::compare("a", "", f64::NAN, Comparison::AtMost, 1.0).status, Status::Fail);
    assert_eq!(Check::exact("a", "", 0).status, Status::Pass);
    assert_eq!(Check::holds("a", "", false).status, Status::Fail);
}

#[test]
fn findings_never_fail_a_report() {
    let report = Report::new("x", vec![Check::finding("f", "", 1e9), Check::exact("e", "", 0)]);
    assert!(report.pass);
    let merged = Report::merge("all", vec![report, Report::new("y", vec![Check::exact("bad", "", 2)])]);
    assert!(!merged.pass);
    assert_eq!(merged.checks[0].name, "x/f");
    assert_eq!(merged.failures().map(|c| c.name.as_str()).collect::<Vec<_>>(), ["y/bad"]);
    let back: Report = serde_json::from_str(&merged.to_json()).unwrap();
    assert_eq!(back, merged);
}

#[test]
fn suites_parse_by_name() {
    for name in ["kernels", "rgmap", "jacobian", "spectral", "witness", "all"] {
        let suite: Suite = name.parse().unwrap();
        assert_eq!(suite.to_string(), name);
    }
    assert!("bogus".parse::<Suite>().is_err());
}

#[test]
fn rgmap_and_jacobian_suites_pass() {
    let opts = VerifyOptions::default();
    for suite in [Suite::Rgmap, Suite::Jacobian] {
        let report = run_suite(suite, &opts).unwrap();
        assert!(report.pass, "{}", report.to_json());
    }
}

#[test]
fn restricted_suite_runs_one_transform() {
    let opts = VerifyOptions { transform: Some(TransformKind::Majority), samples: 20, ..VerifyOptions::default() };
    let report = run_suite(Suite::Witness, &opts).unwrap();
    assert!(report.pass);
    assert!(report.checks.iter().all(|c| c.name.contains("majority")));
}

#[test]
fn jacobian_agreement_counts_pairs() {
    let spec = KernelSpec::decimation(1, 3).unwrap();
    let a = jacobian_agreement(&spec, 1, EnumerationCap::default()).unwrap();
    // one image subset against the seven nonempty subsets of a block
    assert_eq!(a.pairs, 7);
    assert_eq!(a.exact_mismatches, 0);
    assert!(a.max_fd_deviation < 1e-8);
}

#[test]
fn uniform_field_oracle_example() {
    // ½·log((e^0.3 + 3e^0.1)/(e^-0.3 + 3e^-0.1))
    let expected = 0.5 * ((0.3f64.exp() + 3.0 * 0.1f64.exp()) / ((-0.3f64).exp() + 3.0 * (-0.1f64).exp())).ln();
    assert!((majority_uniform_field_oracle(3, 0.1) - expected).abs() < 1e-15);
    assert!((expected - 0.1501247).abs() < 1e-7);
}
