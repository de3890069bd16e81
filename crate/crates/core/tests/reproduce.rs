use etacong::verify::{reproduce_reference, CheckStatus, ReproduceOptions};
use etacong::Error;

#[test]
fn full_run_passes_with_ten_checks() {
    let report = reproduce_reference(&ReproduceOptions::default()).unwrap();
    print!("{}", report.render_table());
    assert_eq!(report.checks.len(), 10);
    assert!(report.checks.iter().all(|c| c.status == CheckStatus::Pass));
    assert!(report.passed());
    let json: serde_json::Value = serde_json::from_str(&report.to_json().unwrap()).unwrap();
    assert_eq!(json["checks"].as_array().unwrap().len(), 10);
}

#[test]
fn other_hecke_prime_skips_comparison() {
    let opts = ReproduceOptions {
        example1_m: 11,
        ..ReproduceOptions::default()
    };
    let report = reproduce_reference(&opts).unwrap();
    let ex1 = report
        .checks
        .iter()
        .find(|c| c.name == "hecke_p5_l13_j1")
        .unwrap();
    assert_eq!(ex1.status, CheckStatus::Skipped);
    assert!(ex1.parameters.contains("m=11"));
    assert!(report.passed());
}

#[test]
fn precision_below_sturm_is_an_error() {
    let opts = ReproduceOptions {
        n_terms: 20,
        ..ReproduceOptions::default()
    };
    assert!(matches!(
        reproduce_reference(&opts),
        Err(Error::InsufficientPrecision { .. })
    ));
}
