use stoq_cli::generate::{generate_instance, GenParams, Generator};
use stoq_cli::io::InstanceFile;
use stoq_cli::suite::{run_suite, Suite, SuiteConfig};
use stoq_cli::CliError;

fn entangled_family() -> Vec<InstanceFile> {
    (2..=4).map(|d| generate_instance(Generator::Entangled, &GenParams { d, ..Default::default() }, 0).unwrap()).collect()
}

fn record<'a>(report: &'a stoq_cli::io::ReportFile, name: &str) -> &'a stoq_cli::io::CheckRecord {
    report.records.iter().find(|r| r.name == name).unwrap_or_else(|| panic!("missing {name}"))
}

#[test]
fn empty_instance_lists_give_empty_passing_reports() {
    for suite in [Suite::BranchOverlap, Suite::Distances, Suite::ProductValue, Suite::Sandwich, Suite::Rounding, Suite::Collapse] {
        let report = run_suite(suite, &[], &SuiteConfig::default()).unwrap();
        assert!(report.records.is_empty());
        assert!(report.passed());
        assert_eq!(report.summary.total, 0);
    }
}

#[test]
fn sandwich_rows_on_entangled_family() {
    let config = SuiteConfig { copies: 3, max_dim: 1 << 12, ..Default::default() };
    let report = run_suite(Suite::Sandwich, &entangled_family(), &config).unwrap();
    assert!(report.passed());
    for (i, d) in (2..=4).enumerate() {
        let lambda = record(&report, &format!("{i:03}/R01/equals-lambda-max"));
        assert!((lambda.values["value"] - 1.0).abs() < 1e-9);
        let omega = record(&report, &format!("{i:03}/omega"));
        assert!((omega.values["value"] - 1.0 / d as f64).abs() < 1e-6);
        assert_eq!(omega.values["expected"], 1.0 / d as f64);
    }
}

#[test]
fn branch_overlap_suite_on_two_hundred_circuits() {
    let instances: Vec<_> = (0..200)
        .map(|seed| generate_instance(Generator::Circuit, &GenParams { bits: 6, ..Default::default() }, seed).unwrap())
        .collect();
    let report = run_suite(Suite::BranchOverlap, &instances, &SuiteConfig::default()).unwrap();
    assert!(report.passed(), "{:?}", report.records.iter().filter(|r| !r.pass).collect::<Vec<_>>());
    assert!(report.summary.total >= 5 * 200);
}

#[test]
fn suites_are_deterministic() {
    let instances: Vec<_> = (0..4)
        .map(|seed| generate_instance(Generator::Planted, &GenParams::default(), seed).unwrap())
        .collect();
    let config = SuiteConfig { seed: 9, copies: 3, ..Default::default() };
    for suite in [Suite::ProductValue, Suite::Sandwich, Suite::Rounding, Suite::Collapse] {
        let a = run_suite(suite, &instances, &config).unwrap().to_json().unwrap();
        let b = run_suite(suite, &instances, &config).unwrap().to_json().unwrap();
        assert_eq!(a, b, "{}", suite.name());
    }
}

#[test]
fn records_are_sorted_and_carry_both_sides() {
    let instances: Vec<_> = (0..3)
        .map(|seed| generate_instance(Generator::Distribution, &GenParams { dims: vec![2, 2, 3], ..Default::default() }, seed).unwrap())
        .collect();
    let report = run_suite(Suite::Distances, &instances, &SuiteConfig::default()).unwrap();
    assert!(report.passed());
    let names: Vec<_> = report.records.iter().map(|r| r.name.clone()).collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
    assert!(report.records.iter().all(|r| r.measured.is_finite() && r.bound.is_finite() && r.tolerance >= 0.0));
}

#[test]
fn tolerance_override_is_echoed() {
    let instances = entangled_family();
    let config = SuiteConfig { tol: Some(1e-7), copies: 2, ..Default::default() };
    let report = run_suite(Suite::Sandwich, &instances, &config).unwrap();
    assert!(report.records.iter().all(|r| r.tolerance == 1e-7));
}

#[test]
fn incompatible_instances_are_rejected() {
    let v = generate_instance(Generator::Circuit, &GenParams::default(), 0).unwrap();
    let m = generate_instance(Generator::Contraction, &GenParams::default(), 0).unwrap();
    let err = run_suite(Suite::Sandwich, &[m.clone(), v.clone()], &SuiteConfig::default()).unwrap_err();
    assert!(matches!(err, CliError::Incompatible { index: 1, .. }));
    assert!(run_suite(Suite::Distances, &[m], &SuiteConfig::default()).is_err());
    assert!(run_suite(Suite::ProductValue, &[v], &SuiteConfig::default()).is_err());
}

#[test]
fn remaining_suites_pass_on_generated_instances() {
    let config = SuiteConfig { copies: 3, ..Default::default() };
    let bosonic: Vec<_> = (0..3)
        .map(|seed| generate_instance(Generator::Bosonic, &GenParams { mixed: seed % 2 == 1, ..Default::default() }, seed).unwrap())
        .collect();
    assert!(run_suite(Suite::Rounding, &bosonic, &config).unwrap().passed());
    let contractions: Vec<_> = (0..3)
        .map(|seed| generate_instance(Generator::Contraction, &GenParams::default(), seed).unwrap())
        .collect();
    assert!(run_suite(Suite::ProductValue, &contractions, &config).unwrap().passed());
    assert!(run_suite(Suite::Collapse, &contractions, &config).unwrap().passed());
    assert!(run_suite(Suite::Symmetrizer, &[], &config).unwrap().passed());
}
