use std::path::Path;

use singlag::report::{Analysis, SystemSpec};
use singlag::verify::NumericOptions;

fn analysis(name: &str) -> Analysis {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(format!("{name}.sys"));
    Analysis::new(SystemSpec::from_path(&path).unwrap()).unwrap()
}

fn holds(name: &str, seed: u64) {
    let report = analysis(name).verify(Some(NumericOptions { seed, ..Default::default() })).unwrap();
    assert!(report.all_passed(), "{name} (seed {seed}): {:?}", report.failing_tags());
    assert!(report.rows.iter().any(|r| r.instances > 0));
}

#[test]
fn conformal() {
    holds("conformal", 42);
    holds("conformal", 7);
}

#[test]
fn free_particle() {
    holds("free", 42);
}

#[test]
fn difference() {
    holds("difference", 42);
    holds("difference", 1234);
}

#[test]
fn gauge() {
    holds("gauge", 42);
    holds("gauge", 99);
}

#[test]
fn second_class_pair() {
    holds("second_class", 42);
}

#[test]
fn regular_two_dof() {
    holds("regular2", 42);
    let report = analysis("regular2").verify(None).unwrap();
    for tag in ["(Gam-reg)", "(R-reg)", "(Delta-reg)", "(Y-reg)", "(newtonoid)"] {
        assert!(report.row(tag).is_some_and(|r| r.instances > 0 && r.exact_zero), "{tag}");
    }
}

#[test]
fn reports_are_reproducible() {
    let a = analysis("gauge").verify(Some(NumericOptions::default())).unwrap();
    let b = analysis("gauge").verify(Some(NumericOptions::default())).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn sign_fault_is_caught() {
    let spec = SystemSpec::from_path(&Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/gauge.sys")).unwrap();
    let report = Analysis::with_fault(spec, true).unwrap().verify(None).unwrap();
    assert!(report.failing_tags().contains(&"(K-H')"));
}
