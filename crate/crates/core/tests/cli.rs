use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(format!("{name}.sys"))
}

fn singlag(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_singlag")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write_system(dir: &Path, body: &str) -> String {
    let path = dir.join("sys.sys");
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn analyze_writes_schema_valid_deterministic_json() {
    let dir = tempfile::tempdir().unwrap();
    let schema: serde_json::Value =
        serde_json::from_str(include_str!("../../../docs/report.schema.json")).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    for name in ["conformal", "free", "difference", "gauge", "regular2", "second_class"] {
        let (a, b) = (dir.path().join(format!("{name}_a.json")), dir.path().join(format!("{name}_b.json")));
        let fx = fixture(name);
        for path in [&a, &b] {
            let out = singlag(&["analyze", fx.to_str().unwrap(), "--json", path.to_str().unwrap()]);
            assert_eq!(code(&out), 0, "{name}: {}", String::from_utf8_lossy(&out.stderr));
        }
        let text = std::fs::read_to_string(&a).unwrap();
        assert_eq!(text, std::fs::read_to_string(&b).unwrap(), "{name}: report not reproducible");
        let json: serde_json::Value = serde_json::from_str(&text).unwrap();
        let errors: Vec<String> = validator.iter_errors(&json).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{name}: {errors:?}");
    }
}

#[test]
fn conformal_report_text() {
    let out = singlag(&["analyze", fixture("conformal").to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("chain 0: pi -> -1/2*x^2 -> -x*p -> x^2*lambda - p^2"), "{text}");
    assert!(text.contains("final velocity constraints: x, dx"));
    assert!(text.contains("1 primaries + 1 first-class = 2: ok"));
}

#[test]
fn parse_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad_expr = write_system(dir.path(), "[system]\nname = t\ncoordinates = x\nlagrangian = dx^^2\n");
    let out = singlag(&["analyze", &bad_expr]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));
    let bad_section = write_system(dir.path(), "[sistem]\nname = t\n");
    assert_eq!(code(&singlag(&["verify", &bad_section])), 2);
    assert_eq!(code(&singlag(&["analyze", "/nonexistent/file.sys"])), 2);
}

#[test]
fn unsupported_and_rejected_exit_3() {
    assert_eq!(code(&singlag(&["analyze", fixture("broken_constraint").to_str().unwrap()])), 3);
    let dir = tempfile::tempdir().unwrap();
    let cubic = write_system(dir.path(), "[system]\nname = t\ncoordinates = x\nlagrangian = dx^3\n");
    assert_eq!(code(&singlag(&["analyze", &cubic])), 3);
    let squared = write_system(
        dir.path(),
        "[system]\nname = c\ncoordinates = x, lambda\nmomenta = p, pi\nlagrangian = (dx^2 - lambda*x^2)/2\n\
         [constraints]\nphi = pi^2\n",
    );
    assert_eq!(code(&singlag(&["analyze", &squared])), 3);
}

#[test]
fn verify_passes_and_reports_settings() {
    let fx = fixture("gauge");
    let out = singlag(&["verify", fx.to_str().unwrap(), "--trials", "20", "--tol", "1e-10", "--seed", "7"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("over 20 samples (seed 7)"), "{text}");
    assert!(text.contains("identities hold"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn simulate_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let fx = fixture("conformal");
    let out = singlag(&["simulate", fx.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap(), "--t1", "0.5"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let lag = std::fs::read_to_string(dir.path().join("conformal_lagrangian.csv")).unwrap();
    let ham = std::fs::read_to_string(dir.path().join("conformal_hamiltonian.csv")).unwrap();
    assert_eq!(lag.lines().next(), Some("t,x,lambda,dx,dlambda"));
    assert_eq!(ham.lines().next(), Some("t,x,lambda,p,pi"));
    assert_eq!(lag.lines().count(), 7);
    assert_eq!(lag.lines().last(), Some("0.5,0,1,0,0"));
}

#[test]
fn simulate_off_surface_exits_5() {
    let dir = tempfile::tempdir().unwrap();
    let fx = fixture("conformal");
    let out = singlag(&[
        "simulate",
        fx.to_str().unwrap(),
        "--initial",
        "x=1,lambda=1",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 5);
}
