use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn run(dir: &Path, config: &str, args: &[&str]) -> Output {
    let cfg = dir.join("model.cfg");
    fs::write(&cfg, config).unwrap();
    let mut full = vec![args[0], "--config", cfg.to_str().unwrap(), "--out", dir.join("out").to_str().unwrap()]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>();
    full.extend(args[1..].iter().map(|s| s.to_string()));
    Command::new(env!("CARGO_BIN_EXE_countcompat")).args(&full).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn value(o: &Output, key: &str) -> String {
    let prefix = format!("{key}: ");
    stdout(o)
        .lines()
        .find_map(|l| l.strip_prefix(&prefix).map(str::to_string))
        .unwrap_or_else(|| panic!("no `{key}` in {}", stdout(o)))
}

#[test]
fn build_writes_pmf() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), "family=poisson_gamma alpha=1 beta=1 lambdas=1,1\n", &["build", "--trunc", "30"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(value(&o, "family").starts_with("poisson_gamma"));
    let pmf = PathBuf::from(value(&o, "pmf"));
    assert!(fs::read_to_string(pmf).unwrap().starts_with("# countcompat-jointpmf n=2 N=30"));
    assert!(dir.path().join("out/report.txt").exists());
}

#[test]
fn invariant_breach_is_error_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), "family=theta\ntheta2=0.5 theta1=0.2\n", &["build"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("model.cfg:2:") && err.contains("theta1 > theta2"), "{err}");
}

#[test]
fn compatible_car_names_solution() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "spec=car\nw_xy=bernoulli:0.25 w_yx=bernoulli:0.3333333333333333\neps=poisson:2 eta=poisson:3\n";
    let o = run(dir.path(), cfg, &["check-compat"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(value(&o, "verdict"), "compatible");
    assert!(value(&o, "solution").starts_with("trivariate_poisson"));
}

#[test]
fn incompatible_linear_poisson_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), "spec=linear_poisson a=0.5 b=1 c=0.5 d=1", &["check-compat"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(value(&o, "verdict"), "incompatible");
}

#[test]
fn lp_feasible_and_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), "spec=linear_ce n=2 a=0.5 b=1 c=0.5 d=1", &["solve-lp"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(value(&o, "status"), "feasible");

    let o = run(dir.path(), "spec=linear_ce a=2 b=0.1 c=2 d=0.1", &["solve-lp", "--trunc", "5"]);
    assert_eq!(o.status.code(), Some(1));
    let cert = PathBuf::from(value(&o, "certificate"));
    let line = fs::read_to_string(cert).unwrap();
    assert_eq!(line.trim().split(',').count(), 1 + 12);
}

#[test]
fn classify_reports_region() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), "spec=linear_ce a=0.5 b=1 c=0.5 d=1", &["classify"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(value(&o, "theta_region"), "(c)");
    assert!(value(&o, "solution").starts_with("theta delta=2"));
    let o = run(dir.path(), "spec=linear_ce a=2 b=1 c=0.6 d=1", &["classify"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn divergence_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), "spec=linear_poisson a=1.2 b=1 c=1.2 d=1", &["gibbs", "--sweeps", "100000"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("divergence"));
}

#[test]
fn gibbs_reports_discrepancy() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), "spec=linear_poisson a=0 b=1 c=0 d=1", &["gibbs", "--sweeps", "50000", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(value(&o, "discrepancy").parse::<f64>().unwrap() < 0.05);
}

#[test]
fn oracle_reads_built_pmf() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), "family=trivariate_poisson lambda0=1 lambda1=2 lambda2=3", &["build", "--trunc", "40"]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(dir.path(), "pmf=out/pmf.csv", &["oracle"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let slope: f64 = value(&o, "fitted_slopes_x0").parse().unwrap();
    assert!((slope - 0.25).abs() < 1e-6, "{slope}");
}

#[test]
fn runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "family=beta_nb r1=2 r2=3 alpha1=6 alpha2=2";
    let a = run(dir.path(), cfg, &["sample", "--count", "2000", "--seed", "9", "--format", "csv"]);
    let first = fs::read(dir.path().join("out/samples.csv")).unwrap();
    let b = run(dir.path(), cfg, &["sample", "--count", "2000", "--seed", "9", "--format", "csv"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(first, fs::read(dir.path().join("out/samples.csv")).unwrap());
    assert!(stdout(&a).starts_with("key,value\n"));
}
