use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fraclap"))
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, body).unwrap();
    p
}

const QUAD: &str = r#"{"problem": {"family": "smooth", "s": 0.5, "c": 1, "t": T, "g": "u^2", "t_range": [-1, 1.05]},
  "grid": {"n": 16}, "continuation": {"ds": 0.1}}"#;

fn run(cmd: &str, cfg: &str, out: &Path) -> std::process::Output {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), cfg);
    bin()
        .args([cmd, "--config", path.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .output()
        .unwrap()
}

#[test]
fn fold_exits_zero_with_t1() {
    let out = tempfile::tempdir().unwrap();
    let o = run("fold", &QUAD.replace('T', "1"), out.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    let t1: f64 = stdout.lines().find_map(|l| l.strip_prefix("t1=")).unwrap().parse().unwrap();
    assert!(t1.abs() <= 1e-6);
    let csv = std::fs::read_to_string(out.path().join("branch.csv")).unwrap();
    assert!(csv.starts_with("t,u_mean,u_min,u_max,l2_deriv,residual_sup,iterations,fold_flag\n"));
}

#[test]
fn infeasible_solve_exits_two() {
    let out = tempfile::tempdir().unwrap();
    let o = run("solve", &QUAD.replace('T', "-1"), out.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.path().join("fields.csv").exists());
}

#[test]
fn oracle_check_prints_difference() {
    let out = tempfile::tempdir().unwrap();
    let cfg = r#"{"problem": {"family": "smooth", "s": 0.5, "t": 0, "g": "u^2"}, "grid": {"n": 128}}"#;
    let o = run("oracle-check", cfg, out.path());
    assert_eq!(o.status.code(), Some(0));
    let stdout = String::from_utf8(o.stdout).unwrap();
    let d: f64 = stdout.trim().strip_prefix("max_abs_diff=").unwrap().parse().unwrap();
    assert!(d <= 1e-6);
}

#[test]
fn bad_config_and_usage() {
    let out = tempfile::tempdir().unwrap();
    let o = run("solve", &QUAD.replace('T', "1").replace("0.5", "1.5"), out.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("problem.s"));
    let o = bin().arg("bogus").output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}
