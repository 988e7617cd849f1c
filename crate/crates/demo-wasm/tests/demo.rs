use fraclap_demo::{branch_value, oracle_value, solve_value};

const QUAD: &str = r#"{"problem": {"family": "smooth", "s": 0.5, "c": 1, "t": 0.25, "g": "u^2", "t_range": [-1, 1.05]},
  "grid": {"n": 16}, "continuation": {"ds": 0.1}}"#;

#[test]
fn solve_returns_both_roots() {
    let v = solve_value(QUAD).unwrap();
    let sols = v["solutions"].as_array().unwrap();
    assert_eq!(sols.len(), 2);
    assert!((sols[0]["mean"].as_f64().unwrap() - 0.5).abs() < 1e-8);
    assert_eq!(v["x"].as_array().unwrap().len(), 16);
}

#[test]
fn branch_reports_fold() {
    let v = branch_value(QUAD).unwrap();
    assert_eq!(v["folds"].as_array().unwrap().len(), 1);
    assert!(v["t1"].as_f64().unwrap().abs() < 1e-6);
}

#[test]
fn oracle_agrees() {
    let v = oracle_value("cos(x) + 0.3*sin(3*x)", 0.5, 64).unwrap();
    assert!(v["max_diff"].as_f64().unwrap() <= 1e-6);
}
