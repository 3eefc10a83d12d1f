use std::process::Command;

use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["infoembed"];
    argv.extend_from_slice(args);
    let code = infoembed::cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(s: &str) -> Value {
    serde_json::from_str(s.trim()).unwrap()
}

#[test]
fn lower_bound_at_zero_power() {
    let (code, out, _) = run(&["lower-bound", "--sigma2", "1", "--power", "0", "--rate", "0"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert!((v["value"].as_f64().unwrap() - 0.5).abs() < 1e-15);
    assert_eq!(v["inputs"]["sigma2"].as_f64(), Some(1.0));
}

#[test]
fn infeasible_upper_bound_exits_3() {
    let (code, _, err) = run(&["upper-bound", "--sigma2", "1", "--power", "0.9", "--rate", "0.5"]);
    assert_eq!(code, 3);
    assert!(!err.is_empty());
}

#[test]
fn bad_input_exits_2() {
    assert_eq!(run(&["lower-bound", "--bogus"]).0, 2);
    assert_eq!(run(&["lower-bound", "--sigma2", "-1", "--power", "1"]).0, 2);
    assert_eq!(run(&[]).0, 2);
}

#[test]
fn binary_reports_usage_on_stderr() {
    let o = Command::new(env!("CARGO_BIN_EXE_infoembed"))
        .args(["lower-bound", "--bogus"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn csv_output_has_header_and_one_row() {
    let (code, out, _) = run(&["--format", "csv", "rate-perfect", "--sigma2", "1", "--power", "2"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0].split(',').count(), lines[1].split(',').count());
    assert!(lines[0].split(',').any(|h| h == "rate"));
}

#[test]
fn weighted_cost_reports_sandwich() {
    let (code, out, _) = run(&["weighted-cost", "--sigma2", "0.618", "--k2", "0.1", "--rate", "0"]);
    assert_eq!(code, 0);
    let v = json(&out);
    let lb = v["j_lb"].as_f64().unwrap();
    let ub = v["j_ub_numeric"].as_f64().unwrap();
    assert!(ub >= lb && ub <= 1.35 * lb);
    assert_eq!(v["certificate_holds"], Value::Bool(true));
}

#[test]
fn sweep_writes_csv_and_echoes_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ratio.csv");
    let path_str = path.to_str().unwrap();
    let args = [
        "--workers",
        "2",
        "sweep",
        "--quantity",
        "mmse_ratio_new",
        "--axis1",
        "power:0.01:10:4:log10",
        "--axis2",
        "log10_sigma:-1:1:3",
        "--rate",
        "0",
        "--out",
        path_str,
    ];
    let (code, out, _) = run(&args);
    assert_eq!(code, 0);
    let v = json(&out);
    assert!(v["max_value"].as_f64().unwrap() <= 1.55);
    assert_eq!(v["inputs"]["workers"].as_u64(), Some(2));
    assert!(v["inputs"].is_object());

    let csv = std::fs::read_to_string(&path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("axis1,axis2,value"));
    assert_eq!(lines.count(), 12);

    // same output with a different worker count
    let path2 = dir.path().join("ratio1.csv");
    let mut args1 = args;
    args1[1] = "1";
    args1[12] = path2.to_str().unwrap();
    assert_eq!(run(&args1).0, 0);
    assert_eq!(csv, std::fs::read_to_string(&path2).unwrap());
}

#[test]
fn simulate_echoes_seed_and_is_reproducible() {
    let args = [
        "simulate", "--strategy", "linear", "--sigma2", "1", "--power", "1", "--gain", "0.5", "--m", "2", "--trials",
        "500",
    ];
    let (code, out, _) = run(&args);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["inputs"]["seed"].as_u64(), Some(0));
    assert_eq!(out, run(&args).1);
}

#[test]
fn min_power_orders_bounds() {
    let (code, out, _) = run(&["min-power", "--sigma2", "1", "--target-mmse", "0.1"]);
    assert_eq!(code, 0);
    let v = json(&out);
    let lo = v["power_lower"].as_f64().unwrap();
    let hi = v["power_upper"].as_f64().unwrap();
    assert!(lo > 0.0 && hi >= lo);
}
