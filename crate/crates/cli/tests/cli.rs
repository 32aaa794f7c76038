use std::process::{Command, Output};

use serde_json::Value;

fn ffmi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ffmi"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    assert_eq!(o.status.code(), Some(0), "stderr: {}", stderr(o));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn field(v: &Value, k: &str) -> f64 {
    v[k].as_f64()
        .unwrap_or_else(|| panic!("missing {k} in {v}"))
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.split('\n');
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .filter(|l| !l.is_empty())
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn exact_reports_all_entropies() {
    let v = json(&ffmi(&[
        "exact", "--a", "1", "--b", "1", "--beta", "2", "--alpha", "1", "--N", "128", "--q", "0.5",
    ]));
    let mi = field(&v, "s_A") + field(&v, "s_B") - field(&v, "s_total");
    assert!((mi - field(&v, "mi")).abs() < 1e-9);
    assert_eq!(v["N"], 128);
    assert_eq!(v["L"], 64);
}

#[test]
fn odd_ring_is_a_usage_error() {
    let o = ffmi(&["exact", "--beta", "1", "--N", "7"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("N must be even"));
    assert!(o.stdout.is_empty());
}

#[test]
fn zero_beta_is_a_usage_error() {
    let o = ffmi(&["exact", "--beta", "0", "--N", "8"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("beta must be positive"));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    assert_eq!(ffmi(&["exact", "--bogus", "1"]).status.code(), Some(2));
    assert_eq!(
        ffmi(&["asymptotic", "--beta", "1", "--format", "xml"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn quadrature_ceiling_is_a_numerical_failure() {
    let o = ffmi(&[
        "asymptotic",
        "--beta",
        "50",
        "--grid",
        "16",
        "--max-grid",
        "32",
        "--tol",
        "1e-14",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("not converged"));
}

#[test]
fn asymptotic_high_temperature_and_tolerance() {
    let v = json(&ffmi(&[
        "asymptotic",
        "--a",
        "1",
        "--b",
        "1",
        "--beta",
        "0.1",
        "--alpha",
        "1",
        "--tol",
        "1e-9",
    ]));
    let ratio = field(&v, "value") / 0.01;
    assert!((ratio / 0.721348 - 1.0).abs() < 0.05, "{ratio}");
    assert!(field(&v, "est_error") <= 1e-9);
    assert!(v["grid_used"].as_u64().unwrap() >= 64);
}

#[test]
fn asymptotic_gapped_is_tiny() {
    let v = json(&ffmi(&[
        "asymptotic",
        "--a",
        "4",
        "--b",
        "1",
        "--beta",
        "10",
        "--tol",
        "1e-14",
    ]));
    assert!(field(&v, "value") < 1e-6);
}

#[test]
fn scan_size_header_and_decay() {
    let o = ffmi(&[
        "scan-size",
        "--a",
        "1",
        "--b",
        "1",
        "--beta",
        "1",
        "--sizes",
        "16,20,24,28",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("N,e_A,mi_exact,mi_asymptotic,gap\n"));
    assert!(!text.contains('\r'));
    let (_, rows) = csv_rows(&text);
    let e: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(e.windows(2).all(|w| w[1] < w[0]), "{e:?}");
    let n: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(n, ["16", "20", "24", "28"]);
}

#[test]
fn kernel_is_deterministic_and_converges() {
    let args = [
        "kernel",
        "--beta",
        "1",
        "--a",
        "1",
        "--n-kernel",
        "1,2,8,32",
        "--seedless",
    ];
    let first = ffmi(&args);
    let second = ffmi(&["--jobs", "3"].iter().fold(args.to_vec(), |mut v, a| {
        v.push(a);
        v
    }));
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    let (header, rows) = csv_rows(&stdout(&first));
    assert_eq!(header, ["n_kernel", "value", "delta"]);
    let delta: Vec<f64> = rows
        .iter()
        .map(|r| r[2].parse::<f64>().unwrap().abs())
        .collect();
    assert!(delta[3] < delta[0]);
}

#[test]
fn twelve_significant_digits() {
    let o = ffmi(&[
        "kernel",
        "--beta",
        "1",
        "--n-kernel",
        "1",
        "--format",
        "csv",
    ]);
    let (_, rows) = csv_rows(&stdout(&o));
    let mantissa = rows[0][1]
        .split('e')
        .next()
        .unwrap()
        .replace(['-', '.'], "");
    assert_eq!(mantissa.len(), 12, "{}", rows[0][1]);
}

#[test]
fn temperature_scan_with_bounds_and_fit() {
    let o = ffmi(&[
        "scan-temperature",
        "--a",
        "4",
        "--b",
        "1",
        "--beta-min",
        "2",
        "--beta-max",
        "8",
        "--beta-count",
        "8",
        "--fit",
        "low-gapped",
        "--N",
        "48",
        "--tol",
        "1e-16",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (header, rows) = csv_rows(&stdout(&o));
    assert_eq!(
        header,
        [
            "beta",
            "mi_asymptotic",
            "mi_exact",
            "lower_bound",
            "upper_bound",
            "est_error",
            "error"
        ]
    );
    assert_eq!(rows.len(), 8);
    for r in &rows {
        let v: Vec<f64> = r[2..5].iter().map(|x| x.parse().unwrap()).collect();
        assert!(v[1] - 1e-8 <= v[0] && v[0] <= v[2] + 1e-8);
        assert!(r[6].is_empty());
    }
    let err = stderr(&o);
    let fit: Value = serde_json::from_str(err.trim().strip_prefix("fit ").unwrap()).unwrap();
    assert_eq!(fit["kind"], "exp_rate");
    assert!(field(&fit, "coefficient") >= 1.8);
}

#[test]
fn temperature_scan_json_and_high_fit() {
    let v = json(&ffmi(&[
        "scan-temperature",
        "--a",
        "1",
        "--b",
        "1",
        "--alpha",
        "2",
        "--betas",
        "0.1,0.05,0.025",
        "--fit",
        "high",
        "--format",
        "json",
    ]));
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
    assert!(v["rows"][0]["mi_exact"].is_null());
    let target = 2.0 / (2.0 * std::f64::consts::LN_2);
    assert!((field(&v["fit"], "coefficient") / target - 1.0).abs() < 0.02);
}

#[test]
fn failed_rows_keep_the_scan_going() {
    let o = ffmi(&["scan-temperature", "--betas", "0.5,60", "--max-grid", "128"]);
    assert_eq!(o.status.code(), Some(0));
    let (_, rows) = csv_rows(&stdout(&o));
    assert!(rows[0][6].is_empty());
    assert!(rows[1][1].is_empty());
    assert!(rows[1][6].contains("not converged"));
    assert_eq!(rows[1].len(), 7);
}

#[test]
fn timing_column_is_opt_in() {
    let o = ffmi(&["scan-temperature", "--betas", "1", "--timing"]);
    let (header, rows) = csv_rows(&stdout(&o));
    assert_eq!(header[6], "wall_time_ms");
    assert!(rows[0][6].parse::<f64>().unwrap() >= 0.0);
}

#[test]
fn torus_width_one_matches_chain() {
    let torus = json(&ffmi(&[
        "torus", "--dim", "2", "--M", "1", "--a", "0.3", "--b", "1", "--beta", "3",
    ]));
    let chain = json(&ffmi(&[
        "asymptotic",
        "--a",
        "2.3",
        "--b",
        "1",
        "--beta",
        "3",
    ]));
    assert!((field(&torus, "total") - field(&chain, "value")).abs() < 1e-10);
}

#[test]
fn torus_modes_are_mirror_symmetric() {
    let v = json(&ffmi(&["torus", "--M", "6", "--a", "0.2", "--beta", "4"]));
    let modes = v["modes"].as_array().unwrap();
    for k in 1..6 {
        let a = field(&modes[k], "value");
        let b = field(&modes[6 - k], "value");
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn torus_width_sweep_csv() {
    let o = ffmi(&["torus", "--widths", "1,2,3", "--beta", "2"]);
    let (header, rows) = csv_rows(&stdout(&o));
    assert_eq!(header, ["M", "total", "per_width"]);
    assert_eq!(rows.len(), 3);
    assert_eq!(
        ffmi(&["torus", "--dim", "3", "--M", "100", "--beta", "1"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn bounds_sandwich_and_hot_limit() {
    let v = json(&ffmi(&[
        "bounds",
        "--couplings",
        "0.2,-1,0.3",
        "--beta",
        "1.5",
        "--N",
        "40",
        "--q",
        "0.3",
    ]));
    assert!(
        field(&v, "lower") <= field(&v, "mi_exact") && field(&v, "mi_exact") <= field(&v, "upper")
    );
    let hot = json(&ffmi(&["bounds", "--beta", "1e-6", "--N", "16"]));
    for k in ["lower", "upper", "mi_exact"] {
        assert!(field(&hot, k).abs() < 1e-8);
    }
    assert_eq!(
        ffmi(&["bounds", "--beta", "1", "--N", "16", "--alpha", "2"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn crosscheck_agrees() {
    let v = json(&ffmi(&[
        "crosscheck",
        "--a",
        "1",
        "--beta",
        "2",
        "--alpha",
        "0.5",
        "--N",
        "6",
    ]));
    assert!(field(&v, "abs_diff") < 1e-8);
    assert_eq!(
        ffmi(&["crosscheck", "--beta", "1", "--N", "12"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"a": 1, "b": 1, "beta": 5, "N": 64, "q": 0.25, "couplings": null}"#,
    )
    .unwrap();
    let from_file = json(&ffmi(&["exact", "--config", cfg.to_str().unwrap()]));
    assert_eq!(from_file["L"], 16);
    assert_eq!(field(&from_file, "beta"), 5.0);
    let overridden = json(&ffmi(&[
        "exact",
        "--config",
        cfg.to_str().unwrap(),
        "--beta",
        "2",
    ]));
    assert_eq!(field(&overridden, "beta"), 2.0);
    assert_eq!(overridden["N"], 64);

    std::fs::write(&cfg, r#"{"betta": 5}"#).unwrap();
    assert_eq!(
        ffmi(&["exact", "--config", cfg.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    std::fs::write(&cfg, r#"{"sizes": "16,24", "beta": 1}"#).unwrap();
    let o = ffmi(&["scan-size", "--config", cfg.to_str().unwrap()]);
    assert_eq!(csv_rows(&stdout(&o)).1.len(), 2);
}

#[test]
fn output_file_only_on_success() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scan.csv");
    let path = out.to_str().unwrap();
    let bad = ffmi(&[
        "scan-size",
        "--beta",
        "1",
        "--sizes",
        "16,17",
        "--output",
        path,
    ]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(!out.exists());
    let good = ffmi(&[
        "scan-size",
        "--beta",
        "1",
        "--sizes",
        "16",
        "--output",
        path,
    ]);
    assert_eq!(good.status.code(), Some(0));
    assert!(good.stdout.is_empty());
    assert!(std::fs::read_to_string(&out).unwrap().starts_with("N,e_A,"));
}

#[test]
fn json_round_trips() {
    let o = ffmi(&["torus", "--M", "3", "--beta", "2"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let again = serde_json::to_string_pretty(&v).unwrap() + "\n";
    assert_eq!(again, stdout(&o));
}
