use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_berezin")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn keys_sorted(v: &Value) -> bool {
    match v {
        Value::Object(map) => {
            let keys: Vec<_> = map.keys().collect();
            keys.windows(2).all(|w| w[0] < w[1]) && map.values().all(keys_sorted)
        }
        Value::Array(xs) => xs.iter().all(keys_sorted),
        _ => true,
    }
}

#[test]
fn unknown_flag_exits_one() {
    let o = run(&["probe", "--bogus"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("--bogus"));
}

#[test]
fn help_exits_zero() {
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn bad_bump_config_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "# comment\nbump.a = 0.05\nbump.b = 0.3\n").unwrap();
    let o = run(&["reproduce-example", "--config", cfg.to_str().unwrap(), "--caps", "10,10"]);
    assert_eq!(code(&o), 1);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line"), "{err}");
    assert!(err.contains("moment inequality"), "{err}");
}

#[test]
fn malformed_config_line_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "profile.alpha 0.9\n").unwrap();
    let o = run(&["mass-profile", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
}

#[test]
fn bad_caps_and_tol_are_rejected() {
    assert_eq!(code(&run(&["berezin-eval", "--symbol", "1", "--point", "0,0", "--caps", "0,5"])), 1);
    assert_eq!(code(&run(&["berezin-eval", "--symbol", "1", "--point", "0,0", "--tol", "0.5"])), 1);
    assert_eq!(code(&run(&["berezin-eval", "--symbol", "abs2(", "--point", "0,0"])), 1);
}

#[test]
fn tables_have_one_row_per_index() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t");
    let o = run(&["tables", "--caps", "5,3", "--symbol", "abs2(z1)", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for name in ["monomial_norms.csv", "eigenvalues.csv"] {
        let mut r = csv::Reader::from_path(out.join(name)).unwrap();
        assert_eq!(r.records().count(), 6 * 4, "{name}");
    }
    assert!(keys_sorted(&json(&out.join("eigen_summary.json"))));
}

#[test]
fn tables_require_out() {
    assert_eq!(code(&run(&["tables", "--caps", "3,3"])), 1);
}

#[test]
fn flat_profile_eigenvalues_do_not_depend_on_m() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("flat.cfg");
    fs::write(&cfg, "profile.kind = flat\n").unwrap();
    let out = dir.path().join("t");
    let o = run(&[
        "tables", "--config", cfg.to_str().unwrap(), "--caps", "6,4", "--symbol", "abs2(z1)", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let mut r = csv::Reader::from_path(out.join("eigenvalues.csv")).unwrap();
    for rec in r.records() {
        let rec = rec.unwrap();
        let n: f64 = rec[0].parse().unwrap();
        let lambda: f64 = rec[2].parse().unwrap();
        assert!((lambda - (n + 1.0) / (n + 2.0)).abs() < 1e-12, "{rec:?}");
    }
}

#[test]
fn probe_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p");
    let o = run(&[
        "probe", "--domain", "bidisc", "--symbol", "abs2(z1)", "--target", "1,0.5", "--paths", "normal,slant",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc = json(&out.join("probe.json"));
    assert!(keys_sorted(&doc));
    assert_eq!(doc["report"]["verdict"], "consistent");
    let limit = doc["report"]["paths"][0]["estimate"].as_f64().unwrap();
    assert!((limit - 1.0).abs() < 5e-3, "{limit}");
    assert!(csv::Reader::from_path(out.join("probe_samples.csv")).unwrap().records().count() > 0);
}

#[test]
fn probe_with_tiny_caps_is_inconclusive() {
    let o = run(&["probe", "--target", "0,1", "--symbol", "1-abs2(z1)", "--caps", "4,16", "--steps", "6"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn probe_rejects_interior_target() {
    let o = run(&["probe", "--domain", "bidisc", "--symbol", "1", "--target", "0.5,0.5"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn berezin_eval_on_the_disc() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("e");
    let o = run(&["berezin-eval", "--domain", "disc", "--symbol", "abs2(z1)", "--point", "0.5", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc = json(&out.join("berezin_eval.json"));
    assert!(keys_sorted(&doc));
    // (1 - x)² Σ (k+1) x^k λ_k with λ_k = (k+1)/(k+2), x = |z|².
    let x: f64 = 0.25;
    let v = doc["value"].as_f64().unwrap();
    let series: f64 = (0..400)
        .map(|k| {
            let k = k as f64;
            (k + 1.0) * x.powf(k) * (k + 1.0) / (k + 2.0)
        })
        .sum::<f64>()
        * (1.0 - x).powi(2);
    assert!((v - series).abs() < 1e-8, "{v} vs {series}");
}
