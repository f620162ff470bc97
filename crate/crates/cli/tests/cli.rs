use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn hypex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hypex")).args(args).output().expect("spawn hypex")
}

fn hypex_env(args: &[&str], key: &str, val: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hypex")).args(args).env(key, val).output().expect("spawn hypex")
}

fn recipe_path(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/recipes").join(format!("{name}.toml")).display().to_string()
}

fn tmp(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("hypex-cli");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn write(name: &str, body: &str) -> String {
    let p = tmp(name);
    std::fs::write(&p, body).unwrap();
    p.display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

const COUPLED: &str = r#"
seed = 5
n = 20000
n_realizations = 2
quantile_level = 0.95
[system]
kind = "coupled"
m = 2
gamma = 0.1
noise = 0.0
[observable]
kind = "neg_log_perp"
"#;

#[test]
fn replicate_matches_golden_file() {
    let golden = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/cm1a.csv")).unwrap();
    let o = hypex(&["replicate", "cm1a"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), golden);
    // the worker count does not change a byte
    let o = hypex_env(&["replicate", "cm1a"], "HYPEX_WORKERS", "3");
    assert_eq!(stdout(&o), golden);
}

#[test]
fn replicate_lists_and_writes_files() {
    let o = hypex(&["replicate", "--list"]);
    let names = stdout(&o);
    for n in ["cm1a", "cm1b", "ei-a", "ei-b", "bs2-a", "bs2-b", "bs-a", "bs-b", "billiard"] {
        assert!(names.lines().any(|l| l == n), "{names}");
    }
    let dir = tmp("replicate-out");
    let o = hypex(&["replicate", "cm1b", "--out-dir", dir.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(dir.join("cm1b.json")).unwrap()).unwrap();
    assert_eq!(summary["points"][0]["prediction"]["value"], 1.0);
    let csv = std::fs::read_to_string(dir.join("cm1b.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 10 + 1);

    let o = hypex(&["replicate", "fig99"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn theta_prints_prediction_json() {
    let o = hypex(&["theta", "--config", &recipe_path("cm1a")]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["case_label"], "Thm2.1-case4");
    assert!((v["value"].as_f64().unwrap() - 0.854_101_966_249_684_5).abs() < 1e-12);
    assert_eq!(v["inputs"]["system"]["kind"], "toral");

    let o = hypex(&["theta", "--config", &recipe_path("ei-a")]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 9);
    assert_eq!(v[1]["label"], "gamma=0.1");
}

#[test]
fn inconclusive_theta_exits_4() {
    let cfg = write(
        "inconclusive.toml",
        r#"
seed = 1
n = 1000
n_realizations = 1
quantile_level = 0.98
[system]
kind = "toral"
[observable]
kind = "neg_log_segment_dist"
segment = { center = [0.3141, 0.2718], direction = "v+", length = 0.2 }
[theory]
q_max = 2
"#,
    );
    let o = hypex(&["theta", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["inconclusive"], true);
}

#[test]
fn config_errors_exit_2() {
    let empty = write("empty.toml", "");
    let o = hypex(&["theta", "--config", &empty]);
    assert_eq!(o.status.code(), Some(2));
    let msg = stderr(&o);
    for f in ["system", "observable", "n_realizations", "quantile_level", "seed"] {
        assert!(msg.contains(f), "{msg}");
    }
    let o = hypex(&["theta", "--config", "/nonexistent/cfg.toml"]);
    assert_eq!(o.status.code(), Some(2));
    let o = hypex_env(&["replicate", "--list"], "HYPEX_WORKERS", "many");
    assert_eq!(o.status.code(), Some(2));
    // clap usage errors share the code
    let o = hypex(&["ei"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn ei_from_series_file() {
    let body: String = std::iter::once("phi".to_string())
        .chain((0..1000).map(|i| ((i * 7919) % 1000).to_string()))
        .collect::<Vec<_>>()
        .join("\n");
    let f = write("series.csv", &body);
    let o = hypex(&["ei", "--input", &f, "--quantile", "0.95"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("method,threshold,quantile_level,theta_hat,n_exceedances"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "suveges");
    assert_eq!(row[2], "0.95");
    assert_eq!(row[4], "50");

    let o = hypex(&["ei", "--input", &f, "--method", "runs", "--run-gap", "1"]);
    assert!(stdout(&o).lines().nth(1).unwrap().starts_with("runs,"));
    assert!(stdout(&o).contains(",1,"));

    let bad = write("bad.csv", "phi\n1\n2\nxyz\n");
    let o = hypex(&["ei", "--input", &bad]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let o = hypex(&["ei", "--input", "/nonexistent/series.csv"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn ei_from_config_uses_experiment_schema() {
    let cfg = write("coupled.toml", COUPLED);
    let o = hypex(&["ei", "--config", &cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("row_kind,realization,label,threshold,quantile_level,theta,n_exceedances\n"));
    assert_eq!(out.lines().filter(|l| l.starts_with("estimate,")).count(), 2);
    assert_eq!(out.lines().filter(|l| l.starts_with("prediction,")).count(), 1);
}

#[test]
fn simulate_then_gev_and_trajectory() {
    let cfg = write("sim.toml", COUPLED);
    let series = tmp("sim.csv");
    let traj = tmp("sim.bin");
    let o = hypex(&[
        "simulate",
        "--config",
        &cfg,
        "--realization",
        "1",
        "--out",
        series.to_str().unwrap(),
        "--trajectory",
        traj.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&series).unwrap();
    assert_eq!(text.lines().count(), 20_001);
    let bytes = std::fs::read(&traj).unwrap();
    assert_eq!(&bytes[..8], b"HYPXTRJ\0");
    assert_eq!(bytes.len(), 32 + 20_000 * 2 * 8);

    let o = hypex(&["gev", "--input", series.to_str().unwrap(), "--block-len", "100"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["n_maxima"], 200);
    assert!(v["shape"].as_f64().unwrap().is_finite());

    let o = hypex(&["gev", "--input", series.to_str().unwrap(), "--block-len", "1000"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn diagnose_modes() {
    let cfg = write("diag.toml", COUPLED);
    let o = hypex(&["diagnose", "--config", &cfg, "--q", "1", "--samples", "20000", "--calibration-len", "200000"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let want = 1.0 - 1.0 / 2.7;
    let (r, se) = (v["ratio"].as_f64().unwrap(), v["stderr"].as_f64().unwrap());
    assert!((r - want).abs() < 4.0 * se, "{r} ± {se}");

    let out = tmp("returns.csv");
    let o = hypex(&[
        "diagnose",
        "--config",
        &cfg,
        "--mode",
        "returns",
        "--q",
        "0",
        "--j-max",
        "4",
        "--samples",
        "20000",
        "--calibration-len",
        "200000",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("j,estimate,stderr\n1,"));
    assert_eq!(csv.lines().count(), 5);
    assert!(out.with_extension("json").exists());

    let o = hypex(&["diagnose", "--config", &cfg, "--samples", "10"]);
    assert_eq!(o.status.code(), Some(4));
}
