use std::path::Path;
use std::process::{Command, Output};

use roughcat::catalog::write_normalized;
use roughcat::hawkes::{simulate, HawkesParams};
use roughcat::TimeGrid;
use serde_json::Value;

fn roughcat(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_roughcat"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

fn last_row(path: &Path) -> Vec<f64> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines().last().unwrap().split(',').map(|x| x.parse().unwrap()).collect()
}

#[test]
fn solve_writes_artifacts_and_terminal_values() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let o = roughcat(&["solve", "--set", "grid.steps=256"], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["config.json", "schema.json", "summary.json", "pd.csv", "vanilla.csv", "strategies.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    assert_eq!(last_row(&out.join("strategies.csv")), vec![10.0, 0.0, 5.0, 5.0, 0.2, 0.2]);
    let cfg: Value = serde_json::from_str(&std::fs::read_to_string(out.join("config.json")).unwrap()).unwrap();
    assert_eq!(cfg["market"]["theta"], 5.0);
    assert_eq!(cfg["grid"]["steps"], 256);
    assert_eq!(summary(&out)["config"], cfg);
}

#[test]
fn solve_degenerates_to_vanilla_on_short_horizon() {
    let tmp = tempfile::tempdir().unwrap();
    let o = roughcat(
        &["solve", "--set", "market.delta=1", "--set", "hawkes.rho1=0", "--set", "grid.horizon=2", "--set", "grid.steps=1024"],
        tmp.path(),
    );
    assert!(o.status.success());
    let s = summary(tmp.path());
    assert!(s["result"]["sup_gap_trading_weight"].as_f64().unwrap() < 1e-4);
    assert!(s["result"]["sup_gap_deductible"].as_f64().unwrap() < 1e-4);
}

#[test]
fn config_file_and_override_precedence() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.json");
    std::fs::write(&cfg, r#"{"market": {"gamma": 0.5}, "grid": {"steps": 64}}"#).unwrap();
    let out = tmp.path().join("run");
    let o = roughcat(&["solve", "--config", cfg.to_str().unwrap(), "--set", "market.gamma=2"], &out);
    assert!(o.status.success());
    let s = summary(&out);
    assert_eq!(s["config"]["market"]["gamma"], 2.0);
    assert_eq!(s["config"]["grid"]["steps"], 64);
    // θ/γ at maturity.
    assert_eq!(last_row(&out.join("strategies.csv"))[2], 2.5);
}

#[test]
fn bad_configuration_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let o = roughcat(&["solve", "--set", "market.gama=1"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("market.gama"));
    let o = roughcat(&["solve", "--config", "/nonexistent/c.json"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn welfare_degenerate_sweep_is_lossless() {
    let tmp = tempfile::tempdir().unwrap();
    let o = roughcat(
        &[
            "welfare",
            "--set", "sweep.delta=[1.0]",
            "--set", "hawkes.rho1=0",
            "--set", "grid.horizon=1",
            "--set", "grid.steps=512",
        ],
        tmp.path(),
    );
    assert!(o.status.success());
    let text = std::fs::read_to_string(tmp.path().join("sweep.csv")).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    for r in rows {
        let loss: f64 = r.split(',').nth(3).unwrap().parse().unwrap();
        assert!(loss.abs() < 1e-6, "{r}");
    }
}

#[test]
fn simulate_is_deterministic_per_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["simulate", "--set", "sim.paths=200", "--set", "sim.steps=32", "--set", "grid.steps=256", "--seed", "9"];
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(roughcat(&args, &a).status.success());
    assert!(roughcat(&args, &b).status.success());
    let read = |d: &Path| std::fs::read(d.join("summary.json")).unwrap();
    assert_eq!(read(&a), read(&b));
    let c = tmp.path().join("c");
    let mut other = args.to_vec();
    *other.last_mut().unwrap() = "10";
    assert!(roughcat(&other, &c).status.success());
    assert_ne!(read(&a), read(&c));
    assert_eq!(summary(&a)["config"]["sim"]["seed"], 9);
}

#[test]
fn single_path_simulation_warns() {
    let tmp = tempfile::tempdir().unwrap();
    let o = roughcat(&["simulate", "--set", "sim.paths=1", "--set", "sim.steps=16", "--set", "grid.steps=64"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("standard error"));
    let s = summary(tmp.path());
    assert_eq!(s["result"]["std_error_undefined"], true);
    assert!(s["result"]["std_error"].is_null());
}

#[test]
fn calibrate_missing_catalog_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let o = roughcat(&["calibrate", "/nonexistent/catalog.csv"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());
}

#[test]
fn calibrate_poisson_catalog_recovers_rate() {
    let tmp = tempfile::tempdir().unwrap();
    // Default catalog window spans exactly 16 years.
    let grid = TimeGrid::new(16.0, 4096).unwrap();
    let cat = simulate(&HawkesParams::poisson(6.31), &grid, 17).unwrap();
    let path = tmp.path().join("catalog.csv");
    write_normalized(&cat, std::fs::File::create(&path).unwrap()).unwrap();
    let out = tmp.path().join("run");
    let o = roughcat(
        &["calibrate", path.to_str().unwrap(), "--set", "grid.steps=512", "--set", "calibration.starts=4"],
        &out,
    );
    assert!(o.status.code() == Some(0) || o.status.code() == Some(2));
    let params: Value = serde_json::from_str(&std::fs::read_to_string(out.join("params.json")).unwrap()).unwrap();
    let k_over_t = cat.len() as f64 / 16.0;
    let fitted = params["lambda_star"].as_f64().unwrap();
    assert!((fitted / k_over_t - 1.0).abs() < 0.1, "{fitted} vs {k_over_t}");
    let header = std::fs::read_to_string(out.join("intensity.csv")).unwrap();
    assert!(header.starts_with("t,lambda\n"));
}

#[test]
fn ingest_filters_and_normalizes() {
    let tmp = tempfile::tempdir().unwrap();
    let raw = tmp.path().join("raw.csv");
    std::fs::write(
        &raw,
        "time,magnitude,lat,lon\n2008-05-12T06:28:01Z,7.9,31.0,103.4\n2010-01-01T00:00:00Z,4.9,30.0,102.0\n2013-04-20T00:02:46Z,6.6,30.3,103.0\n",
    )
    .unwrap();
    let out = tmp.path().join("run");
    let o = roughcat(&["ingest", raw.to_str().unwrap()], &out);
    assert!(o.status.success());
    let s = summary(&out);
    assert_eq!(s["result"]["events"], 2);
    assert_eq!(s["result"]["report"]["below_threshold"], 1);
    let text = std::fs::read_to_string(out.join("catalog.csv")).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.starts_with("t_years,magnitude\n"));
}

#[test]
fn ingest_bad_row_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let raw = tmp.path().join("raw.csv");
    std::fs::write(&raw, "time,magnitude\n2010-01-01,5.5\nyesterday,5.1\n").unwrap();
    let o = roughcat(&["ingest", raw.to_str().unwrap()], &tmp.path().join("run"));
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}
