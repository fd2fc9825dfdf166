use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = r#"{
  "deployment": "hex:1:500",
  "map_side_m": 2000,
  "trajectories": { "count": 4, "duration_s": 20 }
}"#;

fn aerobeam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aerobeam"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("scenario.json");
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn run_writes_report_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let o = aerobeam(&["run", "-c", &cfg, "-o", out.to_str().unwrap(), "--plots"]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in [
        "report.json",
        "metrics.csv",
        "handovers.csv",
        "ecdf_outage.csv",
        "ecdf_handover_rate.csv",
        "trajectories.csv",
        "ecdf_outage.svg",
    ] {
        assert!(out.join(f).exists(), "missing {f}");
    }
}

#[test]
fn empty_config_uses_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{ "trajectories": { "count": 2, "duration_s": 5 } }"#);
    let o = aerobeam(&["run", "-c", &cfg, "-o", dir.path().join("o").to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn missing_terrain_file_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{ "terrain": "no_such_heights.csv" }"#);
    let o = aerobeam(&["run", "-c", &cfg, "-o", dir.path().join("o").to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("no_such_heights.csv"), "{}", stderr(&o));
}

#[test]
fn invalid_field_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{ "update_period_s": 0.01 }"#);
    let o = aerobeam(&["run", "-c", &cfg, "-o", dir.path().join("o").to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("update_period_s"), "{}", stderr(&o));
}

#[test]
fn seed_override_is_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let o = aerobeam(&["run", "-c", &cfg, "-o", out.to_str().unwrap(), "--seed", "7"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let json: serde_json::Value = serde_json::from_slice(&fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(json["config"]["trajectories"]["seed"], 7);
    assert_eq!(json["summary"]["seed"], 7);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(aerobeam(&["run", "-c", &cfg, "-o", a.to_str().unwrap()])
        .status
        .success());
    assert!(aerobeam(&["run", "-c", &cfg, "-o", b.to_str().unwrap(), "--serial"])
        .status
        .success());
    for f in [
        "metrics.csv",
        "handovers.csv",
        "ecdf_outage.csv",
        "ecdf_handover_rate.csv",
        "trajectories.csv",
    ] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn pattern_prints_golden_peaks() {
    let o = aerobeam(&["pattern", "--array", "8x8"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("peak gain: 26.06 dBi"), "{}", stdout(&o));
    let o = aerobeam(&["pattern", "--array", "16x16"]);
    assert!(stdout(&o).contains("peak gain: 32.08 dBi"), "{}", stdout(&o));
}

#[test]
fn single_element_cut_is_element_pattern() {
    let dir = tempfile::tempdir().unwrap();
    let o = aerobeam(&[
        "pattern",
        "--array",
        "1x1",
        "--plane",
        "azimuth",
        "-o",
        dir.path().to_str().unwrap(),
        "--plots",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("peak gain: 8.00 dBi"));
    assert!(stdout(&o).contains("HPBW azimuth: 65.00 deg"));
    let mut r = csv::Reader::from_path(dir.path().join("pattern_azimuth.csv")).unwrap();
    assert_eq!(r.headers().unwrap(), vec!["angle_deg", "gain_db"]);
    for row in r.records() {
        let row = row.unwrap();
        let phi: f64 = row[0].parse().unwrap();
        let gain: f64 = row[1].parse().unwrap();
        let element = 8.0 - (12.0 * (phi / 65.0).powi(2)).min(30.0);
        assert!((gain - element).abs() < 1e-9, "{phi}: {gain} vs {element}");
    }
    assert!(dir.path().join("pattern_azimuth.svg").exists());
}

#[test]
fn bad_array_is_usage_error() {
    let o = aerobeam(&["pattern", "--array", "0x8"]);
    assert_eq!(o.status.code(), Some(2));
    let o = aerobeam(&["pattern", "--array", "eight"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn topology_sweep_fans_out() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("sweep");
    let o = aerobeam(&[
        "sweep",
        "-c",
        &cfg,
        "--axis",
        "topology",
        "--values",
        "1x64,8x8,16x4,64x1",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    for v in ["1x64", "8x8", "16x4", "64x1"] {
        assert!(out.join(format!("topology_{v}")).join("metrics.csv").exists());
    }
    let rows = csv::Reader::from_path(out.join("comparison.csv"))
        .unwrap()
        .records()
        .count();
    assert_eq!(rows, 4);
}

#[test]
fn update_period_sweep_shares_trajectories() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("sweep");
    let o = aerobeam(&[
        "sweep",
        "-c",
        &cfg,
        "--axis",
        "update-period",
        "--values",
        "0.1,0.2,0.5",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let first = fs::read(out.join("update-period_0.1/trajectories.csv")).unwrap();
    for v in ["0.2", "0.5"] {
        assert_eq!(
            fs::read(out.join(format!("update-period_{v}/trajectories.csv"))).unwrap(),
            first
        );
    }
}

#[test]
fn unknown_axis_lists_valid_axes() {
    let o = aerobeam(&["sweep", "--axis", "speed", "--values", "1", "-o", "/tmp/unused"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    for axis in ["topology", "update-period", "altitude"] {
        assert!(err.contains(axis), "{err}");
    }
}

#[test]
fn help_documents_config_keys() {
    let text = stdout(&aerobeam(&["--help"]));
    for key in [
        "radio.carrier_hz",
        "26000000000",
        "update_period_s",
        "a3.threshold_db",
        "trajectories.count",
        "outage_threshold_db",
    ] {
        assert!(text.contains(key), "--help lacks {key}");
    }
}

#[test]
fn generators_write_loadable_files() {
    let dir = tempfile::tempdir().unwrap();
    let traj = dir.path().join("t.csv");
    let dep = dir.path().join("d.json");
    let o = aerobeam(&["gen-trajectories", "--count", "5", "-o", traj.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(csv::Reader::from_path(&traj).unwrap().records().count(), 5);
    let o = aerobeam(&["gen-deployment", "--source", "hex:1:500", "-o", dep.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));

    let cfg = write_config(
        dir.path(),
        r#"{ "deployment": "d.json", "trajectories": { "file": "t.csv", "duration_s": 20 } }"#,
    );
    let o = aerobeam(&["run", "-c", &cfg, "-o", dir.path().join("o").to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("5 trajectories, 21 sectors"), "{}", stdout(&o));
}
