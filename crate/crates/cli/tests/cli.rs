use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn rateless(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rateless")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn stdout_json(o: &Output) -> serde_json::Value {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn capacity_of_bsc_and_bec() {
    let v = stdout_json(&rateless(&["capacity", "--channel", r#"{"type":"bsc","p":0.25}"#]));
    assert!((v["capacity_bits"].as_f64().unwrap() - 0.188_721_875_540_867).abs() < 1e-6);
    let v = stdout_json(&rateless(&["capacity", "--channel", r#"{"type":"bec","delta":0.5}"#]));
    assert!((v["capacity_bits"].as_f64().unwrap() - 0.5).abs() < 1e-6);
}

#[test]
fn malformed_json_exits_2() {
    let o = rateless(&["capacity", "--channel", "{not json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.json", r#"{"scheme":"known","trials":0,"channel":{"type":"bsc","p":0.1},"codebook":{"M":4},"epsilon":0.1}"#);
    assert_eq!(rateless(&["simulate", "--config", &cfg]).status.code(), Some(2));
    assert_eq!(rateless(&["simulate", "--config", "/nonexistent/x.json"]).status.code(), Some(2));
}

#[test]
fn bounds_point_evaluation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "b.json",
        r#"{"formulas":["rate_known","expected_time_known","rate_universal"],"channel":{"type":"bsc","p":0.25},
            "fixed":{"log2_m":10,"epsilon":0.015625}}"#,
    );
    let v = stdout_json(&rateless(&["bounds", "--config", &cfg]));
    let t = v["expected_time_known"].as_f64().unwrap();
    assert!((t - 85.78).abs() < 0.01, "{t}");
    assert!(v["rate_known"].as_f64().unwrap() > v["rate_universal"].as_f64().unwrap());
    let small = write(
        dir.path(),
        "small.json",
        r#"{"formulas":["rate_universal"],"fixed":{"capacity":0.1,"log2_m":1,"epsilon":0.5,"x_size":2,"y_size":2}}"#,
    );
    let v = stdout_json(&rateless(&["bounds", "--config", &small]));
    assert!(v["rate_universal"]["error"].is_string(), "domain errors are reported per formula: {v}");
    let missing = write(dir.path(), "missing.json", r#"{"formulas":["rate_known"],"fixed":{"capacity":0.1}}"#);
    assert_eq!(rateless(&["bounds", "--config", &missing]).status.code(), Some(2));
}

#[test]
fn simulate_is_reproducible_and_dumps_trials() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.json",
        r#"{"scheme":"known","channel":{"type":"bsc","p":0.11},"codebook":{"M":64},"epsilon":0.0625,"trials":300}"#,
    );
    let out1 = dir.path().join("r1.json");
    let out2 = dir.path().join("r2.json");
    let csv = dir.path().join("t.csv");
    let o = rateless(&["simulate", "--config", &cfg, "--seed", "11", "--out", out1.to_str().unwrap(), "--dump-trials", csv.to_str().unwrap()]);
    assert!(o.status.success());
    let o = rateless(&["simulate", "--config", &cfg, "--seed", "11", "--workers", "3", "--out", out2.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(fs::read(&out1).unwrap(), fs::read(&out2).unwrap());
    let rows = fs::read_to_string(&csv).unwrap();
    assert_eq!(rows.lines().count(), 301);
    let report: serde_json::Value = serde_json::from_slice(&fs::read(&out1).unwrap()).unwrap();
    assert_eq!(report["seed"], 11);
    let csv_report = rateless(&["simulate", "--config", &cfg, "--format", "csv"]);
    assert!(String::from_utf8(csv_report.stdout).unwrap().starts_with("scheme,trials"));
}

fn gap_column(epsilon: f64) -> Vec<f64> {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "w.json",
        &format!(
            r#"{{"formulas":["rate_known","rate_universal","universal_penalty"],"channel":{{"type":"bsc","p":0.11}},
            "fixed":{{"epsilon":{epsilon}}},"sweep":{{"variable":"log2_m","start":8,"stop":64,"steps":8}}}}"#
        ),
    );
    let o = rateless(&["sweep", "--config", &cfg]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "log2_m,rate_known,rate_universal,universal_penalty");
    let mut gaps = Vec::new();
    for line in lines {
        let cells: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        gaps.push(cells[1] - cells[2]);
    }
    assert_eq!(gaps.len(), 8);
    gaps
}

#[test]
fn sweep_gap_is_positive_and_shrinks() {
    let gaps = gap_column(0.1);
    assert!(gaps.iter().all(|&g| g > 0.0));
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    // With a small ε the gap first grows, then shrinks; it stays positive.
    let gaps = gap_column(0.001);
    assert!(gaps.iter().all(|&g| g > 0.0));
    assert!(gaps[2..].windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
}

#[test]
fn empty_sweep_is_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "e.json",
        r#"{"formula":"rate_known","fixed":{"capacity":0.5,"epsilon":0.01},"sweep":{"variable":"log2_m","start":8,"stop":64,"steps":0}}"#,
    );
    let o = rateless(&["sweep", "--config", &cfg]);
    assert!(o.status.success());
    assert_eq!(String::from_utf8(o.stdout).unwrap(), "log2_m,rate_known\n");
}

#[test]
fn simulated_sweep_meets_rate_known() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "sim.json",
        r#"{"formula":"rate_known","channel":{"type":"bsc","p":0.11},"fixed":{"epsilon":0.0625},
            "sweep":{"variable":"log2_m","start":4,"stop":10,"steps":3},"simulate":{"trials":1000}}"#,
    );
    let o = rateless(&["sweep", "--config", &cfg, "--seed", "5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let rate = header.iter().position(|h| *h == "rate_known").unwrap();
    let sim = header.iter().position(|h| *h == "sim_rate").unwrap();
    for line in lines {
        let cells: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert!(cells[sim] >= cells[rate], "{line}");
    }
}

#[test]
fn verify_negative_control_fails_with_exit_1() {
    let o = rateless(&["verify", "--quick", "--only", "4", "--kt-pseudocount", "1.0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8(o.stdout).unwrap().contains("FAIL criterion  4"));
    let o = rateless(&["verify", "--quick", "--only", "4,5"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn documented_examples_run() {
    let docs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/examples");
    let mut seen = 0;
    for entry in fs::read_dir(&docs).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_str().unwrap().to_string();
        let cmd = match name.as_str() {
            "penalty_sweep.json" => "sweep",
            "bounds.json" => "bounds",
            _ => "simulate",
        };
        let o = rateless(&[cmd, "--config", path.to_str().unwrap()]);
        assert!(o.status.success(), "{name}: {}", String::from_utf8_lossy(&o.stderr));
        seen += 1;
    }
    assert_eq!(seen, 6);
}
