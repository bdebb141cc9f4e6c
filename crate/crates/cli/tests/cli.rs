use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn empower(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_empower"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Every file under `dir` except the manifest, as (relative path, bytes).
fn artifacts(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.file_name().unwrap() != "manifest.json" {
                out.push((p.strip_prefix(dir).unwrap().display().to_string(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn bsc_channel_report() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("bsc.csv"), "0.89,0.11\n0.11,0.89\n").unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#"{"scenario": {"channel": {"channel": "bsc.csv"}}}"#);
    let out = tmp.path().join("out");
    let o = empower(&["run", &cfg, "--out", out.to_str().unwrap(), "-q"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: Value = serde_json::from_slice(&fs::read(out.join("channel.json")).unwrap()).unwrap();
    let c = report["capacity_bits"].as_f64().unwrap();
    let h = -(0.11f64 * 0.11f64.log2() + 0.89 * 0.89f64.log2());
    assert!((c - (1.0 - h)).abs() < 1e-6, "{c}");
    assert!((c - 0.500084).abs() < 1e-6);
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "maze.json",
        r#"{"seed": 3, "scenario": {"maze": {"map": {"horizon": 4}}}}"#,
    );
    let dirs: Vec<_> = ["a", "b", "c"].iter().map(|d| tmp.path().join(d)).collect();
    for (i, d) in dirs.iter().enumerate() {
        let workers = if i == 2 { "1" } else { "4" };
        let o = empower(&["run", &cfg, "--out", d.to_str().unwrap(), "--workers", workers, "-q"]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let first = artifacts(&dirs[0]);
    assert!(first.iter().any(|(p, _)| p.ends_with(".pgm")));
    assert_eq!(first, artifacts(&dirs[1]));
    assert_eq!(first, artifacts(&dirs[2]));
    // a different seed gives a different maze
    let d = tmp.path().join("d");
    assert!(empower(&["run", &cfg, "--out", d.to_str().unwrap(), "--seed", "4", "-q"]).status.success());
    assert_ne!(first, artifacts(&d));

    let manifest: empower_cli::Manifest =
        serde_json::from_slice(&fs::read(dirs[0].join("manifest.json")).unwrap()).unwrap();
    manifest.verify_artifacts(&dirs[0]).unwrap();
    assert_eq!(manifest.config.seed, 3);
    assert_eq!(manifest.artifacts.len(), first.len());
}

#[test]
fn config_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let empty = write_config(tmp.path(), "empty.json", "");
    let o = empower(&["run", &empty]);
    assert_eq!(o.status.code(), Some(2));

    let unknown = write_config(tmp.path(), "u.json", "{\n  \"scenario\": {\n    \"maze\": {\"horizon\": 5}\n  }\n}\n");
    let o = empower(&["verify", &unknown]);
    assert_eq!(o.status.code(), Some(2));
    let msg = stderr(&o);
    assert!(msg.contains("scenario.maze") && msg.contains("horizon") && msg.contains("line 3"), "{msg}");

    let noisy = write_config(tmp.path(), "n.json", r#"{"scenario": {"box": {"epsilon_noise": 1.0}}}"#);
    let o = empower(&["verify", &noisy]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("epsilon_noise") && stderr(&o).contains("[0, 1)"));

    let o = empower(&["run", tmp.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn computation_errors_exit_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "big.json",
        r#"{"scenario": {"maze": {"map": {"horizon": 9, "method": "ba"}, "distance": false}}}"#,
    );
    let o = empower(&["run", &cfg, "--out", tmp.path().join("o").to_str().unwrap(), "-q"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("horizon too large"), "{}", stderr(&o));
}

#[test]
fn verify_lists_defaults_and_advisories() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "p.json", r#"{"scenario": {"pendulum-control": {}}}"#);
    let o = empower(&["verify", &cfg]);
    assert!(o.status.success());
    let resolved: Value = serde_json::from_slice(&o.stdout).unwrap();
    let params = &resolved["scenario"]["pendulum-control"]["params"];
    assert_eq!(params["gravity"], 9.81);
    assert_eq!(params["a_grid"], 5);
    assert_eq!(resolved["seed"], 0);
    // verify touches no outputs
    assert!(!tmp.path().join("out").exists());

    let big = write_config(tmp.path(), "b.json", r#"{"scenario": {"maze": {"map": {"horizon": 10, "method": "ba"}}}}"#);
    let o = empower(&["verify", &big]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("impoverished"), "{}", stderr(&o));
}

#[test]
fn hidden_pushable_box_map_is_flat() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "box.json",
        r#"{"scenario": {"box": {"pushable": true, "perceivable": false, "radius": 3, "map": {"horizon": 5}}}}"#,
    );
    let out = tmp.path().join("out");
    assert!(empower(&["run", &cfg, "--out", out.to_str().unwrap(), "-q"]).status.success());
    let map: Value = serde_json::from_slice(&fs::read(out.join("empowerment.json")).unwrap()).unwrap();
    let values: Vec<f64> = map["values"].as_array().unwrap().iter().filter_map(Value::as_f64).collect();
    assert_eq!(values.len(), 48);
    assert!(values.iter().all(|v| (v - 61f64.log2()).abs() < 1e-12));
}

#[test]
fn bundled_configs_verify() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for e in fs::read_dir(&dir).unwrap() {
        let p = e.unwrap().path();
        if p.extension().is_some_and(|x| x == "json") {
            let o = empower(&["verify", p.to_str().unwrap()]);
            assert!(o.status.success(), "{}: {}", p.display(), stderr(&o));
            n += 1;
        }
    }
    assert_eq!(n, 11);
}
