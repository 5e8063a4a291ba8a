use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const SMALL: &str = "[workload]\npattern = \"mixed_random\"\nlength = 2000\nspan_bytes = 4194304\n";

fn hmsim(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hmsim"))
        .current_dir(dir)
        .env_remove("HMSIM_CONFIG_DIR")
        .args(args)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn setup() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("small.toml"), SMALL).unwrap();
    dir
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn run_writes_json_and_timeline() {
    let dir = setup();
    let o = hmsim(dir.path(), &["run", "small.toml", "-o", "out"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = json(&dir.path().join("out/small.json"));
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["requests"]["completed"], 2000);
    let csv = fs::read_to_string(dir.path().join("out/small.timeline.csv")).unwrap();
    assert!(csv.starts_with("end_cycle,"));
}

#[test]
fn override_changes_only_that_key() {
    let dir = setup();
    assert!(hmsim(dir.path(), &["run", "small.toml", "-o", "a"]).status.success());
    let o = hmsim(dir.path(), &["run", "small.toml", "-o", "b", "-s", "policy=always_bypass"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut a = json(&dir.path().join("a/small.json"))["config"].clone();
    let b = json(&dir.path().join("b/small.json"))["config"].clone();
    assert_eq!(a["policy"], "scm_aware");
    assert_eq!(b["policy"], "always_bypass");
    a["policy"] = b["policy"].clone();
    assert_eq!(a, b);
}

#[test]
fn malformed_config_names_the_key() {
    let dir = setup();
    fs::write(dir.path().join("bad.toml"), "[l2]\nsets = 63\n").unwrap();
    let o = hmsim(dir.path(), &["run", "bad.toml"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("l2.sets"), "{}", stderr(&o));

    let o = hmsim(dir.path(), &["run", "small.toml", "-s", "ctc_l2_ways=9"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("ctc_l2_ways"), "{}", stderr(&o));
}

#[test]
fn sweep_runs_every_point() {
    let dir = setup();
    let o = hmsim(dir.path(), &["sweep", "small.toml", "-a", "ctc_l2_ways=1,2,3,4", "-o", "sw", "-j", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    for i in 0..4 {
        let v = json(&dir.path().join(format!("sw/point-{i:03}.json")));
        assert_eq!(v["config"]["ctc_l2_ways"], i + 1);
    }
    let merged = fs::read_to_string(dir.path().join("sw/sweep.csv")).unwrap();
    assert_eq!(merged.lines().count(), 5);
    assert!(merged.lines().next().unwrap().starts_with("point,label,ctc_l2_ways,"));
}

#[test]
fn single_point_sweep_matches_run() {
    let dir = setup();
    assert!(hmsim(dir.path(), &["run", "small.toml", "-o", "r", "-s", "layout=tad"]).status.success());
    assert!(hmsim(dir.path(), &["sweep", "small.toml", "-a", "layout=tad", "-o", "sw"]).status.success());
    let run = fs::read_to_string(dir.path().join("r/small.json")).unwrap();
    let point = fs::read_to_string(dir.path().join("sw/point-000.json")).unwrap();
    assert_eq!(run, point);
}

#[test]
fn report_compares_reports_and_rejects_other_schemas() {
    let dir = setup();
    assert!(hmsim(dir.path(), &["run", "small.toml", "-o", "a"]).status.success());
    assert!(hmsim(dir.path(), &["run", "small.toml", "-o", "b", "-s", "layout=tad"]).status.success());

    let one = hmsim(dir.path(), &["report", "a/small.json"]);
    assert!(one.status.success(), "{}", stderr(&one));
    let two = hmsim(dir.path(), &["report", "a/small.json", "b/small.json"]);
    assert!(two.status.success(), "{}", stderr(&two));
    let one = String::from_utf8(one.stdout).unwrap();
    let two = String::from_utf8(two.stdout).unwrap();
    assert_eq!(one.lines().count(), two.lines().count());
    assert!(two.lines().next().unwrap().len() > one.lines().next().unwrap().len());

    let text = fs::read_to_string(dir.path().join("a/small.json")).unwrap();
    fs::write(dir.path().join("old.json"), text.replacen("\"schema_version\": 1", "\"schema_version\": 0", 1)).unwrap();
    let o = hmsim(dir.path(), &["report", "old.json"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("schema"), "{}", stderr(&o));
}

#[test]
fn gen_trace_then_validate_and_replay() {
    let dir = setup();
    let o = hmsim(dir.path(), &["gen-trace", "small.toml", "-o", "t.trace"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = hmsim(dir.path(), &["validate-trace", "t.trace"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8(o.stdout).unwrap().contains("2000 valid records, 0 errors"));

    fs::write(dir.path().join("bad.trace"), "0 R 0x0 32\n0 X 0x20 32\n0 R 0x40 33\n").unwrap();
    let o = hmsim(dir.path(), &["validate-trace", "bad.trace"]);
    assert!(!o.status.success());
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.contains("line 2") && out.contains("line 3"), "{out}");

    fs::write(dir.path().join("replay.toml"), "[workload]\npattern = \"trace\"\ntrace = \"t.trace\"\n").unwrap();
    let o = hmsim(dir.path(), &["run", "replay.toml", "-o", "out"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(json(&dir.path().join("out/replay.json"))["requests"]["injected"], 2000);
}

#[test]
fn config_dir_from_environment() {
    let dir = setup();
    let work = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_hmsim"))
        .current_dir(work.path())
        .env("HMSIM_CONFIG_DIR", dir.path())
        .args(["run", "small", "-o", "out"])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(work.path().join("out/small.json").exists());

    let o = hmsim(work.path(), &["run", "small"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("not found"));
}
