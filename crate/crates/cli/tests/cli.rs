use std::path::Path;
use std::process::{Command, Output};

fn meshalign(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_meshalign"))
        .args(args)
        .current_dir(dir)
        .env("SOURCE_DATE_EPOCH", "0")
        .output()
        .expect("binary runs")
}

fn synth(dir: &Path, name: &str, seed: u64) {
    let spec = format!("{name}.spec.json");
    std::fs::write(dir.join(&spec), format!(r#"{{"seed": {seed}, "frames": 6, "render": false}}"#)).unwrap();
    let out = meshalign(dir, &["synth", "--spec", &spec, "--out", name]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn missing_input_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = meshalign(dir.path(), &["fuse", "--cloud", "nope.ply", "--out", "v.tsdf"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("meshalign:"));
}

#[test]
fn unrelated_runs_are_refused_unless_forced() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "a", 1);
    synth(dir.path(), "b", 2);
    let args = ["evaluate", "--pred", "a/gt_joints.csv", "--gt", "b/gt_joints.csv", "--segment-len", "3", "--out", "e.json"];
    assert_eq!(meshalign(dir.path(), &args).status.code(), Some(2));

    let mut forced = args.to_vec();
    forced.push("--force");
    let out = meshalign(dir.path(), &forced);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("e.json.manifest.json").exists());
}

#[test]
fn same_run_evaluates_against_itself_to_zero() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "a", 4);
    let out = meshalign(
        dir.path(),
        &["evaluate", "--pred", "a/gt_joints.csv", "--gt", "a/gt_joints.csv", "--segment-len", "3", "--out", "e.json"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("e.json")).unwrap()).unwrap();
    let w = report["w_mpjpe"]["aggregate_mm"].as_f64().unwrap();
    assert!(w < 1e-9, "{w}");
}

#[test]
fn plot_needs_a_source() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(meshalign(dir.path(), &["plot", "--out", "x.svg"]).status.code(), Some(2));
}
