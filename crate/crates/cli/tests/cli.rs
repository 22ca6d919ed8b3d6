use std::process::{Command, Output};

fn pcsvs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pcsvs")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn state_prints_csv() {
    let o = pcsvs(&["state", "--alpha", "1", "--r", "0.9", "--eta", "0.2", "--m", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let mut lines = out.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let values: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header.len(), values.len());
    assert!(header.contains(&"nbar"));
}

#[test]
fn both_engines_agree_on_sensitivity() {
    let o = pcsvs(&["--engine", "both", "sensitivity", "--alpha", "1", "--r", "0.9", "--eta", "0.2", "--m", "1", "--phi", "0.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn json_output_parses() {
    let o = pcsvs(&["--format", "json", "loss", "qfi-lossy", "--alpha", "1", "--r", "0.9", "--eta", "0.2", "--m", "2", "--t", "0.8"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v.is_object() || v.is_array());
}

#[test]
fn exit_codes() {
    let degenerate = pcsvs(&["sensitivity", "--alpha", "1", "--r", "0.9", "--eta", "0.2", "--m", "1", "--phi", "0"]);
    assert_eq!(degenerate.status.code(), Some(4));
    let bad_eta = pcsvs(&["parity", "--r", "0.9", "--eta", "1.5", "--phi", "0.3"]);
    assert_eq!(bad_eta.status.code(), Some(2));
    let bad_figure = pcsvs(&["figure", "99z", "--out", "."]);
    assert_eq!(bad_figure.status.code(), Some(2));
}

#[test]
fn sweep_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(
        &spec,
        r#"{"fixed": {"alpha": 0.5, "r": 0.6, "m": 2, "phi": 0.4},
            "swept": [{"name": "eta", "start": 0.1, "stop": 0.9, "steps": 5}],
            "outputs": ["parity", "pm"]}"#,
    )
    .unwrap();
    let out = dir.path().join("table.csv");
    let o = pcsvs(&["sweep", "--spec", spec.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out).unwrap();
    assert_eq!(csv.lines().count(), 6);
    assert!(csv.starts_with("eta,parity,pm,error"));
}

#[test]
fn sweep_rejects_malformed_spec() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(&spec, r#"{"fixed": {}, "swept": [], "outputs": []}"#).unwrap();
    let o = pcsvs(&["sweep", "--spec", spec.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn optimize_eta_reports_unit_eta_at_small_phase() {
    let o = pcsvs(&["--format", "json", "optimize-eta", "--alpha", "1", "--r", "0.9", "--m", "1", "--phi", "0.2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("eta_opt"), "{text}");
}
