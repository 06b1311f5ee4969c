use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn srs(n: usize) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("../core/tests/fixtures/srs/srs{n}.json"))
}

fn rimay(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rimay"))
        .env_remove("RIMAY_CONFIG")
        .arg("--model")
        .arg(fixture("model.json"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &PathBuf) -> &str {
    p.to_str().unwrap()
}

#[test]
fn check_golden_file_passes() {
    let o = rimay(&["check", path(&fixture("golden.json"))]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).trim_end().ends_with("12/12 representable"));
}

#[test]
fn check_reports_unknown_verb() {
    let o = rimay(&["check", path(&fixture("unknown_verb.txt"))]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    let cause1: Vec<_> = out.lines().filter(|l| l.contains("cause 1")).collect();
    assert_eq!(cause1.len(), 1, "{out}");
    assert!(cause1[0].contains("unknown_verb.txt:3:1: R2"));
    assert!(out.contains("unknown_verb.txt:3:15: error: `frobnicate` is not a verb in the lexicon"));
}

#[test]
fn check_missing_file_is_usage_error() {
    let o = rimay(&["check", "/nonexistent/requirements.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cannot read"));
}

#[test]
fn check_malformed_document_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "[{\"id\": 1}]").unwrap();
    assert_eq!(rimay(&["check", path(&bad)]).status.code(), Some(2));
}

#[test]
fn check_json_feeds_stats() {
    let o = rimay(&["check", "--json", path(&srs(1)), path(&srs(2))]);
    assert_eq!(o.status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let records = dir.path().join("records.json");
    std::fs::write(&records, &o.stdout).unwrap();
    let value: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(value[0]["total"], 87);
    assert_eq!(value[0]["representable"], 65);

    let s = rimay(&["stats", "--json", path(&records)]);
    assert_eq!(s.status.code(), Some(0), "{}", String::from_utf8_lossy(&s.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&s.stdout).unwrap();
    assert_eq!(summary["reports"].as_array().unwrap().len(), 2);
    assert_eq!(summary["tests"].as_array().unwrap().len(), 1);
}

#[test]
fn stats_prints_reference_tables() {
    let o = rimay(&["stats", path(&srs(1)), path(&srs(2)), path(&srs(3)), path(&srs(4))]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    for needle in ["74.7", "85.0", "93.8", "94.1", "saturated: yes", "-1.81", "-4.50", "3.35e-6", "-3.21", "-2.53", "-1.86", "-0.11"] {
        assert!(out.contains(needle), "missing {needle}:\n{out}");
    }
    assert_eq!(out.matches("reject").count(), 5);
    assert_eq!(out.matches("retain").count(), 1);
}

#[test]
fn stats_single_file_has_no_tests() {
    let out = stdout(&rimay(&["stats", path(&srs(4))]));
    assert!(out.contains("94.1"));
    assert!(!out.contains("p-value"));
}

#[test]
fn stats_alpha_flag_recomputes_decision() {
    let out = stdout(&rimay(&["stats", "--alpha", "0.01", path(&srs(1)), path(&srs(2))]));
    let line = out.lines().find(|l| l.contains("-1.81")).unwrap();
    assert!(line.ends_with("retain"), "{line}");
}

#[test]
fn stats_rejects_bad_alpha() {
    assert_eq!(rimay(&["stats", "--alpha", "1.5", path(&srs(1))]).status.code(), Some(2));
}

#[test]
fn stats_requires_causes() {
    let dir = tempfile::tempdir().unwrap();
    let doc = dir.path().join("srs.txt");
    std::fs::write(&doc, "System-A must store the record\n\nSystem-A must store \"open\n").unwrap();
    let o = rimay(&["stats", path(&doc)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("R2"));
}

#[test]
fn parse_prints_canonical_form() {
    let o = rimay(&["parse", "If Instruction.Status is Valid, System-A must send the report to System-B"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("If Instruction.Status is equal to Valid, System-A must send the report to System-B\n"));
    let bad = rimay(&["parse", "--json", "System-A must frobnicate the record"]);
    assert_eq!(bad.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&bad.stdout).unwrap();
    assert_eq!(v["diagnostics"][0]["cause"], "cause1_unknown_verb");
}

#[test]
fn parse_reads_stdin() {
    use std::io::Write;
    let mut child = Command::new(env!("CARGO_BIN_EXE_rimay"))
        .env_remove("RIMAY_CONFIG")
        .args(["parse", "-"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"System-A must store the record\n").unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn lexicon_listing_and_lookup() {
    let o = rimay(&["lexicon"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).trim_end().ends_with("48 codes"));
    let hit = rimay(&["lexicon", "--lookup", "receives"]);
    assert_eq!(stdout(&hit).trim(), "obtain-13.5.2: receive");
    assert_eq!(rimay(&["lexicon", "--lookup", "frobnicate"]).status.code(), Some(1));
}

#[test]
fn config_file_supplies_paths() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(fixture("model.json"), dir.path().join("model.json")).unwrap();
    let config = dir.path().join("rimay.json");
    std::fs::write(&config, r#"{ "model_path": "model.json", "log_level": "warn" }"#).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_rimay"))
        .env("RIMAY_CONFIG", &config)
        .args(["parse", "--json", "System-A must receive a DA_file from CFCL_IT"])
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    // With the model loaded no unknown-name warnings remain.
    assert_eq!(v["diagnostics"].as_array().unwrap().len(), 0, "{v}");

    std::fs::write(&config, r#"{ "model_path": "missing.json" }"#).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_rimay")).env("RIMAY_CONFIG", &config).args(["lexicon"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    std::fs::write(&config, r#"{ "colour": "blue" }"#).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_rimay")).env("RIMAY_CONFIG", &config).args(["lexicon"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn serve_fails_when_port_is_taken() {
    let taken = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = taken.local_addr().unwrap().to_string();
    let o = rimay(&["serve", "--bind", &addr]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cannot bind"));
}

#[test]
fn serve_rejects_port_zero() {
    assert_eq!(rimay(&["serve", "--bind", "127.0.0.1:0"]).status.code(), Some(2));
}
