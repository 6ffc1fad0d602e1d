//! End-to-end tests of the binary: golden reports for the bundled
//! examples, exit codes, and input-encoding equivalences.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_aniso"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

fn write_temp(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("aniso-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

/// Canonical serialization with the timing redacted.
fn redact(json_text: &str) -> String {
    let mut v: serde_json::Value = serde_json::from_str(json_text).expect("valid json");
    v["timing_ms"] = serde_json::json!(0);
    serde_json::to_string_pretty(&v).unwrap()
}

#[test]
fn golden_reports_for_bundled_examples() {
    for name in
        ["paper-z4", "semisimple-hyperbolic", "cyclic-unit", "composite-12", "poly-mixed"]
    {
        let example = run(&["example", name]);
        assert!(example.status.success());
        let path = write_temp(&format!("{name}.json"), &stdout(&example));
        let analyzed = run(&["analyze", path.to_str().unwrap(), "--json"]);
        assert!(analyzed.status.success(), "{name}: {analyzed:?}");
        let got = redact(&stdout(&analyzed));
        let golden_path =
            PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("tests/golden/{name}.json"));
        let want = redact(&std::fs::read_to_string(&golden_path).unwrap());
        assert_eq!(got, want, "golden mismatch for {name}");
    }
}

#[test]
fn paper_example_report_values() {
    let example = run(&["example", "paper-z4"]);
    let path = write_temp("paper-values.json", &stdout(&example));
    let analyzed = run(&["analyze", path.to_str().unwrap(), "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&analyzed)).unwrap();
    assert_eq!(v["nondegenerate"], true);
    assert_eq!(v["anisotropic"], false);
    assert_eq!(v["quasi_anisotropic"], false);
    let c = &v["components"][0];
    // lr = 2M and the oracle radical root is zero
    assert_eq!(c["lr"]["length"], 2);
    assert_eq!(c["rr_formula"]["length"], 0);
    assert_eq!(c["rr_formula"]["d"], 3);
    assert_eq!(c["rr_oracle"]["length"], 0);
}

#[test]
fn gram_and_gram_qz_agree() {
    let gram = write_temp(
        "enc-a.json",
        r#"{"ring": {"family": "Zp", "p": 2, "n": 2}, "module": [4, 4],
            "gram": [[2, 1], [1, 2]]}"#,
    );
    let qz = write_temp(
        "enc-b.json",
        r#"{"ring": {"family": "Zp", "p": 2, "n": 2}, "module": [4, 4],
            "gram_qz": [["2/4", "1/4"], ["1/4", "2/4"]]}"#,
    );
    let a = run(&["analyze", gram.to_str().unwrap(), "--json"]);
    let b = run(&["analyze", qz.to_str().unwrap(), "--json"]);
    assert_eq!(redact(&stdout(&a)), redact(&stdout(&b)));
}

#[test]
fn composite_report_has_per_prime_sections() {
    let path = write_temp(
        "mod12.json",
        r#"{"ring": {"modulus": 12}, "module": [12], "gram": [[1]]}"#,
    );
    let out = run(&["analyze", path.to_str().unwrap(), "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let comps = v["components"].as_array().unwrap();
    assert_eq!(comps.len(), 2);
    assert_eq!(comps[0]["p"], 2);
    assert_eq!(comps[1]["p"], 3);
}

#[test]
fn exit_codes() {
    // 0: success
    let ok = write_temp("ok.json", r#"{"ring": {"modulus": 4}, "module": [4], "gram": [[1]]}"#);
    assert_eq!(run(&["analyze", ok.to_str().unwrap()]).status.code(), Some(0));

    // 2: malformed input
    let bad = write_temp("bad.json", r#"{"ring": {"modulus": 12}, "module": [5], "gram": [[1]]}"#);
    assert_eq!(run(&["analyze", bad.to_str().unwrap()]).status.code(), Some(2));
    let syntax = write_temp("syntax.json", "{not json");
    assert_eq!(run(&["analyze", syntax.to_str().unwrap()]).status.code(), Some(2));
    let asym = write_temp(
        "asym.json",
        r#"{"ring": {"modulus": 4}, "module": [4, 4], "gram": [[1, 2], [3, 1]]}"#,
    );
    assert_eq!(run(&["analyze", asym.to_str().unwrap()]).status.code(), Some(2));
    let badqz = write_temp(
        "badqz.json",
        r#"{"ring": {"modulus": 4}, "module": [4], "gram_qz": [["1/3"]]}"#,
    );
    assert_eq!(run(&["analyze", badqz.to_str().unwrap()]).status.code(), Some(2));

    // 2: unknown suite or example
    assert_eq!(run(&["verify", "--suite", "bogus", "--p", "3"]).status.code(), Some(2));
    assert_eq!(run(&["example", "bogus"]).status.code(), Some(2));

    // 3: budget exhaustion without --no-oracle
    let big = write_temp(
        "big.json",
        r#"{"ring": {"family": "Zp", "p": 2, "n": 7}, "module": [128, 128],
            "gram": [[1, 0], [0, 1]]}"#,
    );
    assert_eq!(run(&["analyze", big.to_str().unwrap()]).status.code(), Some(3));
    assert_eq!(
        run(&["analyze", big.to_str().unwrap(), "--no-oracle"]).status.code(),
        Some(0)
    );
    // the budget override lifts the limit
    let lifted = bin()
        .args(["analyze", big.to_str().unwrap(), "--budget", "20000"])
        .output()
        .unwrap();
    assert_eq!(lifted.status.code(), Some(0));
    let via_env = bin()
        .env("ANISO_BUDGET", "20000")
        .args(["analyze", big.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(via_env.status.code(), Some(0));
}

#[test]
fn verify_runs_and_is_deterministic() {
    let args = [
        "verify", "--suite", "srt", "--p", "2", "--max-len", "3", "--samples", "40", "--seed",
        "11", "--json",
    ];
    let a = run(&args);
    assert_eq!(a.status.code(), Some(0));
    let b = run(&args);
    let strip = |out: &Output| {
        let mut v: serde_json::Value = serde_json::from_str(&stdout(out)).unwrap();
        v["duration_ms"] = serde_json::json!(0);
        serde_json::to_string(&v).unwrap()
    };
    assert_eq!(strip(&a), strip(&b));
    let v: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(v["failures"].as_array().unwrap().len(), 0);
}

#[test]
fn verify_main1_suite_passes() {
    let out = run(&["verify", "--suite", "main1", "--p", "3", "--max-len", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["verify", "--suite", "srt", "--p", "2", "--max-len", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["verify", "--suite", "main1", "--p", "2", "--family", "fpt", "--max-len", "3"]);
    assert_eq!(out.status.code(), Some(0));
}
