use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use tiebound::InstanceFile;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tiebound"))
}

fn instance(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../instances")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn example1() -> String {
    instance("example1.json").to_str().unwrap().to_string()
}

fn write_temp(text: &str) -> tempfile::NamedTempFile {
    let f = tempfile::NamedTempFile::new().unwrap();
    std::fs::write(f.path(), text).unwrap();
    f
}

#[test]
fn analyze_json_golden() {
    let o = run(&["analyze", &example1(), "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["a"], "9/25");
    assert_eq!(v["b"], "49/225");
    assert_eq!(v["delta"], "176/675");
    assert_eq!(v["q"], "2");
    assert_eq!(v["a_over_b"], "81/49");
    assert_eq!(v["delta_over_b"], "176/147");
    assert_eq!(v["theorem_factor"], "17");
    assert_eq!(v["bound_ok"], true);
    assert_eq!(v["checks"]["uniform_theorem"], Value::Null);
}

#[test]
fn instance_echo_round_trips() {
    let o = run(&["analyze", &example1(), "--json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let echo: InstanceFile = serde_json::from_value(v["instance"].clone()).unwrap();
    let text = std::fs::read_to_string(instance("example1.json")).unwrap();
    let orig: InstanceFile = serde_json::from_str(&text).unwrap();
    assert_eq!(echo.to_instance().unwrap(), orig.to_instance().unwrap());
}

#[test]
fn classify_json_reproduces_tie_sets() {
    let o = run(&["classify", &example1(), "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let row = v["rows"].as_array().unwrap().iter().find(|r| r["y"] == "0111").unwrap();
    assert_eq!(row["scores"], serde_json::json!([1, 1, 1, 2]));
    assert_eq!(row["ties"], serde_json::json!([[2, 3], [1, 3], [1, 2], []]));
}

#[test]
fn classify_md_has_every_output() {
    let o = run(&["classify", &example1()]);
    let text = stdout(&o);
    assert!(text.contains("| d(0000,y)-2 |"));
    assert!(text.contains("| 1111 | 2 | 2 | 2 | 3 | {2,3} | {1,3} | {1,2} | {} |"));
    assert_eq!(
        text.lines()
            .filter(|l| l.starts_with("| 0") || l.starts_with("| 1"))
            .count(),
        16
    );
}

#[test]
fn partitions_single_pair() {
    let o = run(&["partitions", &example1(), "--i", "2", "--j", "3", "--csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("N(3|2),2,4/675,{0010 1010}"), "{text}");
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn partitions_rejects_equal_indices() {
    let o = run(&["partitions", &example1(), "--i", "2", "--j", "2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["partitions", &example1(), "--i", "5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_passes_on_example() {
    let o = run(&["verify", &example1(), "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["reproducer"], Value::Null);
}

#[test]
fn crossover_out_of_range_is_input_error() {
    let f = write_temp(r#"{"n": 2, "codewords": ["00", "11"], "prior_weights": ["1", "1"], "p": "3/4"}"#);
    let o = run(&["verify", f.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("p = 3/4 is not in (0, 1/2)"), "{err}");
}

#[test]
fn malformed_files_are_input_errors() {
    for text in [
        "not json",
        r#"{"n": 2, "codewords": ["00", "00"], "prior_weights": ["1", "1"], "p": "1/3"}"#,
        r#"{"n": 3, "codewords": ["00", "11"], "prior_weights": ["1", "1"], "p": "1/3"}"#,
        r#"{"n": 2, "codewords": ["00", "11"], "prior_weights": ["1"], "p": "1/3"}"#,
        r#"{"n": 2, "codewords": ["00", "11"], "prior_weights": ["1", "1"], "p": "1/3", "extra": 1}"#,
    ] {
        let f = write_temp(text);
        let o = run(&["analyze", f.path().to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{text}");
        assert!(!o.stderr.is_empty());
    }
    assert_eq!(run(&["analyze", "/nonexistent/file.json"]).status.code(), Some(2));
}

#[test]
fn unknown_flags_and_format_conflicts_rejected() {
    assert_eq!(run(&["analyze", &example1(), "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["analyze", &example1(), "--csv", "--json"]).status.code(), Some(2));
    assert_eq!(run(&[]).status.code(), Some(2));
}

#[test]
fn fuzz_small_corpus_passes() {
    let o = run(&[
        "fuzz", "--seed", "3", "--trials", "25", "--max-n", "5", "--max-m", "4", "--json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["trials"], 25);
    assert_eq!(v["failures"], serde_json::json!([]));
}

#[test]
fn fuzz_config_errors() {
    assert_eq!(
        run(&["fuzz", "--seed", "1", "--trials", "5", "--max-n", "40"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["fuzz", "--seed", "1", "--trials", "5", "--style", "odd"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn montecarlo_is_deterministic_across_workers() {
    let path = instance("mc_n10.json");
    let args = [
        "montecarlo",
        path.to_str().unwrap(),
        "--samples",
        "30000",
        "--seed",
        "7",
        "--json",
    ];
    let one = bin().args(args).env("RAYON_NUM_THREADS", "1").output().unwrap();
    let four = bin().args(args).env("RAYON_NUM_THREADS", "4").output().unwrap();
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
    let v: Value = serde_json::from_slice(&one.stdout).unwrap();
    assert_eq!(v[0]["metric"], "a");
    assert_eq!(v[2]["samples"], 30000);
}

#[test]
fn exact_reports_are_byte_stable() {
    for sub in ["analyze", "classify", "partitions", "verify"] {
        let a = bin()
            .args([sub, &example1()])
            .env("RAYON_NUM_THREADS", "1")
            .output()
            .unwrap();
        let b = bin()
            .args([sub, &example1()])
            .env("RAYON_NUM_THREADS", "3")
            .output()
            .unwrap();
        assert_eq!(a.stdout, b.stdout, "{sub}");
    }
}

#[test]
fn enumeration_limit_is_enforced() {
    let o = run(&["analyze", instance("mc_n10.json").to_str().unwrap(), "--limit", "8"]);
    assert_eq!(o.status.code(), Some(2));
}
