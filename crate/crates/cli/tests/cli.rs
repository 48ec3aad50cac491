use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn edlcs(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_edlcs"))
        .current_dir(dir)
        .env_remove("EDLCS_SEED")
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn exact_estimate_of_identical_files_is_zero() {
    let d = tempfile::tempdir().unwrap();
    fs::write(d.path().join("a"), "the quick brown fox").unwrap();
    fs::write(d.path().join("b"), "the quick brown fox").unwrap();
    let o = edlcs(d.path(), &["estimate", "--mode", "ed", "--exact", "a", "b"]);
    assert_eq!(stdout(&o).trim(), "0");
    let o = edlcs(d.path(), &["estimate", "--mode", "lcs", "--exact", "a", "b"]);
    assert_eq!(stdout(&o).trim(), "19");
}

#[test]
fn estimate_writes_report() {
    let d = tempfile::tempdir().unwrap();
    fs::write(d.path().join("a"), "kitten").unwrap();
    fs::write(d.path().join("b"), "sitting").unwrap();
    let o = edlcs(d.path(), &["estimate", "a", "b", "--json", "r.json"]);
    assert_eq!(stdout(&o).trim(), "3");
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(v["estimate"], 3.0);
    assert_eq!(v["mode"], "ed");
}

#[test]
fn deviation_of_alternating_sequence() {
    let d = tempfile::tempdir().unwrap();
    fs::write(d.path().join("seq"), "# S = 3\n1\n2\n2\n4\n2\n4\n4\n8\n").unwrap();
    let o = edlcs(d.path(), &["deviation", "seq"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["scaled_total"], 8.0);
    assert_eq!(v["s"], 3);
    assert_eq!(v["schema_version"], 1);
}

#[test]
fn bench_is_reproducible() {
    let d = tempfile::tempdir().unwrap();
    let gen = ["gen", "--generator", "planted_ed", "--pairs", "3", "--length", "512", "--k", "96", "--seed", "7", "-o", "c.bin"];
    stdout(&edlcs(d.path(), &gen));
    let cfg = "repeats = 3\ndispatch_threshold = 16\n";
    fs::write(d.path().join("run.cfg"), cfg).unwrap();
    let run = |json: &str, csv: &str| {
        stdout(&edlcs(d.path(), &["bench", "c.bin", "--config", "run.cfg", "--seed", "11", "--exact", "--json", json, "--csv", csv]));
        (fs::read(d.path().join(json)).unwrap(), fs::read(d.path().join(csv)).unwrap())
    };
    let (j1, c1) = run("1.json", "1.csv");
    let (j2, c2) = run("2.json", "2.csv");
    assert_eq!(j1, j2);
    assert_eq!(c1, c2);
    let v: serde_json::Value = serde_json::from_slice(&j1).unwrap();
    assert_eq!(v["summary"]["pairs"], 3);
    assert_eq!(v["seed"], 11);
    assert_eq!(String::from_utf8(c1).unwrap().lines().count(), 4);
}

#[test]
fn seed_falls_back_to_environment() {
    let d = tempfile::tempdir().unwrap();
    stdout(&edlcs(d.path(), &["gen", "--pairs", "1", "--length", "64", "--k", "4", "--seed", "1", "-o", "c.bin"]));
    let o = Command::new(env!("CARGO_BIN_EXE_edlcs"))
        .current_dir(d.path())
        .env("EDLCS_SEED", "99")
        .args(["bench", "c.bin"])
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["seed"], 99);
    // an explicit flag wins
    let o = Command::new(env!("CARGO_BIN_EXE_edlcs"))
        .current_dir(d.path())
        .env("EDLCS_SEED", "99")
        .args(["bench", "c.bin", "--seed", "3"])
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["seed"], 3);
}

#[test]
fn search_emits_a_witness() {
    let d = tempfile::tempdir().unwrap();
    fs::write(d.path().join("a"), "ACCGGTCGAGTGCGCGGAAGCCGGCCGAA").unwrap();
    fs::write(d.path().join("b"), "GTCGTTCGGAATGCCGTTGCTCTGTAAA").unwrap();
    let v: serde_json::Value = serde_json::from_str(&stdout(&edlcs(d.path(), &["search", "--mode", "lcs", "--exact", "a", "b"]))).unwrap();
    assert_eq!(v["cost"], 20);
    assert_eq!(v["witness"].as_array().unwrap().len(), 20);
    let v: serde_json::Value = serde_json::from_str(&stdout(&edlcs(d.path(), &["search", "a", "b"]))).unwrap();
    assert!(v["script"].is_array());
}

#[test]
fn bad_input_fails_with_message() {
    let d = tempfile::tempdir().unwrap();
    let o = edlcs(d.path(), &["estimate", "missing", "also-missing"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing"));
    let o = edlcs(d.path(), &["estimate", "--mode", "hamming", "a", "b"]);
    assert!(!o.status.success());
    fs::write(d.path().join("bad.cfg"), "repeats = 0\n").unwrap();
    fs::write(d.path().join("a"), "x").unwrap();
    let o = edlcs(d.path(), &["estimate", "--config", "bad.cfg", "a", "a"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.cfg"));
    fs::write(d.path().join("seq"), "1\nfoo\n").unwrap();
    let o = edlcs(d.path(), &["deviation", "seq"]);
    assert!(!o.status.success());
    let o = edlcs(d.path(), &["estimate", "--paper-params", "--desk-profile", "a", "a"]);
    assert!(!o.status.success());
}
