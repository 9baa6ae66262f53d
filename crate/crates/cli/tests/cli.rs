// Copyright 2026 The behaviorlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SAMPLE_ORDERS: &str = "\
serial_id,date,time,account_id,security,action,price,volume
O100,28/06/2005,09:54:07,A123,S123,B,10.00,1000
O078,28/06/2005,09:59:52,A348,S123,S,10.10,500
O102,28/06/2005,09:59:52,A980,S123,B,10.10,500
O067,28/06/2005,09:59:56,A690,S123,S,10.00,200
O100,28/06/2005,09:59:56,A123,S123,B,10.00,200
O089,28/06/2005,10:07:49,A531,S123,S,10.00,300
O100,28/06/2005,10:07:49,A123,S123,B,10.00,300
";

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_behaviorlab")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn lines(p: &Path) -> Vec<serde_json::Value> {
    fs::read_to_string(p)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn sample_orders_converts_to_five_account_sequences() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "t1.csv", SAMPLE_ORDERS);
    let out = dir.path().join("seqs.jsonl");
    let o = bin(&["convert", "--kind", "orderbook", "--input", s(&input), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("records=7 sequences=5"), "{}", stdout(&o));
    let seqs = lines(&out);
    let accounts: Vec<&str> = seqs.iter().map(|v| v["subject_id"].as_str().unwrap()).collect();
    assert_eq!(accounts, ["A123", "A348", "A531", "A690", "A980"]);
}

#[test]
fn empty_input_gives_empty_output() {
    let dir = tempfile::tempdir().unwrap();
    for (name, text) in [("zero.csv", ""), ("header.csv", "serial_id,date,time,account_id,security,action,price,volume\n")] {
        let input = write(dir.path(), name, text);
        let out = dir.path().join("out.jsonl");
        let o = bin(&["convert", "--kind", "orderbook", "--input", s(&input), "--out", s(&out)]);
        assert_eq!(code(&o), 0, "{name}: {}", stderr(&o));
        assert!(stdout(&o).contains("records=0 sequences=0 dropped_empty=0"));
        assert_eq!(fs::read(&out).unwrap(), b"");
    }
}

#[test]
fn bad_date_exits_2_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "bad.csv", &SAMPLE_ORDERS.replace("28/06/2005,09:59:52,A348", "2005.06.28,09:59:52,A348"));
    let o = bin(&["convert", "--kind", "orderbook", "--input", s(&input)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn missing_input_exits_2() {
    let o = bin(&["convert", "--kind", "activity", "--input", "/nonexistent/acts.csv"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(code(&bin(&["mine", "--mode", "sideways", "--input", "x"])), 1);
    assert_eq!(code(&bin(&["frobnicate"])), 1);
    assert_eq!(code(&bin(&["--help"])), 0);
}

#[test]
fn generate_profile_and_seed_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g");
    let o = bin(&["generate", "--profile", "lottery", "--seed", "1", "--out", s(&out)]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    let o = bin(&["generate", "--profile", "uniform", "--out", s(&out)]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
}

#[test]
fn generate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let o = bin(&["generate", "--profile", "debt-cohort", "--seed", seed, "--persons", "300", "--out", s(&out)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(&out)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (e.file_name().into_string().unwrap(), fs::read(e.path()).unwrap())
            })
            .collect();
        files.sort();
        files
    };
    let a = run("a", "3");
    assert_eq!(a, run("b", "3"));
    assert_ne!(a, run("c", "4"));
    assert!(a.iter().any(|(n, _)| n == "truth.json"));
}

/// Generates the debt-cohort fixture and converts it; returns the activity
/// and demographic behavior files.
fn cohort_fixture(dir: &Path) -> (PathBuf, PathBuf) {
    let g = dir.join("g");
    assert_eq!(code(&bin(&["generate", "--profile", "debt-cohort", "--seed", "9", "--persons", "400", "--out", s(&g)])), 0);
    let cfg = g.join("config.toml");
    let acts = dir.join("acts.jsonl");
    let demo = dir.join("demo.jsonl");
    let o = bin(&[
        "convert", "--kind", "activity", "--input", s(&g.join("activities.csv")), "--debts",
        s(&g.join("debts.csv")), "--config", s(&cfg), "--out", s(&acts),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = bin(&[
        "convert", "--kind", "demographic", "--input", s(&g.join("demographics.csv")), "--debts",
        s(&g.join("debts.csv")), "--config", s(&cfg), "--out", s(&demo),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    (acts, demo)
}

#[test]
fn schema_mismatch_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let (acts, _) = cohort_fixture(dir.path());
    let o = bin(&["mine", "--mode", "exceptional", "--input", s(&acts)]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    let junk = write(dir.path(), "junk.jsonl", "{\"subject_id\": 1}\n");
    assert_eq!(code(&bin(&["mine", "--mode", "impact", "--input", s(&junk)])), 3);
}

#[test]
fn contrast_of_identical_datasets_is_all_zero() {
    let dir = tempfile::tempdir().unwrap();
    let (acts, _) = cohort_fixture(dir.path());
    let out = dir.path().join("contrast.jsonl");
    let o = bin(&["mine", "--mode", "contrast", "--input", s(&acts), "--input", s(&acts), "--min-supp", "0.05", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = lines(&out);
    assert!(!rows.is_empty());
    for r in rows {
        assert_eq!(r["Cd"].as_f64(), Some(0.0));
        assert_eq!(r["Cdr"].as_f64(), Some(1.0));
    }
}

#[test]
fn empty_report_is_not_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let (acts, _) = cohort_fixture(dir.path());
    let out = dir.path().join("rev.jsonl");
    let o = bin(&["mine", "--mode", "reversal", "--input", s(&acts), "--cir-min", "1e9", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(fs::read(&out).unwrap(), b"");
}

#[test]
fn combined_rows_satisfy_ip_identity() {
    let dir = tempfile::tempdir().unwrap();
    let (acts, demo) = cohort_fixture(dir.path());
    let out = dir.path().join("combined.jsonl");
    let o = bin(&["mine", "--mode", "combined", "--input", s(&demo), "--input", s(&acts), "--min-supp", "0.05", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = lines(&out);
    let patterns: Vec<_> = rows.iter().filter(|r| r["record"] == "pattern").collect();
    assert!(!patterns.is_empty());
    for p in patterns {
        let f = |k: &str| p[k].as_f64().unwrap();
        assert!((f("I_P") - f("lift") / (f("lift_D") * f("lift_A"))).abs() < 1e-9);
    }
}

#[test]
fn oracle_subcommand_agrees_with_miner() {
    let dir = tempfile::tempdir().unwrap();
    let acts = write(
        dir.path(),
        "acts.csv",
        "person_id,timestamp,activity_code\np1,2006-01-02,REA\np1,2006-01-03,UPD\np2,2006-01-02,UPD\np3,2006-01-04,REA\np3,2006-01-05,STM\n",
    );
    let seqs = dir.path().join("seqs.jsonl");
    assert_eq!(code(&bin(&["convert", "--kind", "activity", "--input", s(&acts), "--out", s(&seqs)])), 0);
    let o = bin(&["oracle", "--input", s(&seqs), "--min-supp", "0.3"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stderr(&o).contains("miner_agrees=true"), "{}", stderr(&o));
}
