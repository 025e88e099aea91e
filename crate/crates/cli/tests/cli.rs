use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use optinv::kt::{invert, SearchVerdict};
use optinv::problems::{CnfFormula, Graph, InversionTask, TilingInstance};
use serde_json::Value;
use tempfile::TempDir;

fn optinv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_optinv")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_str(&stdout(o)).expect("json on stdout")
}

fn write(dir: &TempDir, name: &str, content: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, content).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const K3: &str = "p edge 3 3\ne 1 2\ne 2 3\ne 1 3\n";

#[test]
fn kt_of_empty_string() {
    let o = optinv(&["kt", "--w", "", "--x", "", "--max-k", "10", "--no-timestamp"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["report"]["bound"]["kt"], 5);
    assert_eq!(v["report"]["bound"]["program"]["opcodes"][0], "HALT");
    assert!(v.get("generated_unix").is_none());
}

#[test]
fn kt_unreachable_exits_one() {
    let o = optinv(&["kt", "--w", "1", "--max-k", "12", "--no-timestamp"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["report"]["bound"], Value::Null);
}

#[test]
fn unsat_exits_one() {
    let dir = TempDir::new().unwrap();
    let cnf = write(&dir, "unsat.cnf", "p cnf 1 2\n1 0\n-1 0\n");
    let o = optinv(&["invert", "--problem", "sat", "--cnf", s(&cnf), "--max-k", "16", "--no-timestamp"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["report"]["verdict"], "BudgetExhausted");
}

#[test]
fn satisfiable_writes_verified_witness() {
    let dir = TempDir::new().unwrap();
    let cnf = write(&dir, "a.cnf", "p cnf 1 1\n1 0\n");
    let wfile = dir.path().join("w.txt");
    let o = optinv(&["invert", "--problem", "sat", "--cnf", s(&cnf), "--witness-out", s(&wfile), "--no-timestamp"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let w = std::fs::read_to_string(&wfile).unwrap().trim().parse().unwrap();
    let task = InversionTask::sat(CnfFormula::new(1, vec![vec![1]]).unwrap());
    assert!(task.verify(&w).accepted);
    assert_eq!(json(&o)["report"]["witness"], w.to_string());
}

#[test]
fn triangle_matches_library_run() {
    let dir = TempDir::new().unwrap();
    let edges = write(&dir, "k3.edges", K3);
    let o = optinv(&["invert", "--problem", "3col", "--graph", s(&edges), "--max-k", "20", "--no-timestamp"]);
    let lib = invert(&InversionTask::three_coloring(Graph::complete(3)), 20).unwrap();
    // No program within phase 20 colours the triangle, so the honest status is 1.
    assert_eq!(lib.verdict, SearchVerdict::BudgetExhausted);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["report"], serde_json::to_value(&lib).unwrap());
}

#[test]
fn missing_file_exits_two() {
    let o = optinv(&["invert", "--problem", "3col", "--graph", "/nonexistent/k3.edges"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/nonexistent/k3.edges"));
}

#[test]
fn malformed_inputs_report_line_and_column() {
    let dir = TempDir::new().unwrap();
    let edges = write(&dir, "bad.edges", "p edge 3 1\ne 1 x\n");
    let o = optinv(&["invert", "--problem", "3col", "--graph", s(&edges)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.edges:2:5:"), "{}", stderr(&o));

    let fam = write(&dir, "fam.txt", "# families\nidentity-all max_len=1\nsat-random vars=x\n");
    let o = optinv(&["bench", "--family-file", s(&fam)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("fam.txt:3:"), "{}", stderr(&o));
}

#[test]
fn bad_arguments_exit_two() {
    assert_eq!(optinv(&["kt", "--max-k", "29"]).status.code(), Some(2));
    assert_eq!(optinv(&["kt", "--w", "012"]).status.code(), Some(2));
    assert_eq!(optinv(&["invert", "--problem", "sat"]).status.code(), Some(2));
    assert_eq!(optinv(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(optinv(&["bench", "--family", "3col-n2", "--c", "1"]).status.code(), Some(2));
}

#[test]
fn predict_exact_fraction() {
    let o = optinv(&["predict", "--data", "0000", "--max-k", "26", "--no-timestamp"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["report"]["p1"], serde_json::json!({ "num": "0", "den": "1" }));
    assert_eq!(v["report"]["hypotheses"].as_array().unwrap().len(), 1);
    assert_eq!(v["report"]["hypotheses"][0]["output"], "00000");
}

#[test]
fn predict_without_hypotheses_exits_one() {
    let o = optinv(&["predict", "--data", "0000", "--max-k", "18"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).is_empty());
}

#[test]
fn bench_csv_header() {
    let o = optinv(&["bench", "--family", "3col-n4", "--c", "10"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("instance_id,steps_optimal,steps_native,ratio_num,ratio_den,found_optimal,found_native,kt"));
    assert_eq!(lines.count(), 1 + 2 + 8 + 64);
}

#[test]
fn bench_summary_has_exact_ratios() {
    let dir = TempDir::new().unwrap();
    let summary = dir.path().join("summary.json");
    let o = optinv(&["bench", "--family", "identity-l2", "--max-k", "14", "--summary", s(&summary), "--no-timestamp"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(summary).unwrap()).unwrap();
    let report = &v["report"][0];
    assert!(report["note"].as_str().unwrap().contains("finite sample"));
    let first = &report["records"][0];
    assert_eq!(first["instance_id"], "identity-e");
    assert!(first["ratio"]["num"].is_u64() && first["ratio"]["den"].is_u64());
}

#[test]
fn reports_are_reproducible() {
    let dir = TempDir::new().unwrap();
    let cnf = write(&dir, "f.cnf", "p cnf 2 2\n1 2 0\n-1 0\n");
    for format in ["json", "csv", "text"] {
        let args = ["invert", "--problem", "sat", "--cnf", s(&cnf), "--format", format, "--no-timestamp", "--parallel"];
        let a = optinv(&args);
        let b = optinv(&args[..args.len() - 1]);
        assert_eq!(a.stdout, b.stdout, "{format}");
    }
    let stamped = optinv(&["kt", "--w", "0"]);
    assert!(json(&stamped)["generated_unix"].is_u64());
}

#[test]
fn out_flag_writes_file() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("r.json");
    let o = optinv(&["kt", "--w", "0", "--out", s(&out), "--no-timestamp"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v["report"]["bound"]["kt"], 11);
}

#[test]
fn reduce_emits_parseable_tiling() {
    let dir = TempDir::new().unwrap();
    let cnf = write(&dir, "f.cnf", "p cnf 1 1\n-1 0\n");
    let o = optinv(&["reduce", "--problem", "sat", "--cnf", s(&cnf), "--steps", "6", "--witness-bits", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let t = TilingInstance::parse_text(&stdout(&o)).unwrap();
    assert_eq!(t.n(), 8);
    let o = optinv(&["reduce", "--problem", "identity", "--x", "0", "--steps", "80", "--witness-bits", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn disasm_bits_and_file() {
    let o = optinv(&["disasm", "010111000"]);
    assert_eq!(stdout(&o), "EMIT\nHALT\n");
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.bits", "1000\n");
    assert_eq!(stdout(&optinv(&["disasm", s(&p)])), "HALT\n");
    let o = optinv(&["disasm", "010100000"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("UnmatchedLoop"));
}
