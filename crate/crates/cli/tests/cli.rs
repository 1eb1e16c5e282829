// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::{Command, Output};

fn fixtures(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(rel)
}

fn evolve(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evolve"))
        .args(args)
        .env("RUST_LOG", "warn")
        .env_remove("EVOLVE_API_KEY")
        .output()
        .expect("spawn evolve")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout_json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn hamming() -> String {
    fixtures("problems/hamming").display().to_string()
}

#[test]
fn synthetic_run_exit_code_follows_status() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().join("run");
    let o = evolve(&[
        "run", "--problem", &hamming(), "--backend", "synthetic", "--llm", "mock", "--seed", "4",
        "--mock-guidance", "1", "--out", out.to_str().unwrap(),
    ]);
    let s = stdout_json(&o);
    let expected = if s["status"] == "solved" { 0 } else { 2 };
    assert_eq!(code(&o), expected, "{s}");
    assert!(out.join("nodes.jsonl").is_file());

    let r = evolve(&["report", out.to_str().unwrap()]);
    assert_eq!(code(&r), 0);
    assert_eq!(stdout_json(&r), s);
}

#[test]
fn unsolved_gen_exits_2() {
    let o = evolve(&[
        "run", "--problem", &hamming(), "--backend", "synthetic", "--llm", "mock", "--landscape", "hamming64",
        "--max-nodes", "10", "--strategy", "random",
    ]);
    assert_eq!(code(&o), 2);
    let s = stdout_json(&o);
    assert_eq!(s["status"], "budget_exhausted");
    assert_eq!(s["node_count"], 10);
}

#[test]
fn igr_run_warns_about_budget_mismatch() {
    let o = evolve(&[
        "run", "--problem", &hamming(), "--backend", "synthetic", "--llm", "mock", "--strategy", "igr", "--ideas", "3",
        "--chain-length", "2", "--max-nodes", "10", "--landscape", "hamming64",
    ]);
    assert_eq!(code(&o), 2);
    assert_eq!(stdout_json(&o)["node_count"], 6);
    assert!(String::from_utf8_lossy(&o.stderr).contains("differs from max_nodes"));
}

#[test]
fn configuration_errors_exit_3() {
    let missing = evolve(&["run", "--problem", "/definitely/not/here", "--backend", "synthetic", "--llm", "mock"]);
    assert_eq!(code(&missing), 3);
    assert!(String::from_utf8_lossy(&missing.stderr).contains("problem.json"));

    let adder = fixtures("problems/adder4").display().to_string();
    assert_eq!(code(&evolve(&["run", "--problem", &adder, "--llm", "mock"])), 3);
    assert_eq!(code(&evolve(&["run", "--problem", &hamming(), "--backend", "synthetic", "--llm", "mock", "--clock-sweep", "3-x"])), 3);
    assert_eq!(code(&evolve(&["run", "--problem", &hamming(), "--strategy", "beam"])), 3);
    assert_eq!(code(&evolve(&["report", "/definitely/not/here"])), 3);
}

#[test]
fn missing_simulator_exits_4() {
    let adder = fixtures("problems/adder4").display().to_string();
    let o = Command::new(env!("CARGO_BIN_EXE_evolve"))
        .args(["run", "--problem", &adder, "--llm", "remote"])
        .env("EVOLVE_IVERILOG", "/definitely/not/here/iverilog")
        .output()
        .unwrap();
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("EVOLVE_IVERILOG"));
}

#[test]
fn stg_emits_testbench() {
    let d = tempfile::tempdir().unwrap();
    let tb = d.path().join("tb.v");
    let dut = fixtures("verilog/adder4_dut.v").display().to_string();
    let golden = fixtures("verilog/adder4_golden.v").display().to_string();
    let o = evolve(&["stg", &dut, "--golden", &golden, "-o", tb.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&tb).unwrap();
    assert!(text.contains("adder4_ref"));
    assert!(text.contains("STG_RESULT"));

    let again = evolve(&["stg", &dut, "--golden", &golden]);
    assert_eq!(String::from_utf8(again.stdout).unwrap(), text);

    let wrong = evolve(&["stg", &golden, "--golden", &golden, "--top", "nope"]);
    assert_eq!(code(&wrong), 3);
}
