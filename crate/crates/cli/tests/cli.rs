// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bsdsynth::bsd::SpeculationStats;
use bsdsynth::emit::{save_design, DesignFile, Netlist};
use bsdsynth::{Bsd, Leaf};

const OR2: &str = "inputs=2 outputs=1\n00 0\n10 1\n01 1\n11 1\n";

fn bsdsynth(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bsdsynth"))
        .current_dir(dir)
        .env_remove("BSDSYNTH_THREADS")
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn or2(dir: &Path) -> PathBuf {
    std::fs::write(dir.join("or2.ios"), OR2).unwrap();
    let o = bsdsynth(dir, &["learn", "--table", "or2.ios", "--out", "or2"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    dir.join("or2.bsd.json")
}

#[test]
fn learn_writes_design_report_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = bsdsynth(dir.path(), &["learn", "--oracle", "parity:4", "--seed", "7", "--out", "p"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for suffix in [".bsd.json", ".report.json", ".manifest.json"] {
        assert!(dir.path().join(format!("p{suffix}")).exists(), "missing p{suffix}");
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("p.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["run"]["subcommand"], "learn");
    assert_eq!(manifest["run"]["seed"], 7);
    assert_eq!(manifest["exit_status"], 0);
    assert_eq!(manifest["run"]["outputs"].as_array().unwrap().len(), 2);
}

#[test]
fn or_table_gives_four_nodes() {
    let dir = tempfile::tempdir().unwrap();
    let design = or2(dir.path());
    let (d, _) = bsdsynth::emit::load_design(&design).unwrap();
    assert_eq!(d.node_count(), 4);

    let o = bsdsynth(dir.path(), &["emit", "--design", "or2.bsd.json", "--format", "dot"]);
    assert_eq!(code(&o), 0);
    let dot = stdout(&o);
    assert_eq!(dot.lines().filter(|l| l.contains("label=")).count(), 4);
}

#[test]
fn oracle_source_is_required_and_unique() {
    let dir = tempfile::tempdir().unwrap();
    let o = bsdsynth(dir.path(), &["learn", "--out", "x"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("exactly one oracle source"));
    std::fs::write(dir.path().join("or2.ios"), OR2).unwrap();
    let o = bsdsynth(dir.path(), &["learn", "--oracle", "adder:2", "--table", "or2.ios", "--out", "x"]);
    assert_eq!(code(&o), 2);
    assert_eq!(stderr(&o).trim().lines().count(), 1);
}

#[test]
fn malformed_table_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.ios"), "inputs=2 outputs=1\n00 0\n0x 1\n").unwrap();
    let o = bsdsynth(dir.path(), &["learn", "--table", "bad.ios", "--out", "x"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn validate_reports_equivalence_and_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    or2(dir.path());
    let o = bsdsynth(dir.path(), &["validate", "--design", "or2.bsd.json", "--table", "or2.ios", "--exact"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("equivalent over 4 inputs"));

    // an AND table against the OR design
    std::fs::write(dir.path().join("and2.ios"), "inputs=2 outputs=1\n00 0\n10 0\n01 0\n11 1\n").unwrap();
    let o = bsdsynth(
        dir.path(),
        &["validate", "--design", "or2.bsd.json", "--table", "and2.ios", "--exact", "--counterexamples", "cx.ios"],
    );
    assert_eq!(code(&o), 1);
    let out = stdout(&o);
    let line = out.lines().skip_while(|l| *l != "counterexample:").nth(1).unwrap();
    assert_eq!(line, "10 0");
    let cx = std::fs::read_to_string(dir.path().join("cx.ios")).unwrap();
    assert_eq!(cx, "inputs=2 outputs=1\n10 0\n01 0\n");
}

#[test]
fn sampled_validation_of_exact_design() {
    let dir = tempfile::tempdir().unwrap();
    let o = bsdsynth(dir.path(), &["learn", "--oracle", "adder:3", "--out", "a"]);
    assert_eq!(code(&o), 0);
    let o = bsdsynth(dir.path(), &["validate", "--design", "a.bsd.json", "--oracle", "adder:3", "--samples", "1000"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("aggregate 1.000000 ± 0.000000"));
}

#[test]
fn exhaustive_cap_is_a_capability_error() {
    let dir = tempfile::tempdir().unwrap();
    or2(dir.path());
    let o = bsdsynth(
        dir.path(),
        &["validate", "--design", "or2.bsd.json", "--table", "or2.ios", "--exact", "--cap", "2"],
    );
    assert_eq!(code(&o), 3);
}

#[test]
fn emit_formats_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    or2(dir.path());
    let o = bsdsynth(dir.path(), &["emit", "--design", "or2.bsd.json", "--format", "verilog"]);
    assert_eq!(code(&o), 2);

    let o = bsdsynth(dir.path(), &["emit", "--design", "or2.bsd.json", "--format", "netlist", "--out", "or2.v"]);
    assert_eq!(code(&o), 0);
    let net = Netlist::parse(&std::fs::read_to_string(dir.path().join("or2.v")).unwrap()).unwrap();
    assert_eq!(net.gate_count(), 6);

    let a = bsdsynth(dir.path(), &["emit", "--design", "or2.bsd.json", "--format", "json"]);
    let b = std::fs::read(dir.path().join("or2.bsd.json")).unwrap();
    assert_eq!(a.stdout, b);

    let mut d = Bsd::new(2, 1);
    let leaf = d.add_leaf(Leaf::speculated(SpeculationStats::from_counts(3, 4)));
    d.set_root(0, leaf);
    save_design(&dir.path().join("spec.bsd.json"), &DesignFile::new(&d, None, None)).unwrap();
    let o = bsdsynth(dir.path(), &["emit", "--design", "spec.bsd.json", "--format", "netlist"]);
    assert_eq!(code(&o), 4, "{}", stderr(&o));
    let o = bsdsynth(dir.path(), &["emit", "--design", "spec.bsd.json", "--format", "dot"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn exec_oracle_through_serve() {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_bsdsynth");
    let o = bsdsynth(
        dir.path(),
        &["learn", "--exec", bin, "--exec-arg", "serve", "--exec-arg", "comparator:3", "--out", "c"],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = bsdsynth(dir.path(), &["validate", "--design", "c.bsd.json", "--oracle", "comparator:3", "--exact"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn distance_prints_matrix_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = bsdsynth(
        dir.path(),
        &["distance", "--oracle", "adder:4", "--max-clusters", "4", "--report", "d.json"],
    );
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.lines().next().unwrap().contains("c4"));
    assert_eq!(out.lines().filter(|l| l.starts_with("cluster ")).count(), 4);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("d.json")).unwrap()).unwrap();
    assert_eq!(report["matrix"]["m"], 5);
}

#[test]
fn validate_then_refine_through_files() {
    let dir = tempfile::tempdir().unwrap();
    // every other row of a 3-bit parity table
    let mut rows = String::from("inputs=3 outputs=1\n");
    for i in [0u32, 3, 5, 6] {
        let x: String = (0..3).map(|b| if i >> b & 1 == 1 { '1' } else { '0' }).collect();
        rows.push_str(&format!("{x} {}\n", i.count_ones() % 2));
    }
    std::fs::write(dir.path().join("half.ios"), rows).unwrap();
    let o = bsdsynth(dir.path(), &["learn", "--table", "half.ios", "--out", "h"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = bsdsynth(
        dir.path(),
        &["validate", "--design", "h.bsd.json", "--oracle", "parity:3", "--exact", "--counterexamples", "cx.ios"],
    );
    assert_eq!(code(&o), 1);
    let o = bsdsynth(
        dir.path(),
        &[
            "refine", "--design", "h.bsd.json", "--counterexamples", "cx.ios", "--report", "h.report.json",
            "--table", "half.ios", "--out", "r",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = bsdsynth(dir.path(), &["validate", "--design", "r.bsd.json", "--oracle", "parity:3", "--exact"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(dir.path().join("r.manifest.json").exists());
}

#[test]
fn budget_exhaustion_writes_partial_result() {
    let dir = tempfile::tempdir().unwrap();
    let o = bsdsynth(
        dir.path(),
        &[
            "learn", "--oracle", "adder:4", "--max-probes", "300", "--spec-samples", "100", "--order-samples", "100",
            "--merge-samples", "100", "--out", "b",
        ],
    );
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(dir.path().join("b.bsd.json").exists());
    let manifest = std::fs::read_to_string(dir.path().join("b.manifest.json")).unwrap();
    assert!(manifest.contains("\"exit_status\": 3"));
}

#[test]
fn zero_threads_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = bsdsynth(dir.path(), &["--threads", "0", "learn", "--oracle", "adder:2", "--out", "x"]);
    assert_eq!(code(&o), 2);
}
