// SPDX-License-Identifier: Apache-2.0

//! The ten acceptance checks. Each prints one PASS or FAIL line; the test
//! fails if any check does.
//!
//! The lines go straight to stdout so they show even when the harness
//! captures test output.

use std::collections::BTreeSet;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use bsdsynth::distance::{boolean_distance, cluster_outputs, distance_matrix};
use bsdsynth::emit::{check_equivalence, counterexamples, to_netlist, CheckMode, Netlist, NetlistStyle};
use bsdsynth::engine::ClusterLearner;
use bsdsynth::harness::{default_rates, reduction_ablation, theorem1_harness, theorem2_harness};
use bsdsynth::sampling::{random_input, RngStream};
use bsdsynth::{builtin, learn, refine, BitVec, Bsd, LearnConfig, OracleHandle, Provenance, SampleSet};

type Check = Result<String, String>;
type CheckFn = fn() -> Check;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn adder_config() -> LearnConfig {
    LearnConfig {
        seed: 42,
        ..LearnConfig::default()
    }
}

fn distance_arithmetic() -> Check {
    let a = boolean_distance(23, 43, 46);
    let b = boolean_distance(23, 25, 37);
    ensure(a == 20 && b == 11, format!("Dist(23,43,46) = {a}, Dist(23,25,37) = {b}"))
}

fn adder_end_to_end() -> Check {
    let oracle = builtin("adder:8").map_err(|e| e.to_string())?;
    let none = SampleSet::new(16, 9);
    let start = Instant::now();
    let (d, _) = learn(&oracle, &none, &adder_config()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let v = check_equivalence(&d, &oracle, CheckMode::Exhaustive, 1 << 20, &RngStream::new(0, "check", &[]))
        .map_err(|e| e.to_string())?;
    ensure(
        v.is_equivalent() && v.inputs_checked == 65536 && d.node_count() <= 500 && elapsed.as_secs() <= 300,
        format!(
            "equivalent on {}/{} inputs, {} nodes, {:.1}s",
            v.inputs_correct,
            v.inputs_checked,
            d.node_count(),
            elapsed.as_secs_f64()
        ),
    )
}

fn reduction() -> Check {
    let r = reduction_ablation("adder:8", &adder_config()).map_err(|e| e.to_string())?;
    ensure(
        r.full_exact && r.ratio >= 50.0,
        format!(
            "ablation {} nodes vs full {} nodes, ratio {:.1}x",
            r.ablation_nodes, r.full_nodes, r.ratio
        ),
    )
}

fn layer_accuracy_monotone() -> Check {
    let out = theorem1_harness(100, 8, 42).map_err(|e| e.to_string())?;
    let exact = out.accuracy.iter().filter(|a| a.last() == Some(&1.0)).count();
    ensure(
        out.trials == 100 && out.violations == 0,
        format!(
            "{} targets, {} violations, {} reach full accuracy",
            out.trials, out.violations, exact
        ),
    )
}

fn merge_risk() -> Check {
    let mut lines = Vec::new();
    let mut ok = true;
    for (k, expected) in [(1_000u64, 0.4), (10_000, 0.04)] {
        let o = theorem2_harness(20, k, 0.05, 10_000, default_rates(k), 42).map_err(|e| e.to_string())?;
        ok &= o.holds && (o.bound - expected).abs() < 1e-12;
        lines.push(format!(
            "K={k}: {:.4} <= {:.4} + {:.4}",
            o.frequency, o.bound, o.margin
        ));
    }
    ensure(ok, lines.join("; "))
}

fn partition() -> Check {
    let oracle = builtin("adder:8").map_err(|e| e.to_string())?;
    let cfg = LearnConfig::default();
    let m = distance_matrix(
        &oracle,
        cfg.complexity_samples,
        cfg.exhaustive_cap,
        cfg.complexity_floor,
        &RngStream::new(42, "partition", &[]),
    )
    .map_err(|e| e.to_string())?;
    let d87 = m.get(8, 7);
    let max_other = (0..8).filter(|&j| j != 7).map(|j| m.get(8, j)).max().unwrap_or(0);
    let clustering = cluster_outputs(&m, 8).map_err(|e| e.to_string())?;
    let together = clustering.cluster_of(7) == clustering.cluster_of(8);
    ensure(
        d87 > max_other && together,
        format!(
            "Dist(c8,c7) = {d87}, next largest Dist(c8,*) = {max_other}, same cluster with 8 clusters: {together}"
        ),
    )
}

fn variable_order() -> Check {
    let oracle = builtin("adder:8").map_err(|e| e.to_string())?;
    let none = SampleSet::new(16, 9);
    let cfg = adder_config();
    let mut l = ClusterLearner::new(0, vec![7, 8], &oracle, &cfg, &none, None).map_err(|e| e.to_string())?;
    let first = l.step().map_err(|e| e.to_string())?.map(|s| s.var);
    let second = l.step().map_err(|e| e.to_string())?.map(|s| s.var);
    let (Some(first), Some(second)) = (first, second) else {
        return Err("cluster converged before two layers".into());
    };
    let ok = matches!((first, second), (7, 15) | (15, 7));
    ensure(ok, format!("layer 1 picks x{first}, layer 2 picks x{second} (a7 = x7, b7 = x15)"))
}

fn netlist_matches(d: &Bsd, style: NetlistStyle) -> Result<(), String> {
    let text = to_netlist(d, style).map_err(|e| e.to_string())?.to_text();
    let net = Netlist::parse(&text).map_err(|e| e.to_string())?;
    let n = d.inputs();
    for i in 0..1u128 << n {
        let x = BitVec::from_u128(i, n);
        let want = d.evaluate(&x).map_err(|e| e.to_string())?;
        let got = net.evaluate(&x).map_err(|e| e.to_string())?;
        if want != got {
            return Err(format!("{style:?} netlist differs at {x}"));
        }
    }
    Ok(())
}

fn netlist_round_trip() -> Check {
    let circuits = [
        "adder:4",
        "adder:8",
        "subtractor:8",
        "comparator:8",
        "mux:3",
        "parity:16",
        "miniALU:4",
        "miniALU:6",
    ];
    for spec in circuits {
        let oracle = builtin(spec).map_err(|e| e.to_string())?;
        let none = SampleSet::new(oracle.inputs(), oracle.outputs());
        let (d, _) = learn(&oracle, &none, &adder_config()).map_err(|e| format!("{spec}: {e}"))?;
        for style in [NetlistStyle::Basis, NetlistStyle::Mux] {
            netlist_matches(&d, style).map_err(|e| format!("{spec}: {e}"))?;
        }
    }
    Ok(format!(
        "{} circuits, both styles, every input: {}",
        circuits.len(),
        circuits.join(", ")
    ))
}

fn run_learn(dir: &Path, name: &str, threads: Option<&str>, env_threads: Option<&str>) -> Result<Vec<u8>, String> {
    let out = dir.join(name);
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_bsdsynth"));
    cmd.env_remove("BSDSYNTH_THREADS");
    if let Some(t) = env_threads {
        cmd.env("BSDSYNTH_THREADS", t);
    }
    if let Some(t) = threads {
        cmd.args(["--threads", t]);
    }
    cmd.args(["learn", "--oracle", "adder:8", "--seed", "42", "--out"]).arg(&out);
    let status = cmd.output().map_err(|e| e.to_string())?;
    if !status.status.success() {
        return Err(format!("learn exited with {}", status.status));
    }
    let mut bytes = std::fs::read(dir.join(format!("{name}.bsd.json"))).map_err(|e| e.to_string())?;
    bytes.extend(std::fs::read(dir.join(format!("{name}.report.json"))).map_err(|e| e.to_string())?);
    Ok(bytes)
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let a = run_learn(dir.path(), "one", Some("1"), None)?;
    let b = run_learn(dir.path(), "four", Some("4"), None)?;
    let c = run_learn(dir.path(), "env", None, Some("3"))?;
    ensure(
        a == b && b == c,
        format!("--threads 1, --threads 4 and BSDSYNTH_THREADS=3 give identical design and report ({} bytes)", a.len()),
    )
}

fn exhaustive_scores(d: &Bsd, truth: &OracleHandle, seen: &BTreeSet<BitVec>) -> (f64, f64) {
    let n = d.inputs();
    let (mut exact, mut held_bits, mut held_total) = (0u64, 0u64, 0u64);
    for i in 0..1u128 << n {
        let x = BitVec::from_u128(i, n);
        let want = truth.query_one(&x).expect("builtin answers");
        let got = d.evaluate(&x).expect("finalized diagram");
        exact += (want == got) as u64;
        if !seen.contains(&x) {
            held_bits += (want.width() - want.hamming(&got)) as u64;
            held_total += want.width() as u64;
        }
    }
    (exact as f64 / (1u64 << n) as f64, held_bits as f64 / held_total as f64)
}

fn generalization() -> Check {
    let alu = builtin("miniALU:4").map_err(|e| e.to_string())?;
    let (n, m) = (alu.inputs(), alu.outputs());
    let check = RngStream::new(0, "holdout", &[]);
    let mut notes = Vec::new();
    let mut ok = true;
    let mut refined = 0;
    for seed in 0..8u64 {
        let mut rng = RngStream::new(seed, "train", &[]).rng();
        let mut train = SampleSet::new(n, m);
        for _ in 0..4096 {
            let x = random_input(n, &mut rng);
            let y = alu.query_one(&x).map_err(|e| e.to_string())?;
            train.push(x, y, Provenance::Random).map_err(|e| e.to_string())?;
        }
        let seen: BTreeSet<BitVec> = train.iter().map(|s| s.input.clone()).collect();
        let pool = OracleHandle::from_samples(&train).map_err(|e| e.to_string())?;
        let cfg = LearnConfig {
            seed,
            ..LearnConfig::default()
        };
        let (d, report) = learn(&pool, &train, &cfg).map_err(|e| e.to_string())?;
        let (exact, held) = exhaustive_scores(&d, &alu, &seen);
        ok &= exact >= 0.99 && held >= 0.99;
        let worst = counterexamples(&d, &alu, CheckMode::Exhaustive, 1 << 20, &check, 10).map_err(|e| e.to_string())?;
        if worst.is_empty() {
            notes.push(format!("seed {seed}: {exact:.4}/{held:.4}, already exact"));
            continue;
        }
        let (d2, _) = refine(&d, &report, &train, &worst, &pool, &cfg).map_err(|e| e.to_string())?;
        let (exact2, _) = exhaustive_scores(&d2, &alu, &seen);
        let before = check_equivalence(&d, &alu, CheckMode::Exhaustive, 1 << 20, &check).map_err(|e| e.to_string())?;
        let after = check_equivalence(&d2, &alu, CheckMode::Exhaustive, 1 << 20, &check).map_err(|e| e.to_string())?;
        ok &= after.aggregate > before.aggregate && exact2 > exact;
        refined += 1;
        notes.push(format!("seed {seed}: {exact:.4}/{held:.4} -> {exact2:.4}"));
    }
    ok &= refined > 0;
    ensure(
        ok,
        format!("exact-input/held-out-bit accuracy -> after refine; {}", notes.join("; ")),
    )
}

#[test]
fn acceptance() {
    let checks: [(&str, CheckFn); 10] = [
        ("distance arithmetic", distance_arithmetic),
        ("adder end to end", adder_end_to_end),
        ("reduction ablation", reduction),
        ("layer accuracy monotone", layer_accuracy_monotone),
        ("merge risk bound", merge_risk),
        ("partition groups c7 and c8", partition),
        ("variable order picks a7 and b7", variable_order),
        ("netlist round trip", netlist_round_trip),
        ("thread-count determinism", determinism),
        ("generalization and refine", generalization),
    ];
    let mut failed = Vec::new();
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out);
    for (i, (name, f)) in checks.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => {
                let _ = writeln!(out, "PASS {:>2} {name}: {detail} [{secs:.1}s]", i + 1);
            }
            Err(detail) => {
                let _ = writeln!(out, "FAIL {:>2} {name}: {detail} [{secs:.1}s]", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
