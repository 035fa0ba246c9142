// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use bsdsynth::harness::{default_rates, reduction_ablation, theorem1_harness, theorem2_harness};
use bsdsynth::LearnConfig;
use clap::Args;
use serde::Serialize;

use crate::{CmdResult, Failure};

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Random targets for the layer-accuracy check.
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Simulated runs per merge-risk check.
    #[arg(long, default_value_t = 10_000)]
    pub merge_trials: u64,
    /// Write every row as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Serialize)]
struct Row {
    check: String,
    pass: bool,
    detail: String,
}

pub fn run(args: BenchArgs) -> CmdResult {
    let mut rows = Vec::new();

    let cfg = LearnConfig {
        seed: args.seed,
        ..LearnConfig::default()
    };
    let r = reduction_ablation("adder:8", &cfg)?;
    rows.push(Row {
        check: "adder:8 exact".into(),
        pass: r.full_exact && r.full_nodes <= 500,
        detail: format!("{} nodes", r.full_nodes),
    });
    rows.push(Row {
        check: "reduction ratio >= 50".into(),
        pass: r.ratio >= 50.0,
        detail: format!(
            "{} vs {} nodes, {:.1}x (ablation reduces to {}, accuracy {})",
            r.ablation_nodes,
            r.full_nodes,
            r.ratio,
            r.ablation_reduced_nodes,
            r.ablation_accuracy.map_or("n/a".into(), |a| format!("{a:.4}"))
        ),
    });

    let t1 = theorem1_harness(args.trials, 8, args.seed)?;
    rows.push(Row {
        check: "layer accuracy non-decreasing".into(),
        pass: t1.violations == 0,
        detail: format!("{} targets, {} violations", t1.trials, t1.violations),
    });

    for k in [1_000u64, 10_000] {
        let t2 = theorem2_harness(20, k, 0.05, args.merge_trials, default_rates(k), args.seed)?;
        rows.push(Row {
            check: format!("merge risk K={k}"),
            pass: t2.holds,
            detail: format!(
                "frequency {:.4} <= bound {:.4} + {:.4}",
                t2.frequency, t2.bound, t2.margin
            ),
        });
    }

    let width = rows.iter().map(|r| r.check.len()).max().unwrap_or(0);
    for r in &rows {
        println!(
            "{} {:<width$} {}",
            if r.pass { "PASS" } else { "FAIL" },
            r.check,
            r.detail
        );
    }
    if let Some(p) = &args.report {
        let mut text = serde_json::to_string_pretty(&rows).expect("rows serialize");
        text.push('\n');
        std::fs::write(p, text).map_err(|e| Failure::from(bsdsynth::Error::from(e)))?;
    }
    let failed = rows.iter().filter(|r| !r.pass).count();
    if failed > 0 {
        return Err(Failure::mismatch(format!("{failed} bench checks failed")));
    }
    Ok(0)
}
