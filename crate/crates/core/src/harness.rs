// SPDX-License-Identifier: Apache-2.0

//! Statistical checks of the learner's two guarantees: accuracy never
//! drops from one layer to the next when speculation uses exact cofactor
//! proportions, and a signature merge with error at least `delta`
//! survives `K` probes rarely enough that `T` merges stay under
//! `T / (K delta)`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::BitVec;
use crate::bsd::Bsd;
use crate::config::LearnConfig;
use crate::engine::ClusterLearner;
use crate::error::Result;
use crate::ios::SampleSet;
use crate::oracle::{OracleHandle, TableOracle};
use crate::sampling::RngStream;

/// Correct predictions of output 0 over all `2^n` inputs.
fn exhaustive_correct(d: &Bsd, truth: &[bool]) -> u64 {
    let n = d.inputs();
    truth
        .iter()
        .enumerate()
        .filter(|(i, &y)| d.eval_node(d.root(0), &BitVec::from_u128(*i as u128, n)) == y)
        .count() as u64
}

/// Settings under which every speculation, probe set and merge signature
/// enumerates the whole cofactor.
pub fn exact_config(n: usize, seed: u64) -> LearnConfig {
    let all = 1u64 << n;
    LearnConfig {
        seed,
        spec_samples: all,
        ordering_samples: all,
        merge_samples: all,
        width_cap: usize::MAX / 2,
        ..LearnConfig::default()
    }
}

/// Exhaustive correct counts of a single-output function after layer 0,
/// 1, 2, ... of learning.
pub fn layer_accuracy(truth: &[bool], n: usize, cfg: &LearnConfig) -> Result<Vec<u64>> {
    assert_eq!(truth.len(), 1 << n, "truth table must cover every input");
    let rows = truth
        .iter()
        .enumerate()
        .map(|(i, &y)| (BitVec::from_u128(i as u128, n), BitVec::from_bools(&[y])))
        .collect();
    let oracle = OracleHandle::new(TableOracle::new(n, 1, rows));
    let mut learner = ClusterLearner::new(0, vec![0], &oracle, cfg, &SampleSet::new(n, 1), None)?;
    let mut counts = vec![exhaustive_correct(learner.diagram(), truth)];
    while learner.step()?.is_some() {
        counts.push(exhaustive_correct(learner.diagram(), truth));
    }
    Ok(counts)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Outcome {
    pub trials: usize,
    pub n: usize,
    /// Layer transitions where exhaustive accuracy strictly fell.
    pub violations: usize,
    /// Per trial, exhaustive accuracy after each layer.
    pub accuracy: Vec<Vec<f64>>,
}

/// Learns `trials` uniformly random `n`-input functions in the exact
/// regime and counts layer-to-layer accuracy decreases.
pub fn theorem1_harness(trials: usize, n: usize, seed: u64) -> Result<Theorem1Outcome> {
    assert!(n <= 12, "exact proportions need n <= 12");
    let cfg = exact_config(n, seed);
    let runs: Vec<Vec<u64>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = RngStream::new(seed, "theorem1", &[t as u64]).rng();
            let truth: Vec<bool> = (0..1usize << n).map(|_| rng.gen()).collect();
            layer_accuracy(&truth, n, &cfg)
        })
        .collect::<Result<_>>()?;
    let violations = runs
        .iter()
        .map(|c| c.windows(2).filter(|w| w[1] < w[0]).count())
        .sum();
    let total = (1u64 << n) as f64;
    Ok(Theorem1Outcome {
        trials,
        n,
        violations,
        accuracy: runs
            .iter()
            .map(|c| c.iter().map(|&k| k as f64 / total).collect())
            .collect(),
    })
}

/// How the disagreement rate of a candidate leaf pair is drawn.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateDistribution {
    /// `r = exp(u)` with `u` uniform, so `r` is log-uniform on `(lo, hi]`.
    LogUniform { lo: f64, hi: f64 },
    Fixed(f64),
}

impl RateDistribution {
    fn draw(self, rng: &mut impl Rng) -> f64 {
        match self {
            RateDistribution::Fixed(r) => r,
            RateDistribution::LogUniform { lo, hi } => {
                let u: f64 = rng.gen();
                (hi.ln() - u * (hi.ln() - lo.ln())).exp()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem2Outcome {
    pub t: u64,
    pub k: u64,
    pub delta: f64,
    pub trials: u64,
    pub rates: RateDistribution,
    /// Candidate pairs compared over all trials.
    pub candidates: u64,
    /// Trials in which some accepted merge had error at least `delta`.
    pub failures: u64,
    pub frequency: f64,
    pub bound: f64,
    /// Three standard deviations of a frequency at the bound.
    pub margin: f64,
    pub holds: bool,
}

/// Simulates `trials` runs that each accept `t` merges.
///
/// A candidate pair disagrees on a fraction `r` of inputs; it is accepted
/// when none of `k` independent probes hits a disagreement, which happens
/// with probability `(1 - r)^k`. A trial fails when an accepted merge has
/// `r >= delta`.
pub fn theorem2_harness(t: u64, k: u64, delta: f64, trials: u64, rates: RateDistribution, seed: u64) -> Result<Theorem2Outcome> {
    let runs: Vec<(u64, bool)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = RngStream::new(seed, "theorem2", &[t, k, i]).rng();
            let (mut accepted, mut candidates, mut failed) = (0u64, 0u64, false);
            while accepted < t {
                candidates += 1;
                let r = rates.draw(&mut rng);
                let survive = (k as f64 * (-r).ln_1p()).exp();
                if rng.gen::<f64>() < survive {
                    accepted += 1;
                    failed |= r >= delta;
                }
            }
            (candidates, failed)
        })
        .collect();
    let candidates = runs.iter().map(|r| r.0).sum();
    let failures = runs.iter().filter(|r| r.1).count() as u64;
    let frequency = failures as f64 / trials.max(1) as f64;
    let bound = crate::engine::merge_risk(t, k, delta)?;
    let capped = bound.min(1.0);
    let margin = 3.0 * (capped * (1.0 - capped) / trials.max(1) as f64).sqrt();
    Ok(Theorem2Outcome {
        t,
        k,
        delta,
        trials,
        rates,
        candidates,
        failures,
        frequency,
        bound,
        margin,
        holds: frequency <= bound + margin,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionOutcome {
    pub spec: String,
    pub full_nodes: usize,
    pub full_exact: bool,
    /// Nodes of the unreduced tree grown without merging, sharing or
    /// variable scoring.
    pub ablation_nodes: usize,
    /// The same tree after reduction.
    pub ablation_reduced_nodes: usize,
    pub ablation_accuracy: Option<f64>,
    pub ratio: f64,
}

/// Learns `spec` with `cfg` and again with merging, node sharing and
/// variable scoring turned off, and compares node counts.
pub fn reduction_ablation(spec: &str, cfg: &LearnConfig) -> Result<ReductionOutcome> {
    let oracle = crate::oracle::builtin(spec)?;
    let none = SampleSet::new(oracle.inputs(), oracle.outputs());
    let (full, report) = crate::pipeline::learn(&oracle, &none, cfg)?;
    let ablated = LearnConfig {
        merging: false,
        sharing: false,
        scorer: crate::config::Scorer::Random,
        ..cfg.clone()
    };
    let (reduced, abl) = crate::pipeline::learn(&oracle, &none, &ablated)?;
    Ok(ReductionOutcome {
        spec: spec.into(),
        full_nodes: full.node_count(),
        full_exact: report.accuracy.as_ref().is_some_and(|a| a.is_exact() && a.aggregate == 1.0),
        ablation_nodes: abl.learned_nodes,
        ablation_reduced_nodes: reduced.node_count(),
        ablation_accuracy: abl.accuracy.as_ref().map(|a| a.aggregate),
        ratio: abl.learned_nodes as f64 / full.node_count() as f64,
    })
}

/// Log-uniform rates on `(1 / (10 k), 1/2]`.
pub fn default_rates(k: u64) -> RateDistribution {
    RateDistribution::LogUniform {
        lo: 1.0 / (10.0 * k as f64),
        hi: 0.5,
    }
}
