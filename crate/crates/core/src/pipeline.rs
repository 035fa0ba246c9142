// SPDX-License-Identifier: Apache-2.0

//! Whole-function learning: partition the outputs, learn each cluster,
//! combine and reduce.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bits::BitVec;
use crate::bsd::{Bsd, NodeCount};
use crate::config::LearnConfig;
use crate::distance::{cluster_outputs, distance_matrix, Clustering, DistanceMatrix};
use crate::engine::{ClusterLearner, ClusterReport, MergeRiskBound, Monitor, StopReason};
use crate::error::{Error, Result};
use crate::ios::{Provenance, SampleSet};
use crate::oracle::{OracleHandle, OverlayOracle};
use crate::sampling::{conditioned_inputs, estimate_accuracy, AccuracyEstimate, PathAssignment, RngStream};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnReport {
    pub inputs: usize,
    pub outputs: usize,
    pub oracle: String,
    /// Learned from table rows alone, without further queries.
    pub pool_mode: bool,
    pub config: LearnConfig,
    pub distance: Option<DistanceMatrix>,
    pub clustering: Clustering,
    pub clusters: Vec<ClusterReport>,
    /// Total leaf merges.
    pub merges: u64,
    /// Fewest probes any merge decision was based on.
    pub merge_probes: u64,
    pub merge_risk: Option<MergeRiskBound>,
    pub probes_used: u64,
    pub probe_limit: Option<u64>,
    /// Reachable nodes of the combined diagram before reduction.
    pub learned_nodes: usize,
    pub final_nodes: usize,
    pub nodes: NodeCount,
    pub accuracy: Option<AccuracyEstimate>,
    pub given_samples: usize,
    pub given_correct: usize,
    /// Accuracy at least `1 - epsilon` and every given sample reproduced.
    pub target_met: bool,
    pub decisions: Vec<String>,
    pub warnings: Vec<String>,
}

fn check_widths(oracle: &OracleHandle, set: &SampleSet) -> Result<()> {
    if set.inputs() != oracle.inputs() {
        return Err(Error::InputShape {
            expected: oracle.inputs(),
            got: set.inputs(),
        });
    }
    if set.outputs() != oracle.outputs() {
        return Err(Error::InputShape {
            expected: oracle.outputs(),
            got: set.outputs(),
        });
    }
    Ok(())
}

/// Checks the mandatory samples against the oracle. Returns the handle to
/// learn from: for table oracles the samples are added as extra rows.
fn reconcile(oracle: &OracleHandle, mandatory: &SampleSet, cfg: &LearnConfig) -> Result<OracleHandle> {
    if let Some(rows) = oracle.rows() {
        let extra = mandatory.to_table()?;
        for (x, y) in &extra {
            if let Some(o) = rows.get(x) {
                if o != y {
                    return Err(Error::Inconsistent {
                        input: x.clone(),
                        given: y.clone(),
                        oracle: o.clone(),
                    });
                }
            }
        }
        let base = if extra.keys().any(|x| !rows.contains_key(x)) {
            OracleHandle::from_arc(Arc::new(OverlayOracle::new(oracle.inner().clone(), extra)))
        } else {
            oracle.clone()
        };
        return Ok(base.with_budget(cfg.max_probes));
    }
    let h = oracle.with_budget(cfg.max_probes);
    let xs: Vec<BitVec> = mandatory.iter().map(|s| s.input.clone()).collect();
    for (s, y) in mandatory.iter().zip(h.try_query(&xs)?) {
        if let Some(y) = y {
            if y != s.output {
                return Err(Error::Inconsistent {
                    input: s.input.clone(),
                    given: s.output.clone(),
                    oracle: y,
                });
            }
        }
    }
    Ok(h)
}

fn monitor_set(h: &OracleHandle, cfg: &LearnConfig) -> Result<Option<Monitor>> {
    if let Some(rows) = h.rows() {
        return Ok(Some(Monitor {
            inputs: rows.keys().cloned().collect(),
            outputs: rows.values().cloned().collect(),
        }));
    }
    let stream = RngStream::new(cfg.seed, "monitor", &[]);
    let (inputs, _) = conditioned_inputs(h.inputs(), &PathAssignment::new(), cfg.monitor_samples, &stream);
    if h.remaining().is_some_and(|r| r < inputs.len() as u64) {
        return Ok(None);
    }
    let outputs = h.query(&inputs)?;
    Ok(Some(Monitor { inputs, outputs }))
}

fn accuracy_cost(h: &OracleHandle, cfg: &LearnConfig) -> u64 {
    let n = h.inputs();
    match h.rows() {
        Some(rows) => rows.len() as u64,
        None if n < 64 && (1u64 << n) <= cfg.exhaustive_cap => 1u64 << n,
        None => cfg.accuracy_samples,
    }
}

/// Learns a finalized diagram of `oracle`.
///
/// Mandatory samples in `given` are checked against the oracle and every
/// leaf must agree with the ones routed to it before it becomes final.
/// When a width or budget limit stops learning early the remaining leaves
/// keep their majority values and the shortfall is listed in the report's
/// warnings.
pub fn learn(oracle: &OracleHandle, given: &SampleSet, cfg: &LearnConfig) -> Result<(Bsd, LearnReport)> {
    cfg.validate()?;
    check_widths(oracle, given)?;
    let (n, m) = (oracle.inputs(), oracle.outputs());
    let mandatory = given.mandatory();
    let h = reconcile(oracle, &mandatory, cfg)?;
    let pool = h.is_partial();

    let mut report = LearnReport {
        inputs: n,
        outputs: m,
        oracle: oracle.describe(),
        pool_mode: pool,
        config: cfg.clone(),
        distance: None,
        clustering: Clustering::singletons(m),
        clusters: Vec::new(),
        merges: 0,
        merge_probes: 0,
        merge_risk: None,
        probes_used: 0,
        probe_limit: cfg.max_probes,
        learned_nodes: 0,
        final_nodes: 0,
        nodes: Bsd::new(n, m).count_report(),
        accuracy: None,
        given_samples: mandatory.len(),
        given_correct: 0,
        target_met: false,
        decisions: Vec::new(),
        warnings: Vec::new(),
    };
    if pool {
        report.decisions.push(format!(
            "oracle covers {} of 2^{n} inputs; learning from its rows without further queries",
            h.rows().map_or(0, |r| r.len())
        ));
    }

    let partial = |report: &mut LearnReport, h: &OracleHandle, reason: String| {
        report.probes_used = h.probes_used();
        report.warnings.push(reason.clone());
        Error::PartialResult {
            reason,
            partial: Box::new((Bsd::new(n, m), report.clone())),
        }
    };

    if m > 1 {
        let stream = RngStream::new(cfg.seed, "distance", &[]);
        match distance_matrix(&h, cfg.complexity_samples, cfg.exhaustive_cap, cfg.complexity_floor, &stream) {
            Ok(matrix) => {
                report.clustering = cluster_outputs(&matrix, cfg.max_clusters)?;
                report.distance = Some(matrix);
            }
            Err(e @ Error::Budget { .. }) => return Err(partial(&mut report, &h, format!("partitioning: {e}"))),
            Err(Error::Estimate(msg)) => {
                report.warnings.push(format!("no output partition, each bit learned alone: {msg}"));
            }
            Err(e) => return Err(e),
        }
    }
    report.decisions.push(format!(
        "outputs partitioned once into {} clusters (at most {})",
        report.clustering.len(),
        cfg.max_clusters
    ));

    let monitor = monitor_set(&h, cfg)?;
    if monitor.is_none() {
        report.warnings.push("budget too small for the per-layer accuracy monitor".into());
    }

    let mut combined = if cfg.sharing {
        Bsd::new(n, m)
    } else {
        Bsd::new_tree(n, m)
    };
    let groups = report.clustering.groups.clone();
    for (ci, members) in groups.into_iter().enumerate() {
        let learner = ClusterLearner::new(ci, members.clone(), &h, cfg, &mandatory, monitor.as_ref());
        let mut learner = match learner {
            Ok(l) => l,
            Err(e @ Error::Budget { .. }) => {
                return Err(partial(&mut report, &h, format!("cluster {ci} root speculation: {e}")))
            }
            Err(e) => return Err(e),
        };
        match learner.run() {
            Ok(()) => {}
            Err(e @ Error::Budget { .. }) => {
                report.warnings.push(format!("cluster {ci} stopped: {e}"));
            }
            Err(e) => return Err(e),
        }
        let out = learner.finish();
        for (slot, &j) in members.iter().enumerate() {
            let r = combined.import(&out.bsd, out.bsd.root(slot));
            combined.set_root(j, r);
            combined.clusters[j] = ci;
        }
        combined.layer = combined.layer.max(out.bsd.layer);
        let order: Vec<String> = out.report.order.iter().map(|v| format!("x{v}")).collect();
        report.decisions.push(format!(
            "cluster {ci} {:?}: order [{}], stop {:?}",
            members,
            order.join(" "),
            out.report.stop
        ));
        report.clusters.push(out.report);
    }
    report.learned_nodes = combined.node_count();
    let diagram = combined.finalize()?;
    report.final_nodes = diagram.node_count();
    report.nodes = diagram.count_report();

    report.merges = report.clusters.iter().map(|c| c.merges).sum();
    report.merge_probes = if pool {
        cfg.min_merge_overlap as u64
    } else {
        cfg.merge_samples
    };
    report.merge_risk = MergeRiskBound::new(report.merges, report.merge_probes, cfg.merge_delta).ok();

    if h.remaining().is_some_and(|r| r < accuracy_cost(&h, cfg)) {
        report.warnings.push("budget too small for the final accuracy estimate".into());
    } else {
        let stream = RngStream::new(cfg.seed, "accuracy", &[]);
        report.accuracy = Some(estimate_accuracy(&diagram, &h, cfg.accuracy_samples, cfg.exhaustive_cap, &stream)?);
    }
    report.given_correct = mandatory
        .iter()
        .filter(|s| diagram.evaluate(&s.input).is_ok_and(|y| y == s.output))
        .count();
    report.probes_used = h.probes_used();

    let forced: usize = report.clusters.iter().map(|c| c.forced_leaves).sum();
    if forced > 0 {
        report.warnings.push(format!("{forced} leaves frozen at their majority value"));
    }
    for c in &report.clusters {
        if matches!(c.stop, Some(StopReason::Budget)) {
            report.warnings.push(format!("cluster {} stopped by the probe budget", c.id));
        }
    }
    if report.given_correct < report.given_samples {
        report.warnings.push(format!(
            "{} of {} given samples not reproduced",
            report.given_samples - report.given_correct,
            report.given_samples
        ));
    }
    let accurate = match &report.accuracy {
        Some(a) => a.aggregate >= 1.0 - cfg.epsilon,
        None => false,
    };
    if !accurate {
        report.warnings.push(format!("accuracy target 1 - {} not reached", cfg.epsilon));
    }
    report.target_met = accurate && report.given_correct == report.given_samples;
    Ok((diagram, report))
}

/// Relearns with `counterexamples` added to the mandatory samples.
///
/// Each counterexample is checked against the oracle first. Ones the
/// diagram already reproduces are dropped with a warning; when none are
/// left the diagram and report come back unchanged apart from the warning.
pub fn refine(
    diagram: &Bsd,
    prior: &LearnReport,
    given: &SampleSet,
    counterexamples: &SampleSet,
    oracle: &OracleHandle,
    cfg: &LearnConfig,
) -> Result<(Bsd, LearnReport)> {
    check_widths(oracle, given)?;
    check_widths(oracle, counterexamples)?;
    let xs: Vec<BitVec> = counterexamples.iter().map(|s| s.input.clone()).collect();
    for (s, y) in counterexamples.iter().zip(oracle.try_query(&xs)?) {
        if let Some(y) = y {
            if y != s.output {
                return Err(Error::Inconsistent {
                    input: s.input.clone(),
                    given: s.output.clone(),
                    oracle: y,
                });
            }
        }
    }
    let mut fresh = SampleSet::new(oracle.inputs(), oracle.outputs());
    for s in counterexamples {
        if diagram.evaluate(&s.input)? != s.output {
            fresh.push(s.input.clone(), s.output.clone(), Provenance::Counterexample)?;
        }
    }
    let dropped = counterexamples.len() - fresh.len();
    if fresh.is_empty() {
        let mut report = prior.clone();
        if dropped > 0 {
            report.warnings.push(format!("refine: all {dropped} counterexamples already match the diagram"));
        }
        return Ok((diagram.clone(), report));
    }
    let mut all = given.clone();
    all.extend(&fresh)?;
    let (bsd, mut report) = learn(oracle, &all, cfg)?;
    if dropped > 0 {
        report.warnings.push(format!("refine: {dropped} counterexamples already matched and were dropped"));
    }
    report
        .decisions
        .push(format!("refine: relearned with {} counterexamples added", fresh.len()));
    Ok((bsd, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::builtin;

    fn or_set() -> SampleSet {
        SampleSet::parse_ios("inputs=2 outputs=1\n00 0\n01 1\n10 1\n11 1\n", Provenance::Given).unwrap()
    }

    #[test]
    fn constant_oracle_needs_no_expansion() {
        let mut set = SampleSet::new(3, 2);
        for i in 0..8 {
            set.push(BitVec::from_u128(i, 3), BitVec::ones(2), Provenance::Given).unwrap();
        }
        let table = OracleHandle::from_samples(&set).unwrap();
        let (bsd, report) = learn(&table, &SampleSet::new(3, 2), &LearnConfig::default()).unwrap();
        assert_eq!(bsd.node_count(), 1);
        assert!(report.clusters.iter().all(|c| c.order.is_empty()));
    }

    #[test]
    fn or_from_its_table() {
        let set = or_set();
        let h = OracleHandle::from_samples(&set).unwrap();
        let (bsd, report) = learn(&h, &set, &LearnConfig::default()).unwrap();
        assert_eq!(bsd.node_count(), 4);
        assert!(report.target_met);
        assert!(!report.pool_mode);
    }

    #[test]
    fn sparse_table_learns_from_rows() {
        let set = SampleSet::parse_ios("inputs=3 outputs=2\n000 11\n", Provenance::Given).unwrap();
        let table = OracleHandle::from_samples(&set).unwrap();
        let (bsd, report) = learn(&table, &SampleSet::new(3, 2), &LearnConfig::default()).unwrap();
        assert!(report.pool_mode);
        assert_eq!(bsd.node_count(), 1);
        // the row is read once for the partition and once for the accuracy check
        assert_eq!(report.probes_used, 2);
    }

    #[test]
    fn inconsistent_given_sample_is_rejected() {
        let h = builtin("parity:2").unwrap();
        let bad = SampleSet::parse_ios("inputs=2 outputs=1\n11 1\n", Provenance::Given).unwrap();
        assert!(matches!(
            learn(&h, &bad, &LearnConfig::default()),
            Err(Error::Inconsistent { .. })
        ));
    }

    #[test]
    fn tiny_budget_is_a_partial_result() {
        let h = builtin("adder:4").unwrap();
        let cfg = LearnConfig {
            max_probes: Some(300),
            spec_samples: 100,
            ordering_samples: 100,
            merge_samples: 100,
            ..LearnConfig::default()
        };
        match learn(&h, &SampleSet::new(8, 5), &cfg) {
            Err(Error::PartialResult { partial, .. }) => assert!(partial.1.probes_used <= 300),
            other => panic!("expected a partial result, got {:?}", other.map(|r| r.1)),
        }
    }

    #[test]
    fn refine_with_nothing_new_is_identity() {
        let h = builtin("adder:3").unwrap();
        let cfg = LearnConfig::default();
        let empty = SampleSet::new(6, 4);
        let (bsd, report) = learn(&h, &empty, &cfg).unwrap();
        let (again, r2) = refine(&bsd, &report, &empty, &empty, &h, &cfg).unwrap();
        assert_eq!(again.store().count(), bsd.store().count());
        assert_eq!(r2, report);
    }
}
