// SPDX-License-Identifier: Apache-2.0

//! Layer-by-layer expansion of one output cluster.
//!
//! Each layer picks one input variable for the whole cluster, Shannon
//! expands every undecided leaf on it, speculates the new leaves and then
//! merges leaves that behave identically on a shared probe set.
//!
//! Evidence attached to a leaf is keyed by the input with the leaf's path
//! bits cleared, so leaves with the same set of path variables can compare
//! evidence point by point.

mod learner;
mod merge;
mod select;
mod speculate;

use std::collections::BTreeMap;

use crate::bits::BitVec;

pub use learner::{ClusterLearner, ClusterOutput, ClusterReport, LayerStats, Monitor, StopReason};
pub use merge::{group_by_signature, group_compatible, merge_risk, LeafSignature, MergeRiskBound};
pub use select::{pick, score_candidates, CandidateScore, LeafProbes, Selection};
pub use speculate::{decide, speculate_known, speculate_leaf, SpeculationVerdict, Verdict};

/// Known output values of one leaf, keyed by path-cleared input.
pub type Evidence = BTreeMap<BitVec, bool>;
