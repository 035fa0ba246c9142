// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::Evidence;
use crate::bits::BitVec;
use crate::error::{Error, Result};

/// Upper bound on the probability that a merge with error at least
/// `delta` went undetected, after `t` merges with `k` probes each.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MergeRiskBound {
    pub t: u64,
    pub k: u64,
    pub delta: f64,
    pub bound: f64,
}

impl MergeRiskBound {
    pub fn new(t: u64, k: u64, delta: f64) -> Result<Self> {
        Ok(MergeRiskBound {
            t,
            k,
            delta,
            bound: merge_risk(t, k, delta)?,
        })
    }
}

/// `t / (k * delta)`.
pub fn merge_risk(t: u64, k: u64, delta: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::Config("probe count K must be at least 1".into()));
    }
    if delta.is_nan() || delta <= 0.0 {
        return Err(Error::Config("delta must be positive".into()));
    }
    Ok(t as f64 / (k as f64 * delta))
}

/// A leaf's outputs on its cluster's shared merge probes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LeafSignature(pub BitVec);

/// Groups equal signatures. Groups and their members keep the order of
/// first appearance.
pub fn group_by_signature(signatures: &[LeafSignature]) -> Vec<Vec<usize>> {
    let mut index: HashMap<&LeafSignature, usize> = HashMap::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, s) in signatures.iter().enumerate() {
        match index.get(s) {
            Some(&g) => groups[g].push(i),
            None => {
                index.insert(s, groups.len());
                groups.push(vec![i]);
            }
        }
    }
    groups
}

/// Greedy grouping of partially known functions. A leaf joins the first
/// group whose pooled points agree with all of its own and overlap them
/// in at least `min_overlap` places.
pub fn group_compatible(evidence: &[&Evidence], min_overlap: usize) -> Vec<Vec<usize>> {
    let mut groups: Vec<(Vec<usize>, Evidence)> = Vec::new();
    for (i, ev) in evidence.iter().enumerate() {
        let slot = groups.iter().position(|(_, pooled)| {
            let mut overlap = 0;
            for (k, v) in ev.iter() {
                if let Some(p) = pooled.get(k) {
                    if p != v {
                        return false;
                    }
                    overlap += 1;
                }
            }
            overlap >= min_overlap
        });
        match slot {
            Some(g) => {
                groups[g].0.push(i);
                groups[g].1.extend(ev.iter().map(|(k, v)| (k.clone(), *v)));
            }
            None => groups.push((vec![i], (*ev).clone())),
        }
    }
    groups.into_iter().map(|(g, _)| g).collect()
}
