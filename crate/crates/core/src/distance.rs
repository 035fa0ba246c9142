// SPDX-License-Identifier: Apache-2.0

//! Complexity estimates, Boolean distance and output clustering.
//!
//! The complexity of a set of output bits is the node count of a reduced
//! ordered decision diagram for them, built in one shared store under a
//! fixed interleaved variable order. For two bits `f` and `g` the
//! distance is `C(f) + C(g) - C(f, g)`: the number of nodes the joint
//! diagram saves by sharing, so large distances mean shared logic.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::BitVec;
use crate::bsd::{Bsd, NodeId};
use crate::error::{Error, Result};
use crate::oracle::OracleHandle;
use crate::sampling::{conditioned_inputs, PathAssignment, RngStream};

/// Interleaves the two halves of the input, LSB first:
/// `0, h, 1, h+1, ...` with `h = n / 2`; an odd last bit goes at the end.
pub fn canonical_order(n: usize) -> Vec<usize> {
    let h = n / 2;
    let mut order = Vec::with_capacity(n);
    for i in 0..h {
        order.push(i);
        order.push(h + i);
    }
    if n % 2 == 1 {
        order.push(n - 1);
    }
    order
}

/// Input/output pairs of a multi-output function, either the complete
/// truth table in index order or a uniform sample.
#[derive(Clone, Debug)]
pub struct FunctionSamples {
    n: usize,
    m: usize,
    inputs: Vec<BitVec>,
    outputs: Vec<BitVec>,
    exhaustive: bool,
}

impl FunctionSamples {
    /// Queries the oracle on every input when `2^n <= exhaustive_cap`,
    /// otherwise on `count` uniform inputs.
    pub fn from_oracle(
        oracle: &OracleHandle,
        count: u64,
        exhaustive_cap: u64,
        stream: &RngStream,
    ) -> Result<Self> {
        let n = oracle.inputs();
        if let Some(rows) = oracle.rows().filter(|_| oracle.is_partial()) {
            let inputs: Vec<BitVec> = rows.keys().cloned().collect();
            let outputs = oracle.query(&inputs)?;
            return Ok(FunctionSamples {
                n,
                m: oracle.outputs(),
                inputs,
                outputs,
                exhaustive: false,
            });
        }
        let draws = match exhaustive_size(n, exhaustive_cap) {
            Some(all) => all,
            None => count,
        };
        let (inputs, exhaustive) = conditioned_inputs(n, &PathAssignment::new(), draws, stream);
        let outputs = oracle.query(&inputs)?;
        Ok(FunctionSamples {
            n,
            m: oracle.outputs(),
            inputs,
            outputs,
            exhaustive,
        })
    }

    /// Complete truth table of `f` over `n` inputs.
    pub fn from_fn(n: usize, m: usize, f: impl Fn(&BitVec) -> BitVec) -> Self {
        assert!(n < 32, "truth tables are limited to 31 inputs");
        let inputs: Vec<BitVec> = (0..1u128 << n).map(|i| BitVec::from_u128(i, n)).collect();
        let outputs = inputs.iter().map(&f).collect();
        FunctionSamples {
            n,
            m,
            inputs,
            outputs,
            exhaustive: true,
        }
    }

    pub fn from_pairs(n: usize, m: usize, inputs: Vec<BitVec>, outputs: Vec<BitVec>) -> Self {
        let exhaustive = n < 32
            && inputs.len() == 1usize << n
            && inputs
                .iter()
                .enumerate()
                .all(|(i, x)| x.to_u128() == i as u128);
        FunctionSamples {
            n,
            m,
            inputs,
            outputs,
            exhaustive,
        }
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn is_exhaustive(&self) -> bool {
        self.exhaustive
    }

    pub fn outputs(&self) -> usize {
        self.m
    }
}

fn exhaustive_size(n: usize, exhaustive_cap: u64) -> Option<u64> {
    (n < 64 && (1u64 << n) <= exhaustive_cap).then(|| 1u64 << n)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityEstimate {
    /// Reachable node count of the joint diagram, terminals included.
    pub value: u64,
    pub sample_count: u64,
    pub exhaustive: bool,
    pub order: Vec<usize>,
}

/// Complexity of output `bits` jointly (one diagram, shared nodes counted
/// once). Sampled data below `floor` samples is rejected.
pub fn estimate_complexity(
    data: &FunctionSamples,
    bits: &[usize],
    floor: u64,
) -> Result<ComplexityEstimate> {
    if bits.is_empty() || bits.iter().any(|&b| b >= data.m) {
        return Err(Error::Estimate(format!("bad output selection {bits:?}")));
    }
    if !data.exhaustive && (data.len() as u64) < floor {
        return Err(Error::Estimate(format!(
            "{} samples is below the floor of {floor}",
            data.len()
        )));
    }
    let order = canonical_order(data.n);
    let mut d = Bsd::new(data.n, bits.len());
    for (slot, &b) in bits.iter().enumerate() {
        let root = if data.exhaustive {
            build_exhaustive(&mut d, data, b, &order)
        } else {
            let idx: Vec<u32> = (0..data.len() as u32).collect();
            build_sampled(&mut d, data, b, &order, 0, &idx, false)
        };
        d.set_root(slot, root);
    }
    Ok(ComplexityEstimate {
        value: d.node_count() as u64,
        sample_count: data.len() as u64,
        exhaustive: data.exhaustive,
        order,
    })
}

fn build_exhaustive(d: &mut Bsd, data: &FunctionSamples, bit: usize, order: &[usize]) -> NodeId {
    let n = data.n;
    // cur[idx]: bit l of idx is the value of variable order[l]
    let mut cur: Vec<NodeId> = (0..1usize << n)
        .map(|idx| {
            let mut x = 0usize;
            for (l, &v) in order.iter().enumerate() {
                x |= ((idx >> l) & 1) << v;
            }
            d.terminal(data.outputs[x].get(bit))
        })
        .collect();
    for l in (0..n).rev() {
        let half = cur.len() / 2;
        let next: Vec<NodeId> = (0..half)
            .map(|k| d.mk(order[l], cur[k], cur[k + half]))
            .collect();
        cur = next;
    }
    cur[0]
}

fn build_sampled(
    d: &mut Bsd,
    data: &FunctionSamples,
    bit: usize,
    order: &[usize],
    level: usize,
    idx: &[u32],
    inherited: bool,
) -> NodeId {
    if idx.is_empty() {
        return d.terminal(inherited);
    }
    let ones = idx
        .iter()
        .filter(|&&i| data.outputs[i as usize].get(bit))
        .count();
    if ones == 0 || ones == idx.len() || level == order.len() {
        return d.terminal(2 * ones > idx.len());
    }
    let majority = 2 * ones > idx.len();
    let var = order[level];
    let (hi, lo): (Vec<u32>, Vec<u32>) = idx
        .iter()
        .partition(|&&i| data.inputs[i as usize].get(var));
    let l = build_sampled(d, data, bit, order, level + 1, &lo, majority);
    let h = build_sampled(d, data, bit, order, level + 1, &hi, majority);
    d.mk(var, l, h)
}

/// `cf + cg - ctau`, clamped at zero.
pub fn boolean_distance(cf: u64, cg: u64, ctau: u64) -> u64 {
    (cf + cg).saturating_sub(ctau)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    pub m: usize,
    /// `values[i][j]` is `Dist(i, j)`; the diagonal holds `C(i)`.
    pub values: Vec<Vec<u64>>,
    pub exhaustive: bool,
    pub sample_count: u64,
}

impl DistanceMatrix {
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.values[i][j]
    }

    /// Rows of right-aligned columns with `c<j>` headers.
    pub fn to_text(&self) -> String {
        let width = self
            .values
            .iter()
            .flatten()
            .map(|v| v.to_string().len())
            .chain([format!("c{}", self.m.saturating_sub(1)).len()])
            .max()
            .unwrap_or(1);
        let mut out = format!("{:>w$}", "", w = width);
        for j in 0..self.m {
            out.push_str(&format!(" {:>w$}", format!("c{j}"), w = width));
        }
        out.push('\n');
        for i in 0..self.m {
            out.push_str(&format!("{:>w$}", format!("c{i}"), w = width));
            for j in 0..self.m {
                out.push_str(&format!(" {:>w$}", self.values[i][j], w = width));
            }
            out.push('\n');
        }
        out
    }
}

/// Pairwise distances between all output bits of `data`.
pub fn distance_matrix_from(data: &FunctionSamples, floor: u64) -> Result<DistanceMatrix> {
    let m = data.m;
    let singles: Vec<u64> = (0..m)
        .into_par_iter()
        .map(|j| estimate_complexity(data, &[j], floor).map(|c| c.value))
        .collect::<Result<_>>()?;
    let pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| ((i + 1)..m).map(move |j| (i, j)))
        .collect();
    let joint: HashMap<(usize, usize), u64> = pairs
        .par_iter()
        .map(|&(i, j)| estimate_complexity(data, &[i, j], floor).map(|c| ((i, j), c.value)))
        .collect::<Result<_>>()?;
    let mut values = vec![vec![0u64; m]; m];
    for i in 0..m {
        values[i][i] = singles[i];
        for j in (i + 1)..m {
            let d = boolean_distance(singles[i], singles[j], joint[&(i, j)]);
            values[i][j] = d;
            values[j][i] = d;
        }
    }
    Ok(DistanceMatrix {
        m,
        values,
        exhaustive: data.exhaustive,
        sample_count: data.len() as u64,
    })
}

pub fn distance_matrix(
    oracle: &OracleHandle,
    count: u64,
    exhaustive_cap: u64,
    floor: u64,
    stream: &RngStream,
) -> Result<DistanceMatrix> {
    let data = FunctionSamples::from_oracle(oracle, count, exhaustive_cap, stream)?;
    distance_matrix_from(&data, floor)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clustering {
    /// Groups of output bits; each group is ascending and groups are
    /// ordered by their smallest member.
    pub groups: Vec<Vec<usize>>,
}

impl Clustering {
    pub fn singletons(m: usize) -> Self {
        Clustering {
            groups: (0..m).map(|j| vec![j]).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// Cluster id per output bit.
    pub fn assignment(&self) -> Vec<usize> {
        let m = self.groups.iter().map(|g| g.len()).sum();
        let mut a = vec![0; m];
        for (c, g) in self.groups.iter().enumerate() {
            for &b in g {
                a[b] = c;
            }
        }
        a
    }

    pub fn cluster_of(&self, bit: usize) -> Option<usize> {
        self.groups.iter().position(|g| g.contains(&bit))
    }
}

/// Greedy agglomerative clustering with maximum linkage.
///
/// While there are more than `max_clusters` groups the pair with the
/// largest linkage merges, ties going to the pair with the lowest bit
/// indices. Groups at zero linkage are merged only when the cap forces
/// it, so the result never has more than `max_clusters` groups.
pub fn cluster_outputs(matrix: &DistanceMatrix, max_clusters: usize) -> Result<Clustering> {
    if max_clusters == 0 {
        return Err(Error::Config("max_clusters must be at least 1".into()));
    }
    let mut groups = Clustering::singletons(matrix.m).groups;
    while groups.len() > max_clusters {
        let mut best: Option<(u64, usize, usize)> = None;
        for a in 0..groups.len() {
            for b in (a + 1)..groups.len() {
                let link = groups[a]
                    .iter()
                    .flat_map(|&i| groups[b].iter().map(move |&j| matrix.get(i, j)))
                    .max()
                    .unwrap_or(0);
                if best.is_none_or(|(l, _, _)| link > l) {
                    best = Some((link, a, b));
                }
            }
        }
        let (_, a, b) = best.expect("at least two groups");
        let moved = groups.remove(b);
        groups[a].extend(moved);
        groups[a].sort_unstable();
    }
    Ok(Clustering { groups })
}
