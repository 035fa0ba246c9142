// SPDX-License-Identifier: Apache-2.0

//! Binary speculation diagrams.
//!
//! A [`Bsd`] is a multi-rooted decision diagram over `n` input bits with one
//! root per output bit. Decision nodes branch on a single input bit; leaves
//! are constants that are either `Final` or still `Speculated` from sampled
//! evidence. Nodes live in an append-only arena. In sharing mode (the
//! default) decision nodes are hash-consed through a unique table keyed by
//! `(var, lo, hi)` and final leaves collapse onto two terminal nodes; tree
//! mode allocates every node fresh and is used to measure unshared growth.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::bits::BitVec;
use crate::error::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct NodeId(pub(crate) u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LeafStatus {
    Speculated,
    Final,
}

/// Monte Carlo evidence behind a leaf's speculated value.
///
/// `q0`/`q1` are the observed output proportions at the leaf, `p0`/`p1` the
/// share of the parent's observations routed to the 0/1 child when the
/// parent was expanded (both 0 for roots).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SpeculationStats {
    pub q0: f64,
    pub q1: f64,
    pub sample_count: u64,
    pub p0: f64,
    pub p1: f64,
}

impl SpeculationStats {
    pub fn from_counts(ones: u64, total: u64) -> Self {
        let (q0, q1) = if total == 0 {
            (0.0, 0.0)
        } else {
            let q1 = ones as f64 / total as f64;
            (1.0 - q1, q1)
        };
        SpeculationStats {
            q0,
            q1,
            sample_count: total,
            p0: 0.0,
            p1: 0.0,
        }
    }

    /// Majority value, ties toward 0.
    pub fn majority(&self) -> bool {
        self.q1 > self.q0
    }

    pub fn margin(&self) -> f64 {
        (self.q0 - self.q1).abs()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Leaf {
    pub value: bool,
    pub status: LeafStatus,
    pub stats: SpeculationStats,
}

impl Leaf {
    pub fn final_const(value: bool) -> Self {
        Leaf {
            value,
            status: LeafStatus::Final,
            stats: SpeculationStats::default(),
        }
    }

    pub fn speculated(stats: SpeculationStats) -> Self {
        Leaf {
            value: stats.majority(),
            status: LeafStatus::Speculated,
            stats,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Decision { var: u32, lo: NodeId, hi: NodeId },
    Leaf(Leaf),
}

/// Structural statistics for a diagram.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeCount {
    pub total: usize,
    pub decisions: usize,
    pub leaves: usize,
    /// Reachable nodes below each root, counted on its own.
    pub per_root: Vec<usize>,
    /// Nodes grouped by their shortest distance from any root.
    pub per_layer: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Bsd {
    nodes: Vec<Node>,
    unique: HashMap<(u32, NodeId, NodeId), NodeId>,
    sharing: bool,
    roots: Vec<NodeId>,
    n: usize,
    m: usize,
    /// Deepest expansion layer reached while learning.
    pub layer: usize,
    /// Cluster id per output bit; all zero unless set by the learner.
    pub clusters: Vec<usize>,
}

const FALSE: NodeId = NodeId(0);
const TRUE: NodeId = NodeId(1);

impl Bsd {
    /// A diagram whose outputs are all the final constant `false`.
    pub fn new(n: usize, m: usize) -> Self {
        Self::with_sharing(n, m, true)
    }

    /// Same as [`Bsd::new`] but with sharing disabled: every `mk` and leaf
    /// allocation creates a fresh node, so the diagram stays a tree.
    pub fn new_tree(n: usize, m: usize) -> Self {
        Self::with_sharing(n, m, false)
    }

    fn with_sharing(n: usize, m: usize, sharing: bool) -> Self {
        assert!(n >= 1 && m >= 1, "diagram widths must be >= 1");
        Bsd {
            nodes: vec![
                Node::Leaf(Leaf::final_const(false)),
                Node::Leaf(Leaf::final_const(true)),
            ],
            unique: HashMap::new(),
            sharing,
            roots: vec![FALSE; m],
            n,
            m,
            layer: 0,
            clusters: vec![0; m],
        }
    }

    pub fn inputs(&self) -> usize {
        self.n
    }

    pub fn outputs(&self) -> usize {
        self.m
    }

    pub fn is_sharing(&self) -> bool {
        self.sharing
    }

    pub fn roots(&self) -> &[NodeId] {
        &self.roots
    }

    pub fn root(&self, output: usize) -> NodeId {
        self.roots[output]
    }

    pub fn set_root(&mut self, output: usize, node: NodeId) {
        assert!(node.index() < self.nodes.len());
        self.roots[output] = node;
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.index()]
    }

    pub fn store_len(&self) -> usize {
        self.nodes.len()
    }

    pub fn contains(&self, id: NodeId) -> bool {
        id.index() < self.nodes.len()
    }

    /// The shared final terminal for `value`.
    pub fn terminal(&self, value: bool) -> NodeId {
        if value {
            TRUE
        } else {
            FALSE
        }
    }

    /// Allocates a leaf. In sharing mode final leaves resolve to the
    /// terminals.
    pub fn add_leaf(&mut self, leaf: Leaf) -> NodeId {
        if self.sharing && leaf.status == LeafStatus::Final {
            return self.terminal(leaf.value);
        }
        self.push(Node::Leaf(leaf))
    }

    /// Decision node on `var`. Sharing mode applies both reduction rules.
    pub fn mk(&mut self, var: usize, lo: NodeId, hi: NodeId) -> NodeId {
        debug_assert!(var < self.n);
        debug_assert!(self.contains(lo) && self.contains(hi));
        let var = var as u32;
        if !self.sharing {
            return self.push(Node::Decision { var, lo, hi });
        }
        if lo == hi {
            return lo;
        }
        if let Some(&id) = self.unique.get(&(var, lo, hi)) {
            return id;
        }
        let id = self.push(Node::Decision { var, lo, hi });
        self.unique.insert((var, lo, hi), id);
        id
    }

    fn push(&mut self, node: Node) -> NodeId {
        let id = NodeId(u32::try_from(self.nodes.len()).expect("node arena overflow"));
        self.nodes.push(node);
        id
    }

    pub fn leaf_mut(&mut self, id: NodeId) -> Option<&mut Leaf> {
        match &mut self.nodes[id.index()] {
            Node::Leaf(l) if id != FALSE && id != TRUE => Some(l),
            _ => None,
        }
    }

    /// Follows `input` from `node` to a leaf and returns its current value.
    pub fn eval_node(&self, mut node: NodeId, input: &BitVec) -> bool {
        loop {
            match &self.nodes[node.index()] {
                Node::Decision { var, lo, hi } => {
                    node = if input.get(*var as usize) { *hi } else { *lo };
                }
                Node::Leaf(l) => return l.value,
            }
        }
    }

    /// Leaf reached by `input` from `node`.
    pub fn route(&self, mut node: NodeId, input: &BitVec) -> NodeId {
        while let Node::Decision { var, lo, hi } = &self.nodes[node.index()] {
            node = if input.get(*var as usize) { *hi } else { *lo };
        }
        node
    }

    pub fn evaluate(&self, input: &BitVec) -> Result<BitVec> {
        self.check_input(input)?;
        let mut out = BitVec::zeros(self.m);
        for (j, &r) in self.roots.iter().enumerate() {
            out.set(j, self.eval_node(r, input));
        }
        Ok(out)
    }

    pub fn check_input(&self, input: &BitVec) -> Result<()> {
        if input.width() != self.n {
            return Err(Error::InputShape {
                expected: self.n,
                got: input.width(),
            });
        }
        Ok(())
    }

    /// Cofactor of `root` with input `var` fixed to `value`.
    pub fn restrict(&mut self, root: NodeId, var: usize, value: bool) -> Result<NodeId> {
        if !self.contains(root) {
            return Err(Error::Domain(format!("unknown node {}", root.0)));
        }
        if var >= self.n {
            return Err(Error::Domain(format!(
                "variable {var} out of range for {} inputs",
                self.n
            )));
        }
        let order = self.post_order(&[root]);
        let mut map: HashMap<NodeId, NodeId> = HashMap::with_capacity(order.len());
        for id in order {
            let new = match self.nodes[id.index()].clone() {
                Node::Leaf(_) => id,
                Node::Decision { var: v, lo, hi } => {
                    if v as usize == var {
                        map[if value { &hi } else { &lo }]
                    } else {
                        let (nlo, nhi) = (map[&lo], map[&hi]);
                        if nlo == lo && nhi == hi {
                            id
                        } else {
                            self.mk(v as usize, nlo, nhi)
                        }
                    }
                }
            };
            map.insert(id, new);
        }
        Ok(map[&root])
    }

    /// Rebuilds the diagrams below `roots` with leaves replaced according
    /// to `map`. Untouched subgraphs keep their ids.
    pub fn substitute(&mut self, roots: &[NodeId], map: &HashMap<NodeId, NodeId>) -> Vec<NodeId> {
        let order = self.post_order(roots);
        let mut done: HashMap<NodeId, NodeId> = HashMap::with_capacity(order.len());
        for id in order {
            let new = match self.nodes[id.index()].clone() {
                Node::Leaf(_) => map.get(&id).copied().unwrap_or(id),
                Node::Decision { var, lo, hi } => {
                    let (nlo, nhi) = (done[&lo], done[&hi]);
                    if nlo == lo && nhi == hi {
                        id
                    } else {
                        self.mk(var as usize, nlo, nhi)
                    }
                }
            };
            done.insert(id, new);
        }
        roots.iter().map(|r| done[r]).collect()
    }

    /// Copies the subgraph below `root` of `other` into this store.
    pub fn import(&mut self, other: &Bsd, root: NodeId) -> NodeId {
        let order = other.post_order(&[root]);
        let mut map: HashMap<NodeId, NodeId> = HashMap::with_capacity(order.len());
        for id in order {
            let new = match other.node(id) {
                Node::Leaf(l) => {
                    if l.status == LeafStatus::Final && self.sharing {
                        self.terminal(l.value)
                    } else {
                        self.push(Node::Leaf(l.clone()))
                    }
                }
                Node::Decision { var, lo, hi } => self.mk(*var as usize, map[lo], map[hi]),
            };
            map.insert(id, new);
        }
        map[&root]
    }

    /// Nodes reachable from `roots`, children before parents, in a
    /// deterministic order (depth-first, lo before hi, roots in order).
    pub fn post_order(&self, roots: &[NodeId]) -> Vec<NodeId> {
        let mut seen = vec![false; self.nodes.len()];
        let mut out = Vec::new();
        let mut stack: Vec<(NodeId, bool)> = Vec::new();
        for &r in roots {
            stack.push((r, false));
            while let Some((id, expanded)) = stack.pop() {
                if expanded {
                    out.push(id);
                    continue;
                }
                if seen[id.index()] {
                    continue;
                }
                seen[id.index()] = true;
                stack.push((id, true));
                if let Node::Decision { lo, hi, .. } = &self.nodes[id.index()] {
                    if !seen[hi.index()] {
                        stack.push((*hi, false));
                    }
                    if !seen[lo.index()] {
                        stack.push((*lo, false));
                    }
                }
            }
        }
        out
    }

    /// Reachable nodes in post-order over all roots.
    pub fn reachable(&self) -> Vec<NodeId> {
        self.post_order(&self.roots)
    }

    /// Distinct reachable nodes (decision and leaf), shared nodes once.
    pub fn node_count(&self) -> usize {
        self.reachable().len()
    }

    pub fn count_report(&self) -> NodeCount {
        let reach = self.reachable();
        let decisions = reach
            .iter()
            .filter(|id| matches!(self.node(**id), Node::Decision { .. }))
            .count();
        let per_root = self
            .roots
            .iter()
            .map(|r| self.post_order(&[*r]).len())
            .collect();

        let mut depth: HashMap<NodeId, usize> = HashMap::new();
        let mut queue = VecDeque::new();
        for &r in &self.roots {
            if let std::collections::hash_map::Entry::Vacant(e) = depth.entry(r) {
                e.insert(0);
                queue.push_back(r);
            }
        }
        while let Some(id) = queue.pop_front() {
            let d = depth[&id];
            if let Node::Decision { lo, hi, .. } = self.node(id) {
                for c in [*lo, *hi] {
                    if let std::collections::hash_map::Entry::Vacant(e) = depth.entry(c) {
                        e.insert(d + 1);
                        queue.push_back(c);
                    }
                }
            }
        }
        let max_depth = depth.values().copied().max().unwrap_or(0);
        let mut per_layer = vec![0; max_depth + 1];
        for d in depth.values() {
            per_layer[*d] += 1;
        }
        NodeCount {
            total: reach.len(),
            decisions,
            leaves: reach.len() - decisions,
            per_root,
            per_layer,
        }
    }

    /// Reachable leaves whose status is still `Speculated`.
    pub fn speculated_leaves(&self) -> Vec<NodeId> {
        self.reachable()
            .into_iter()
            .filter(|id| {
                matches!(self.node(*id), Node::Leaf(l) if l.status == LeafStatus::Speculated)
            })
            .collect()
    }

    /// Canonical reduced copy: drops redundant tests and coalesces
    /// structurally identical nodes. Requires every leaf to be final.
    pub fn finalize(&self) -> Result<Bsd> {
        let spec = self.speculated_leaves().len();
        if spec > 0 {
            return Err(Error::NotConverged { speculated: spec });
        }
        let mut out = Bsd::new(self.n, self.m);
        out.layer = self.layer;
        out.clusters = self.clusters.clone();
        let order = self.reachable();
        let mut map: HashMap<NodeId, NodeId> = HashMap::with_capacity(order.len());
        for id in order {
            let new = match self.node(id) {
                Node::Leaf(l) => out.terminal(l.value),
                Node::Decision { var, lo, hi } => out.mk(*var as usize, map[lo], map[hi]),
            };
            map.insert(id, new);
        }
        for (j, r) in self.roots.iter().enumerate() {
            out.roots[j] = map[r];
        }
        Ok(out)
    }

    /// True when no reachable node has `lo == hi` and no two distinct
    /// reachable nodes share a `(var, lo, hi)` triple or a final constant.
    pub fn is_canonical(&self) -> bool {
        let mut seen: HashMap<(u32, NodeId, NodeId), NodeId> = HashMap::new();
        let mut consts = [None::<NodeId>; 2];
        for id in self.reachable() {
            match self.node(id) {
                Node::Decision { var, lo, hi } => {
                    if lo == hi {
                        return false;
                    }
                    if seen.insert((*var, *lo, *hi), id).is_some() {
                        return false;
                    }
                }
                Node::Leaf(l) if l.status == LeafStatus::Final => {
                    let slot = &mut consts[l.value as usize];
                    if slot.is_some_and(|s| s != id) {
                        return false;
                    }
                    *slot = Some(id);
                }
                Node::Leaf(_) => {}
            }
        }
        true
    }

    /// True when no variable repeats on any root-to-leaf path.
    pub fn respects_path_discipline(&self) -> bool {
        // Per node: the set of variables tested at or below it must not
        // include the node's own variable in either child.
        let order = self.reachable();
        let words = self.n.div_ceil(64);
        let mut below: HashMap<NodeId, Vec<u64>> = HashMap::with_capacity(order.len());
        for id in order {
            let set = match self.node(id) {
                Node::Leaf(_) => vec![0u64; words],
                Node::Decision { var, lo, hi } => {
                    let v = *var as usize;
                    let (a, b) = (&below[lo], &below[hi]);
                    if (a[v / 64] | b[v / 64]) >> (v % 64) & 1 == 1 {
                        return false;
                    }
                    let mut s: Vec<u64> = a.iter().zip(b).map(|(x, y)| x | y).collect();
                    s[v / 64] |= 1 << (v % 64);
                    s
                }
            };
            below.insert(id, set);
        }
        true
    }

    /// Iterator over all nodes in the store (including unreachable ones).
    pub fn store(&self) -> impl Iterator<Item = (NodeId, &Node)> {
        self.nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (NodeId(i as u32), n))
    }

    /// Compact copy containing only reachable nodes, renumbered in
    /// post-order after the two terminals. Used for serialization.
    pub fn compacted(&self) -> Bsd {
        let mut out = Bsd::with_sharing(self.n, self.m, self.sharing);
        out.layer = self.layer;
        out.clusters = self.clusters.clone();
        let mut map: HashMap<NodeId, NodeId> = HashMap::new();
        map.insert(FALSE, FALSE);
        map.insert(TRUE, TRUE);
        for id in self.reachable() {
            if id == FALSE || id == TRUE {
                continue;
            }
            let node = match self.node(id) {
                Node::Leaf(l) => Node::Leaf(l.clone()),
                Node::Decision { var, lo, hi } => Node::Decision {
                    var: *var,
                    lo: map[lo],
                    hi: map[hi],
                },
            };
            let new = out.push(node.clone());
            if let (true, Node::Decision { var, lo, hi }) = (out.sharing, node) {
                out.unique.insert((var, lo, hi), new);
            }
            map.insert(id, new);
        }
        for (j, r) in self.roots.iter().enumerate() {
            out.roots[j] = map[r];
        }
        out
    }

    /// Builds a diagram from a raw node list; used by deserialization.
    /// Children must precede parents and nodes 0/1 must be the terminals.
    pub(crate) fn from_parts(
        n: usize,
        m: usize,
        sharing: bool,
        nodes: Vec<Node>,
        roots: Vec<NodeId>,
    ) -> Result<Bsd> {
        let bad = |msg: String| Error::Parse { line: 0, msg };
        if nodes.len() < 2
            || nodes[0] != Node::Leaf(Leaf::final_const(false))
            || nodes[1] != Node::Leaf(Leaf::final_const(true))
        {
            return Err(bad("nodes 0 and 1 must be the final terminals".into()));
        }
        if roots.len() != m {
            return Err(bad(format!("expected {m} roots, found {}", roots.len())));
        }
        let mut out = Bsd::with_sharing(n, m, sharing);
        for (i, node) in nodes.into_iter().enumerate().skip(2) {
            if let Node::Decision { var, lo, hi } = &node {
                if *var as usize >= n || lo.index() >= i || hi.index() >= i {
                    return Err(bad(format!("node {i} references a later node or bad variable")));
                }
                if sharing {
                    out.unique.insert((*var, *lo, *hi), NodeId(i as u32));
                }
            }
            out.push(node);
        }
        for r in &roots {
            if !out.contains(*r) {
                return Err(bad(format!("root {} out of range", r.0)));
            }
        }
        out.roots = roots;
        Ok(out)
    }
}
