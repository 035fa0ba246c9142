// SPDX-License-Identifier: Apache-2.0

//! The `.bsd.json` design document.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bsd::{Bsd, Leaf, LeafStatus, Node, NodeId, SpeculationStats};
use crate::config::LearnConfig;
use crate::error::{Error, Result};
use crate::ios::{ios_line, SampleSet};

pub const FORMAT: &str = "bsd";
pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NodeRecord {
    Leaf {
        id: u32,
        value: u8,
        status: LeafStatus,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        stats: Option<SpeculationStats>,
    },
    Decision {
        id: u32,
        var: u32,
        lo: u32,
        hi: u32,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignFile {
    pub format: String,
    pub version: u32,
    pub inputs: usize,
    pub outputs: usize,
    pub sharing: bool,
    pub layer: usize,
    /// Reachable nodes only, children before parents.
    pub nodes: Vec<NodeRecord>,
    pub roots: Vec<u32>,
    pub clusters: Vec<usize>,
    pub seed: Option<u64>,
    pub config: Option<LearnConfig>,
    /// Mandatory samples the design was learned with, as `.ios` lines.
    pub mandatory: Vec<String>,
}

impl DesignFile {
    pub fn new(diagram: &Bsd, config: Option<&LearnConfig>, mandatory: Option<&SampleSet>) -> Self {
        let d = diagram.compacted();
        let nodes = d
            .store()
            .map(|(id, node)| match node {
                Node::Leaf(l) => NodeRecord::Leaf {
                    id: id.index() as u32,
                    value: l.value as u8,
                    status: l.status,
                    stats: (l.status == LeafStatus::Speculated).then(|| l.stats.clone()),
                },
                Node::Decision { var, lo, hi } => NodeRecord::Decision {
                    id: id.index() as u32,
                    var: *var,
                    lo: lo.index() as u32,
                    hi: hi.index() as u32,
                },
            })
            .collect();
        DesignFile {
            format: FORMAT.into(),
            version: VERSION,
            inputs: d.inputs(),
            outputs: d.outputs(),
            sharing: d.is_sharing(),
            layer: d.layer,
            nodes,
            roots: d.roots().iter().map(|r| r.index() as u32).collect(),
            clusters: d.clusters.clone(),
            seed: config.map(|c| c.seed),
            config: config.cloned(),
            mandatory: mandatory
                .map(|s| s.iter().map(|x| ios_line(&x.input, &x.output)).collect())
                .unwrap_or_default(),
        }
    }

    pub fn to_bsd(&self) -> Result<Bsd> {
        let bad = |msg: String| Error::Parse { line: 0, msg };
        if self.format != FORMAT {
            return Err(bad(format!("unknown format {:?}", self.format)));
        }
        if self.version != VERSION {
            return Err(bad(format!("unsupported version {}", self.version)));
        }
        if self.inputs == 0 || self.outputs == 0 {
            return Err(bad("widths must be at least 1".into()));
        }
        if self.clusters.len() != self.outputs {
            return Err(bad("one cluster id per output expected".into()));
        }
        let mut nodes = Vec::with_capacity(self.nodes.len());
        for (i, rec) in self.nodes.iter().enumerate() {
            let (id, node) = match rec {
                NodeRecord::Leaf {
                    id,
                    value,
                    status,
                    stats,
                } => {
                    if *value > 1 {
                        return Err(bad(format!("node {id}: leaf value must be 0 or 1")));
                    }
                    let leaf = Leaf {
                        value: *value == 1,
                        status: *status,
                        stats: stats.clone().unwrap_or_default(),
                    };
                    (*id, Node::Leaf(leaf))
                }
                NodeRecord::Decision { id, var, lo, hi } => (
                    *id,
                    Node::Decision {
                        var: *var,
                        lo: NodeId(*lo),
                        hi: NodeId(*hi),
                    },
                ),
            };
            if id as usize != i {
                return Err(bad(format!("node ids must be 0, 1, 2, ...; found {id} at position {i}")));
            }
            nodes.push(node);
        }
        let roots = self.roots.iter().map(|&r| NodeId(r)).collect();
        let mut d = Bsd::from_parts(self.inputs, self.outputs, self.sharing, nodes, roots)?;
        d.layer = self.layer;
        d.clusters = self.clusters.clone();
        Ok(d)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("design documents serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

pub fn save_design(path: &Path, design: &DesignFile) -> Result<()> {
    std::fs::write(path, design.to_json())?;
    Ok(())
}

pub fn load_design(path: &Path) -> Result<(Bsd, DesignFile)> {
    let file = DesignFile::from_json(&std::fs::read_to_string(path)?)?;
    Ok((file.to_bsd()?, file))
}
