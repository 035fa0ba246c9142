// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::bsd::{Bsd, LeafStatus, Node};

/// Graphviz text for the reachable part of `diagram`.
///
/// Decision nodes are circles labeled with their variable, leaves are
/// boxes; speculated leaves are dashed and carry a `?`. The `hi` edge is
/// solid and the `lo` edge dashed. Roots get an external label
/// `y<j> (c<cluster>)`.
pub fn to_dot(diagram: &Bsd) -> String {
    let mut roots: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for (j, r) in diagram.roots().iter().enumerate() {
        roots
            .entry(r.index())
            .or_default()
            .push(format!("y{j} (c{})", diagram.clusters[j]));
    }
    let mut s = String::from("digraph bsd {\n  node [shape=circle];\n");
    let mut edges = String::new();
    for id in diagram.reachable() {
        let k = id.index();
        let xlabel = roots
            .get(&k)
            .map(|names| format!(", xlabel=\"{}\"", names.join(", ")))
            .unwrap_or_default();
        match diagram.node(id) {
            Node::Leaf(l) => {
                let (mark, style) = match l.status {
                    LeafStatus::Final => ("", ""),
                    LeafStatus::Speculated => ("?", ", style=dashed"),
                };
                writeln!(s, "  n{k} [shape=box, label=\"{}{mark}\"{style}{xlabel}];", l.value as u8).unwrap();
            }
            Node::Decision { var, lo, hi } => {
                writeln!(s, "  n{k} [label=\"x{var}\"{xlabel}];").unwrap();
                writeln!(edges, "  n{k} -> n{} [style=dashed];", lo.index()).unwrap();
                writeln!(edges, "  n{k} -> n{};", hi.index()).unwrap();
            }
        }
    }
    s.push_str(&edges);
    s.push_str("}\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count(dot: &str) -> (usize, usize) {
        let nodes = dot.lines().filter(|l| l.contains(" [") && !l.contains("->") && !l.contains("node [")).count();
        let edges = dot.lines().filter(|l| l.contains("->")).count();
        (nodes, edges)
    }

    #[test]
    fn leaf_only() {
        let d = Bsd::new(2, 1);
        let dot = to_dot(&d);
        assert_eq!(count(&dot), (1, 0));
        assert!(dot.contains("xlabel=\"y0 (c0)\""));
    }

    #[test]
    fn or_diagram_has_four_nodes_and_edges() {
        let mut d = Bsd::new(2, 1);
        let (f, t) = (d.terminal(false), d.terminal(true));
        let inner = d.mk(1, f, t);
        let root = d.mk(0, inner, t);
        d.set_root(0, root);
        assert_eq!(count(&to_dot(&d)), (4, 4));
    }
}
