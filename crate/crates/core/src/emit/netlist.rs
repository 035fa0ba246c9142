// SPDX-License-Identifier: Apache-2.0

//! Structural netlists in a small Verilog subset.
//!
//! Grammar, one statement per line, `//` starts a comment:
//!
//! ```text
//! module <name>(x, y);
//! input [<n-1>:0] x;
//! output [<m-1>:0] y;
//! wire <w>, <w>, ...;            (zero or more lines)
//! assign <w> = <expr>;           (one per gate)
//! assign y[<j>] = <sig>;         (one per output)
//! endmodule
//!
//! sig  := <w> | x[<i>] | 1'b0 | 1'b1
//! lit  := sig | ~sig
//! expr := ~sig | lit & lit | sig | sig | sig ? sig : sig
//! ```
//!
//! Wires are driven once and must be assigned before they are read, so the
//! statement order is a topological order.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::bits::BitVec;
use crate::bsd::{Bsd, Node, NodeId};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Signal {
    Input(usize),
    Wire(usize),
    Const(bool),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Lit {
    pub signal: Signal,
    pub negated: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gate {
    Not(Signal),
    And(Lit, Lit),
    Or(Signal, Signal),
    Mux { sel: Signal, lo: Signal, hi: Signal },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum NetlistStyle {
    /// Three gates per decision node over NOT/AND/OR.
    #[default]
    Basis,
    /// One 2:1 mux per decision node.
    Mux,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Netlist {
    pub name: String,
    pub inputs: usize,
    pub outputs: usize,
    pub wires: Vec<String>,
    /// `gates[k]` drives `wires[drives[k]]`, in evaluation order.
    pub gates: Vec<Gate>,
    pub drives: Vec<usize>,
    pub output_bindings: Vec<Signal>,
}

impl Netlist {
    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    pub fn evaluate(&self, input: &BitVec) -> Result<BitVec> {
        if input.width() != self.inputs {
            return Err(Error::InputShape {
                expected: self.inputs,
                got: input.width(),
            });
        }
        let mut values = vec![false; self.wires.len()];
        let get = |values: &[bool], s: Signal| match s {
            Signal::Input(i) => input.get(i),
            Signal::Wire(w) => values[w],
            Signal::Const(b) => b,
        };
        for (g, &w) in self.gates.iter().zip(&self.drives) {
            values[w] = match *g {
                Gate::Not(a) => !get(&values, a),
                Gate::And(a, b) => (get(&values, a.signal) ^ a.negated) && (get(&values, b.signal) ^ b.negated),
                Gate::Or(a, b) => get(&values, a) || get(&values, b),
                Gate::Mux { sel, lo, hi } => {
                    if get(&values, sel) {
                        get(&values, hi)
                    } else {
                        get(&values, lo)
                    }
                }
            };
        }
        let bits: Vec<bool> = self.output_bindings.iter().map(|&s| get(&values, s)).collect();
        Ok(BitVec::from_bools(&bits))
    }

    fn sig(&self, s: Signal) -> String {
        match s {
            Signal::Input(i) => format!("x[{i}]"),
            Signal::Wire(w) => self.wires[w].clone(),
            Signal::Const(false) => "1'b0".into(),
            Signal::Const(true) => "1'b1".into(),
        }
    }

    fn lit(&self, l: Lit) -> String {
        if l.negated {
            format!("~{}", self.sig(l.signal))
        } else {
            self.sig(l.signal)
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "module {}(x, y);", self.name).unwrap();
        writeln!(s, "input [{}:0] x;", self.inputs - 1).unwrap();
        writeln!(s, "output [{}:0] y;", self.outputs - 1).unwrap();
        for chunk in self.wires.chunks(16) {
            writeln!(s, "wire {};", chunk.join(", ")).unwrap();
        }
        for (g, &w) in self.gates.iter().zip(&self.drives) {
            let rhs = match *g {
                Gate::Not(a) => format!("~{}", self.sig(a)),
                Gate::And(a, b) => format!("{} & {}", self.lit(a), self.lit(b)),
                Gate::Or(a, b) => format!("{} | {}", self.sig(a), self.sig(b)),
                Gate::Mux { sel, lo, hi } => format!("{} ? {} : {}", self.sig(sel), self.sig(hi), self.sig(lo)),
            };
            writeln!(s, "assign {} = {rhs};", self.wires[w]).unwrap();
        }
        for (j, &b) in self.output_bindings.iter().enumerate() {
            writeln!(s, "assign y[{j}] = {};", self.sig(b)).unwrap();
        }
        s.push_str("endmodule\n");
        s
    }

    pub fn parse(text: &str) -> Result<Netlist> {
        Parser::default().run(text)
    }
}

/// Netlist of a finalized diagram. Shared nodes are emitted once.
pub fn to_netlist(diagram: &Bsd, style: NetlistStyle) -> Result<Netlist> {
    let spec = diagram.speculated_leaves().len();
    if spec > 0 {
        return Err(Error::NotFinalized { speculated: spec });
    }
    let mut net = Netlist {
        name: "bsd".into(),
        inputs: diagram.inputs(),
        outputs: diagram.outputs(),
        wires: Vec::new(),
        gates: Vec::new(),
        drives: Vec::new(),
        output_bindings: Vec::new(),
    };
    let mut sig: HashMap<NodeId, Signal> = HashMap::new();
    let gate = |net: &mut Netlist, name: String, g: Gate| {
        let w = net.wires.len();
        net.wires.push(name);
        net.gates.push(g);
        net.drives.push(w);
        Signal::Wire(w)
    };
    for id in diagram.reachable() {
        let s = match diagram.node(id) {
            Node::Leaf(l) => Signal::Const(l.value),
            Node::Decision { var, lo, hi } => {
                let (v, lo, hi) = (Signal::Input(*var as usize), sig[lo], sig[hi]);
                let k = id.index();
                match style {
                    NetlistStyle::Basis => {
                        let a = gate(
                            &mut net,
                            format!("n{k}_lo"),
                            Gate::And(Lit { signal: v, negated: true }, Lit { signal: lo, negated: false }),
                        );
                        let b = gate(
                            &mut net,
                            format!("n{k}_hi"),
                            Gate::And(Lit { signal: v, negated: false }, Lit { signal: hi, negated: false }),
                        );
                        gate(&mut net, format!("n{k}"), Gate::Or(a, b))
                    }
                    NetlistStyle::Mux => gate(&mut net, format!("n{k}"), Gate::Mux { sel: v, lo, hi }),
                }
            }
        };
        sig.insert(id, s);
    }
    net.output_bindings = diagram.roots().iter().map(|r| sig[r]).collect();
    Ok(net)
}

#[derive(Default)]
struct Parser {
    name: Option<String>,
    inputs: Option<usize>,
    outputs: Option<usize>,
    declared: HashMap<String, usize>,
    wires: Vec<String>,
    driven: Vec<bool>,
    gates: Vec<Gate>,
    drives: Vec<usize>,
    bindings: Vec<Option<Signal>>,
    ended: bool,
}

fn is_ident(s: &str) -> bool {
    let mut c = s.chars();
    matches!(c.next(), Some(ch) if ch.is_ascii_alphabetic() || ch == '_')
        && c.all(|ch| ch.is_ascii_alphanumeric() || ch == '_')
}

fn index_of(s: &str, name: &str) -> Option<usize> {
    s.strip_prefix(name)?.strip_prefix('[')?.strip_suffix(']')?.parse().ok()
}

fn range_width(decl: &str, kw: &str, name: &str) -> Option<usize> {
    let rest = decl.strip_prefix(kw)?.trim_start();
    let rest = rest.strip_prefix('[')?;
    let (hi, rest) = rest.split_once(':')?;
    let (lo, rest) = rest.split_once(']')?;
    if lo.trim() != "0" || rest.trim() != name {
        return None;
    }
    Some(hi.trim().parse::<usize>().ok()? + 1)
}

impl Parser {
    fn run(mut self, text: &str) -> Result<Netlist> {
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let stmt = raw.split("//").next().unwrap_or("").trim();
            if stmt.is_empty() {
                continue;
            }
            self.statement(stmt).map_err(|msg| Error::Parse { line, msg })?;
        }
        let eof = |msg: &str| Error::Parse {
            line: text.lines().count(),
            msg: msg.into(),
        };
        if !self.ended {
            return Err(eof("missing endmodule"));
        }
        let bindings = self
            .bindings
            .iter()
            .enumerate()
            .map(|(j, b)| b.ok_or_else(|| eof(&format!("output y[{j}] is never assigned"))))
            .collect::<Result<Vec<_>>>()?;
        if let Some(w) = self.driven.iter().position(|d| !d) {
            return Err(eof(&format!("wire {} is declared but never driven", self.wires[w])));
        }
        Ok(Netlist {
            name: self.name.unwrap_or_default(),
            inputs: self.inputs.unwrap_or(0),
            outputs: self.outputs.unwrap_or(0),
            wires: self.wires,
            gates: self.gates,
            drives: self.drives,
            output_bindings: bindings,
        })
    }

    fn statement(&mut self, stmt: &str) -> std::result::Result<(), String> {
        if self.ended {
            return Err("statement after endmodule".into());
        }
        if stmt == "endmodule" {
            if self.inputs.is_none() || self.outputs.is_none() {
                return Err("missing port declarations".into());
            }
            self.ended = true;
            return Ok(());
        }
        let body = stmt
            .strip_suffix(';')
            .ok_or_else(|| format!("expected `;` at end of {stmt:?}"))?
            .trim();
        if let Some(rest) = body.strip_prefix("module ") {
            if self.name.is_some() {
                return Err("second module header".into());
            }
            let (name, ports) = rest.split_once('(').ok_or("malformed module header")?;
            let ports: String = ports.chars().filter(|c| !c.is_whitespace()).collect();
            if ports != "x,y)" || !is_ident(name.trim()) {
                return Err("module header must be `module <name>(x, y);`".into());
            }
            self.name = Some(name.trim().to_string());
            return Ok(());
        }
        if self.name.is_none() {
            return Err("expected module header".into());
        }
        if body.starts_with("input") {
            let n = range_width(body, "input", "x").ok_or("expected `input [N-1:0] x;`")?;
            self.inputs = Some(n);
            return Ok(());
        }
        if body.starts_with("output") {
            let m = range_width(body, "output", "y").ok_or("expected `output [M-1:0] y;`")?;
            self.outputs = Some(m);
            self.bindings = vec![None; m];
            return Ok(());
        }
        if self.inputs.is_none() || self.outputs.is_none() {
            return Err("ports must be declared before wires and assignments".into());
        }
        if let Some(rest) = body.strip_prefix("wire ") {
            for name in rest.split(',').map(str::trim) {
                if !is_ident(name) || name == "x" || name == "y" {
                    return Err(format!("bad wire name {name:?}"));
                }
                if self.declared.insert(name.to_string(), self.wires.len()).is_some() {
                    return Err(format!("wire {name} declared twice"));
                }
                self.wires.push(name.to_string());
                self.driven.push(false);
            }
            return Ok(());
        }
        if let Some(rest) = body.strip_prefix("assign ") {
            let (lhs, rhs) = rest.split_once('=').ok_or("expected `=` in assign")?;
            let (lhs, rhs) = (lhs.trim(), rhs.trim());
            if let Some(j) = index_of(lhs, "y") {
                let m = self.bindings.len();
                let slot = self
                    .bindings
                    .get_mut(j)
                    .ok_or_else(|| format!("y[{j}] out of range for {m} outputs"))?;
                if slot.is_some() {
                    return Err(format!("y[{j}] assigned twice"));
                }
                let s = self.signal(rhs)?;
                self.bindings[j] = Some(s);
                return Ok(());
            }
            let &w = self.declared.get(lhs).ok_or_else(|| format!("assignment to undeclared wire {lhs}"))?;
            if self.driven[w] {
                return Err(format!("wire {lhs} driven twice"));
            }
            let gate = self.expr(rhs)?;
            self.driven[w] = true;
            self.gates.push(gate);
            self.drives.push(w);
            return Ok(());
        }
        Err(format!("unrecognized statement {stmt:?}"))
    }

    fn signal(&self, s: &str) -> std::result::Result<Signal, String> {
        let s = s.trim();
        match s {
            "1'b0" => return Ok(Signal::Const(false)),
            "1'b1" => return Ok(Signal::Const(true)),
            _ => {}
        }
        if let Some(i) = index_of(s, "x") {
            let n = self.inputs.unwrap_or(0);
            return if i < n {
                Ok(Signal::Input(i))
            } else {
                Err(format!("x[{i}] out of range for {n} inputs"))
            };
        }
        match self.declared.get(s) {
            Some(&w) if self.driven[w] => Ok(Signal::Wire(w)),
            Some(_) => Err(format!("wire {s} read before it is driven")),
            None => Err(format!("unknown signal {s:?}")),
        }
    }

    fn lit(&self, s: &str) -> std::result::Result<Lit, String> {
        let s = s.trim();
        match s.strip_prefix('~') {
            Some(rest) => Ok(Lit {
                signal: self.signal(rest)?,
                negated: true,
            }),
            None => Ok(Lit {
                signal: self.signal(s)?,
                negated: false,
            }),
        }
    }

    fn expr(&self, rhs: &str) -> std::result::Result<Gate, String> {
        if let Some((sel, arms)) = rhs.split_once('?') {
            let (hi, lo) = arms.split_once(':').ok_or("expected `:` in mux")?;
            return Ok(Gate::Mux {
                sel: self.signal(sel)?,
                lo: self.signal(lo)?,
                hi: self.signal(hi)?,
            });
        }
        if let Some((a, b)) = rhs.split_once('&') {
            return Ok(Gate::And(self.lit(a)?, self.lit(b)?));
        }
        if let Some((a, b)) = rhs.split_once('|') {
            return Ok(Gate::Or(self.signal(a)?, self.signal(b)?));
        }
        if let Some(a) = rhs.strip_prefix('~') {
            return Ok(Gate::Not(self.signal(a)?));
        }
        Err(format!("unsupported expression {rhs:?}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn or_diagram() -> Bsd {
        let mut d = Bsd::new(2, 1);
        let (f, t) = (d.terminal(false), d.terminal(true));
        let inner = d.mk(1, f, t);
        let root = d.mk(0, inner, t);
        d.set_root(0, root);
        d
    }

    #[test]
    fn constant_output_has_no_gates() {
        let mut d = Bsd::new(3, 1);
        let t = d.terminal(true);
        d.set_root(0, t);
        let net = to_netlist(&d, NetlistStyle::Basis).unwrap();
        assert_eq!(net.gate_count(), 0);
        assert!(net.to_text().contains("assign y[0] = 1'b1;"));
    }

    #[test]
    fn or_has_six_basis_gates_and_round_trips() {
        let d = or_diagram();
        for (style, gates) in [(NetlistStyle::Basis, 6), (NetlistStyle::Mux, 2)] {
            let net = to_netlist(&d, style).unwrap();
            assert_eq!(net.gate_count(), gates);
            let back = Netlist::parse(&net.to_text()).unwrap();
            assert_eq!(back.to_text(), net.to_text());
            for i in 0..4u128 {
                let x = BitVec::from_u128(i, 2);
                assert_eq!(back.evaluate(&x).unwrap(), d.evaluate(&x).unwrap());
            }
        }
    }

    #[test]
    fn parser_rejects_bad_structure() {
        let head = "module m(x, y);\ninput [1:0] x;\noutput [0:0] y;\n";
        let cases = [
            "wire a;\nassign y[0] = a;\nassign a = x[0] | x[1];\nendmodule\n",
            "wire a;\nassign a = x[0] | x[1];\nassign a = x[0];\nassign y[0] = a;\nendmodule\n",
            "wire a;\nassign a = x[0] | x[5];\nassign y[0] = a;\nendmodule\n",
            "wire a;\nassign a = x[0] | x[1];\nendmodule\n",
            "wire a;\nassign a = x[0] | x[1];\nassign y[0] = a;\n",
            "wire a;\nassign y[0] = x[0];\nendmodule\n",
        ];
        for body in cases {
            assert!(Netlist::parse(&format!("{head}{body}")).is_err(), "{body}");
        }
        let ok = format!("{head}wire a, b;\nassign a = ~x[0];\nassign b = a & ~x[1]; // nor\nassign y[0] = b;\nendmodule\n");
        let net = Netlist::parse(&ok).unwrap();
        assert_eq!(net.evaluate(&BitVec::parse("00").unwrap()).unwrap().to_string(), "1");
        assert_eq!(net.evaluate(&BitVec::parse("10").unwrap()).unwrap().to_string(), "0");
    }

    #[test]
    fn speculated_diagram_is_refused() {
        let mut d = Bsd::new(1, 1);
        let l = d.add_leaf(crate::bsd::Leaf::speculated(Default::default()));
        d.set_root(0, l);
        assert!(matches!(to_netlist(&d, NetlistStyle::Basis), Err(Error::NotFinalized { .. })));
    }
}
