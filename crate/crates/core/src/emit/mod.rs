// SPDX-License-Identifier: Apache-2.0

//! Artifacts derived from a diagram and checks against an oracle.

pub mod dot;
pub mod json;
pub mod netlist;
pub mod validate;

pub use dot::to_dot;
pub use json::{load_design, save_design, DesignFile, FORMAT, VERSION};
pub use netlist::{to_netlist, Gate, Lit, Netlist, NetlistStyle, Signal};
pub use validate::{check_equivalence, counterexamples, CheckMode, EquivalenceVerdict, Evaluate, Mismatch};
