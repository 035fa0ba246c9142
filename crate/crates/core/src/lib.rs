// SPDX-License-Identifier: Apache-2.0

//! Learn combinational circuits from input-output behavior.
//!
//! A black-box [`oracle`] is learned layer by layer into a binary
//! speculation diagram ([`bsd`]): every unexplored subtree is a leaf that
//! holds a constant guessed from sampled outputs. Leaves whose samples are
//! unanimous become final; the rest are expanded on one input variable per
//! layer and merged with leaves that behave identically. Outputs that share
//! logic are learned together ([`distance`]).
//!
//! Bit strings are LSB first everywhere: character `i` of a string is bit
//! `i`.

pub mod bits;
pub mod bsd;
pub mod config;
pub mod distance;
pub mod emit;
pub mod engine;
pub mod error;
pub mod harness;
pub mod ios;
pub mod oracle;
pub mod pipeline;
pub mod sampling;

pub use bits::BitVec;
pub use bsd::{Bsd, Leaf, LeafStatus, Node, NodeId};
pub use config::{LearnConfig, Scorer};
pub use error::{Error, Result};
pub use ios::{Provenance, SampleSet};
pub use oracle::{builtin, Oracle, OracleHandle};
pub use pipeline::{learn, refine, LearnReport};
