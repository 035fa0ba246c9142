// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

use crate::bits::BitVec;
use crate::bsd::Bsd;
use crate::pipeline::LearnReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("input shape mismatch: expected width {expected}, got {got}")]
    InputShape { expected: usize, got: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("diagram not converged: {speculated} speculated leaves remain")]
    NotConverged { speculated: usize },

    #[error("diagram is not finalized: {speculated} speculated leaves remain")]
    NotFinalized { speculated: usize },

    #[error("probe budget exhausted: requested {requested}, used {used} of {limit}")]
    Budget {
        requested: u64,
        used: u64,
        limit: u64,
    },

    #[error("oracle protocol error: {reason} (line: {line:?})")]
    Protocol { line: String, reason: String },

    #[error("truth table has no entry for input {0}")]
    AbsentQuery(BitVec),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("complexity estimate error: {0}")]
    Estimate(String),

    #[error("exhaustive check needs 2^{n} inputs, above the cap of {cap}")]
    CapExceeded { n: usize, cap: u64 },

    #[error("given sample {input} disagrees with the oracle: given {given}, oracle {oracle}")]
    Inconsistent {
        input: BitVec,
        given: BitVec,
        oracle: BitVec,
    },

    #[error("learning stopped before any layer completed: {reason}")]
    PartialResult {
        reason: String,
        partial: Box<(Bsd, LearnReport)>,
    },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}
