// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::Evidence;
use crate::bsd::SpeculationStats;
use crate::error::Result;
use crate::oracle::OracleHandle;
use crate::sampling::{conditioned_inputs, PathAssignment, RngStream};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Final0,
    Final1,
    /// Not settled; carries the current majority value.
    Undecided(bool),
}

impl Verdict {
    pub fn value(self) -> bool {
        match self {
            Verdict::Final0 => false,
            Verdict::Final1 => true,
            Verdict::Undecided(v) => v,
        }
    }

    pub fn is_final(self) -> bool {
        !matches!(self, Verdict::Undecided(_))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeculationVerdict {
    pub verdict: Verdict,
    pub stats: SpeculationStats,
    pub ones: u64,
    /// Every mandatory sample routed to the leaf agrees with the
    /// verdict's value.
    pub consistent: bool,
    /// The samples covered the whole cofactor.
    pub exhaustive: bool,
    /// Sampled outputs were unanimous but a mandatory sample disagreed.
    pub contradiction: bool,
}

/// Verdict from `ones` of `total` observed outputs.
///
/// A leaf is final when the observations are unanimous and every
/// mandatory sample agrees. A leaf without observations takes the
/// `inherited` value and is final.
pub fn decide(ones: u64, total: u64, mandatory: &Evidence, inherited: bool, exhaustive: bool) -> SpeculationVerdict {
    let stats = SpeculationStats::from_counts(ones, total);
    if total == 0 {
        let consistent = mandatory.values().all(|&b| b == inherited);
        let verdict = match (consistent, inherited) {
            (true, false) => Verdict::Final0,
            (true, true) => Verdict::Final1,
            (false, v) => Verdict::Undecided(v),
        };
        return SpeculationVerdict {
            verdict,
            stats,
            ones,
            consistent,
            exhaustive,
            contradiction: !consistent,
        };
    }
    let unanimous = ones == 0 || ones == total;
    let value = if unanimous { ones == total } else { stats.majority() };
    let consistent = mandatory.values().all(|&b| b == value);
    let verdict = match (unanimous && consistent, value) {
        (true, false) => Verdict::Final0,
        (true, true) => Verdict::Final1,
        (false, v) => Verdict::Undecided(v),
    };
    SpeculationVerdict {
        verdict,
        stats,
        ones,
        consistent,
        exhaustive,
        contradiction: unanimous && !consistent,
    }
}

/// Monte Carlo speculation of output `member` on the cofactor `path`.
///
/// Draws `count` conditioned inputs, or every assignment of the free bits
/// when that is no more than `count`.
pub fn speculate_leaf(
    oracle: &OracleHandle,
    member: usize,
    path: &PathAssignment,
    mandatory: &Evidence,
    count: u64,
    stream: &RngStream,
) -> Result<SpeculationVerdict> {
    let (xs, exhaustive) = conditioned_inputs(oracle.inputs(), path, count, stream);
    let ys = oracle.query(&xs)?;
    let ones = ys.iter().filter(|y| y.get(member)).count() as u64;
    Ok(decide(ones, ys.len() as u64, mandatory, false, exhaustive))
}

/// Speculation from a fixed set of known points, for table-backed oracles.
pub fn speculate_known(known: &Evidence, mandatory: &Evidence, inherited: bool) -> SpeculationVerdict {
    let ones = known.values().filter(|&&b| b).count() as u64;
    decide(ones, known.len() as u64, mandatory, inherited, false)
}
