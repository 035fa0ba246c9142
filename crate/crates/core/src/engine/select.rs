// SPDX-License-Identifier: Apache-2.0

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitVec;
use crate::config::Scorer;
use crate::sampling::RngStream;

/// Probe evidence gathered at one undecided leaf.
#[derive(Clone, Debug)]
pub struct LeafProbes {
    /// The leaf's current speculated value.
    pub current: bool,
    pub inputs: Vec<BitVec>,
    pub outputs: Vec<bool>,
    /// `flips[c][i]`: output at `inputs[i]` with candidate `c` flipped,
    /// when known.
    pub flips: Vec<Vec<Option<bool>>>,
    /// The probes enumerate the leaf's whole cofactor.
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub var: usize,
    pub score: f64,
    /// Share of probe pairs whose output changes when `var` flips.
    pub influence: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub var: usize,
    pub scores: Vec<CandidateScore>,
}

fn counts_as_change(ones: u64, n: u64, exact: bool, z: f64) -> bool {
    let diff = (2 * ones).abs_diff(n) as f64;
    if exact {
        diff > 0.0
    } else {
        diff > z * (n as f64).sqrt()
    }
}

/// Scores every candidate over all leaves.
///
/// For each leaf and candidate the probes split by the candidate's value.
/// A side's majority replaces the leaf's current value only when it is
/// decisive: any imbalance for exact probes, more than `z` standard
/// deviations otherwise. The Hamming score counts probes whose prediction
/// changes; the error-reduction score counts probes whose prediction
/// becomes correct minus those that become wrong, using plain majorities.
pub fn score_candidates(leaves: &[LeafProbes], candidates: &[usize], scorer: Scorer, z: f64) -> Vec<CandidateScore> {
    candidates
        .iter()
        .enumerate()
        .map(|(c, &var)| {
            let mut score = 0i64;
            let (mut changed, mut pairs) = (0u64, 0u64);
            for leaf in leaves {
                let mut n = [0u64; 2];
                let mut ones = [0u64; 2];
                for (i, x) in leaf.inputs.iter().enumerate() {
                    let side = x.get(var) as usize;
                    n[side] += 1;
                    ones[side] += leaf.outputs[i] as u64;
                    if let Some(f) = leaf.flips[c][i] {
                        pairs += 1;
                        changed += (f != leaf.outputs[i]) as u64;
                    }
                }
                for side in 0..2 {
                    if n[side] == 0 {
                        continue;
                    }
                    let majority = 2 * ones[side] > n[side];
                    let correct = |v: bool| if v { ones[side] } else { n[side] - ones[side] } as i64;
                    match scorer {
                        Scorer::Hamming => {
                            let decisive = counts_as_change(ones[side], n[side], leaf.exact, z);
                            let value = if decisive { majority } else { leaf.current };
                            if value != leaf.current {
                                score += n[side] as i64;
                            }
                        }
                        Scorer::ErrorReduction => {
                            score += correct(majority) - correct(leaf.current);
                        }
                        Scorer::Random => {}
                    }
                }
            }
            CandidateScore {
                var,
                score: score as f64,
                influence: if pairs == 0 { 0.0 } else { changed as f64 / pairs as f64 },
            }
        })
        .collect()
}

/// Highest score, then highest influence, then lowest variable index.
pub fn pick(scores: &[CandidateScore]) -> Option<usize> {
    let mut best: Option<&CandidateScore> = None;
    for s in scores {
        let better = match best {
            None => true,
            Some(b) => (s.score, s.influence) > (b.score, b.influence)
                || ((s.score, s.influence) == (b.score, b.influence) && s.var < b.var),
        };
        if better {
            best = Some(s);
        }
    }
    best.map(|s| s.var)
}

pub fn pick_random(candidates: &[usize], stream: &RngStream) -> usize {
    candidates[stream.rng().gen_range(0..candidates.len())]
}
