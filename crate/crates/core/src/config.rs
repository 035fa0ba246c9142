// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::SampleBudget;

/// How the next expansion variable of a cluster is scored.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scorer {
    /// Hamming distance between the current and the provisionally
    /// expanded predictions on the probe set.
    Hamming,
    /// Reduction in prediction errors against the oracle on the probes.
    ErrorReduction,
    /// Uniformly random candidate; used for ablations.
    Random,
}

impl std::str::FromStr for Scorer {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hamming" => Ok(Scorer::Hamming),
            "error-reduction" => Ok(Scorer::ErrorReduction),
            "random" => Ok(Scorer::Random),
            _ => Err(Error::Config(format!("unknown scorer {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnConfig {
    pub seed: u64,
    pub max_clusters: usize,
    /// Most undecided leaves a cluster may hold after an expansion.
    pub width_cap: usize,
    pub spec_samples: u64,
    pub spec_samples_cap: u64,
    pub ordering_samples: u64,
    pub merge_samples: u64,
    pub max_probes: Option<u64>,
    /// Enumerate every input instead of sampling when `2^n` is at most this.
    pub exhaustive_cap: u64,
    pub epsilon: f64,
    pub scorer: Scorer,
    pub merging: bool,
    /// Hash-cons nodes while learning. Off grows a plain decision tree.
    pub sharing: bool,
    pub complexity_samples: u64,
    pub complexity_floor: u64,
    /// Error level used for the reported merge risk bound.
    pub merge_delta: f64,
    /// A sampled child majority counts only beyond this many standard
    /// deviations from an even split.
    pub significance_z: f64,
    /// Known points two leaves must share before a table-backed merge.
    pub min_merge_overlap: usize,
    pub accuracy_samples: u64,
    /// Inputs used to track accuracy layer by layer.
    pub monitor_samples: u64,
}

impl Default for LearnConfig {
    fn default() -> Self {
        LearnConfig {
            seed: 0,
            max_clusters: 10,
            width_cap: 10_000,
            spec_samples: 10_000,
            spec_samples_cap: 1_000_000,
            ordering_samples: 400,
            merge_samples: 10_000,
            max_probes: None,
            exhaustive_cap: 1 << 20,
            epsilon: 1e-4,
            scorer: Scorer::Hamming,
            merging: true,
            sharing: true,
            complexity_samples: 10_000,
            complexity_floor: 16,
            merge_delta: 0.01,
            significance_z: 3.0,
            min_merge_overlap: 1,
            accuracy_samples: 10_000,
            monitor_samples: 1_000,
        }
    }
}

impl LearnConfig {
    pub fn budget(&self) -> SampleBudget {
        SampleBudget {
            max_probes: self.max_probes,
            ordering_samples: self.ordering_samples,
            merge_samples: self.merge_samples,
            spec_samples: self.spec_samples,
            spec_samples_cap: self.spec_samples_cap,
        }
    }

    /// Every count at least 1 and `epsilon` in `[0, 1)`.
    pub fn validate(&self) -> Result<()> {
        self.budget().validate()?;
        let counts = [
            ("max_clusters", self.max_clusters as u64),
            ("width_cap", self.width_cap as u64),
            ("exhaustive_cap", self.exhaustive_cap),
            ("complexity_samples", self.complexity_samples),
            ("complexity_floor", self.complexity_floor),
            ("min_merge_overlap", self.min_merge_overlap as u64),
            ("accuracy_samples", self.accuracy_samples),
            ("monitor_samples", self.monitor_samples),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        if !(0.0..1.0).contains(&self.epsilon) {
            return Err(Error::Config(format!(
                "epsilon must be in [0, 1), got {}",
                self.epsilon
            )));
        }
        if !(self.merge_delta > 0.0 && self.merge_delta.is_finite()) {
            return Err(Error::Config("merge_delta must be positive".into()));
        }
        if !(self.significance_z >= 0.0 && self.significance_z.is_finite()) {
            return Err(Error::Config("significance_z must be non-negative".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let c = LearnConfig::default();
        c.validate().unwrap();
        assert_eq!((c.max_clusters, c.width_cap, c.spec_samples_cap), (10, 10_000, 1_000_000));
    }

    #[test]
    fn rejects_bad_values() {
        let bad = [
            LearnConfig { epsilon: 1.0, ..Default::default() },
            LearnConfig { epsilon: -0.1, ..Default::default() },
            LearnConfig { width_cap: 0, ..Default::default() },
            LearnConfig { spec_samples: 0, ..Default::default() },
            LearnConfig { max_probes: Some(10), ..Default::default() },
            LearnConfig { merge_delta: 0.0, ..Default::default() },
        ];
        for c in bad {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }

    #[test]
    fn round_trips_through_json() {
        let c = LearnConfig { scorer: Scorer::ErrorReduction, seed: 9, ..Default::default() };
        let s = serde_json::to_string(&c).unwrap();
        assert!(s.contains("\"error-reduction\""));
        assert_eq!(serde_json::from_str::<LearnConfig>(&s).unwrap(), c);
    }
}
