// SPDX-License-Identifier: Apache-2.0

//! Black-box access to the circuit being learned.
//!
//! Every query goes through an [`OracleHandle`], which checks widths,
//! counts probes and enforces an optional probe budget. Concrete oracles
//! are the builtin reference circuits, truth tables loaded from `.ios`
//! files, and external processes speaking a line protocol.

mod builtin;
mod external;
mod sequential;
mod table;

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::bits::BitVec;
use crate::error::{Error, Result};
use crate::ios::SampleSet;

pub use builtin::{builtin, Builtin, MiniAluOp};
pub use external::ExternalOracle;
pub use sequential::{wrap_sequential, Counter, SequentialCircuit, SequentialWrapper};
pub use table::{OverlayOracle, TableOracle};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleKind {
    Builtin,
    TruthTableFile,
    ExternalProcess,
}

pub trait Oracle: Send + Sync {
    fn inputs(&self) -> usize;
    fn outputs(&self) -> usize;
    fn kind(&self) -> OracleKind;

    /// Output for one input of the declared width.
    fn eval(&self, input: &BitVec) -> Result<BitVec>;

    fn eval_batch(&self, inputs: &[BitVec]) -> Result<Vec<BitVec>> {
        inputs.iter().map(|x| self.eval(x)).collect()
    }

    /// The finite table behind the oracle, if there is one.
    fn rows(&self) -> Option<&BTreeMap<BitVec, BitVec>> {
        None
    }

    fn describe(&self) -> String;
}

/// Shared, budgeted access to an oracle. Clones share the probe counter.
#[derive(Clone)]
pub struct OracleHandle {
    inner: Arc<dyn Oracle>,
    probes: Arc<AtomicU64>,
    budget: Option<u64>,
}

impl std::fmt::Debug for OracleHandle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OracleHandle")
            .field("oracle", &self.inner.describe())
            .field("probes", &self.probes_used())
            .field("budget", &self.budget)
            .finish()
    }
}

impl OracleHandle {
    pub fn new(oracle: impl Oracle + 'static) -> Self {
        Self::from_arc(Arc::new(oracle))
    }

    pub fn from_arc(inner: Arc<dyn Oracle>) -> Self {
        OracleHandle {
            inner,
            probes: Arc::new(AtomicU64::new(0)),
            budget: None,
        }
    }

    /// Handle with its own probe counter and the given limit.
    pub fn with_budget(&self, max_probes: Option<u64>) -> Self {
        OracleHandle {
            inner: self.inner.clone(),
            probes: Arc::new(AtomicU64::new(0)),
            budget: max_probes,
        }
    }

    pub fn inner(&self) -> &Arc<dyn Oracle> {
        &self.inner
    }

    pub fn inputs(&self) -> usize {
        self.inner.inputs()
    }

    pub fn outputs(&self) -> usize {
        self.inner.outputs()
    }

    pub fn kind(&self) -> OracleKind {
        self.inner.kind()
    }

    pub fn describe(&self) -> String {
        self.inner.describe()
    }

    pub fn rows(&self) -> Option<&BTreeMap<BitVec, BitVec>> {
        self.inner.rows()
    }

    /// True for table-backed oracles that do not cover every input.
    pub fn is_partial(&self) -> bool {
        match self.rows() {
            None => false,
            Some(rows) => self.inputs() >= 64 || (rows.len() as u64) < (1u64 << self.inputs()),
        }
    }

    pub fn probes_used(&self) -> u64 {
        self.probes.load(Ordering::SeqCst)
    }

    pub fn budget(&self) -> Option<u64> {
        self.budget
    }

    pub fn remaining(&self) -> Option<u64> {
        self.budget
            .map(|b| b.saturating_sub(self.probes_used()))
    }

    /// Fails unless `count` more probes fit in the budget.
    pub fn ensure_available(&self, count: u64) -> Result<()> {
        if let Some(limit) = self.budget {
            let used = self.probes_used();
            if used + count > limit {
                return Err(Error::Budget {
                    requested: count,
                    used,
                    limit,
                });
            }
        }
        Ok(())
    }

    fn charge(&self, count: u64) -> Result<()> {
        match self.budget {
            None => {
                self.probes.fetch_add(count, Ordering::SeqCst);
                Ok(())
            }
            Some(limit) => self
                .probes
                .fetch_update(Ordering::SeqCst, Ordering::SeqCst, |used| {
                    (used + count <= limit).then_some(used + count)
                })
                .map(|_| ())
                .map_err(|used| Error::Budget {
                    requested: count,
                    used,
                    limit,
                }),
        }
    }

    fn check_widths(&self, inputs: &[BitVec]) -> Result<()> {
        let n = self.inputs();
        for x in inputs {
            if x.width() != n {
                return Err(Error::InputShape {
                    expected: n,
                    got: x.width(),
                });
            }
        }
        Ok(())
    }

    /// Batched query; outputs are positionally aligned with `inputs`.
    pub fn query(&self, inputs: &[BitVec]) -> Result<Vec<BitVec>> {
        self.check_widths(inputs)?;
        self.charge(inputs.len() as u64)?;
        let out = self.inner.eval_batch(inputs)?;
        debug_assert!(out.iter().all(|y| y.width() == self.outputs()));
        Ok(out)
    }

    pub fn query_one(&self, input: &BitVec) -> Result<BitVec> {
        Ok(self.query(std::slice::from_ref(input))?.pop().expect("one output"))
    }

    /// Like [`OracleHandle::query`] but maps table misses to `None`.
    pub fn try_query(&self, inputs: &[BitVec]) -> Result<Vec<Option<BitVec>>> {
        self.check_widths(inputs)?;
        self.charge(inputs.len() as u64)?;
        if self.inner.rows().is_none() {
            return Ok(self.inner.eval_batch(inputs)?.into_iter().map(Some).collect());
        }
        inputs
            .iter()
            .map(|x| match self.inner.eval(x) {
                Ok(y) => Ok(Some(y)),
                Err(Error::AbsentQuery(_)) => Ok(None),
                Err(e) => Err(e),
            })
            .collect()
    }

    /// Table oracle answering exactly the samples in `set`.
    pub fn from_samples(set: &SampleSet) -> Result<Self> {
        Ok(Self::new(TableOracle::from_samples(set)?))
    }
}

/// Wrapper that remembers every answer and fails if an input is ever
/// answered differently. Used to validate oracles in tests.
pub struct DeterminismCheck<O> {
    inner: O,
    memo: Mutex<BTreeMap<BitVec, BitVec>>,
}

impl<O: Oracle> DeterminismCheck<O> {
    pub fn new(inner: O) -> Self {
        DeterminismCheck {
            inner,
            memo: Mutex::new(BTreeMap::new()),
        }
    }
}

impl<O: Oracle> Oracle for DeterminismCheck<O> {
    fn inputs(&self) -> usize {
        self.inner.inputs()
    }
    fn outputs(&self) -> usize {
        self.inner.outputs()
    }
    fn kind(&self) -> OracleKind {
        self.inner.kind()
    }
    fn eval(&self, input: &BitVec) -> Result<BitVec> {
        let y = self.inner.eval(input)?;
        let mut memo = self.memo.lock().expect("memo lock");
        if let Some(prev) = memo.insert(input.clone(), y.clone()) {
            if prev != y {
                return Err(Error::Protocol {
                    line: input.to_string(),
                    reason: format!("non-deterministic oracle: {prev} then {y}"),
                });
            }
        }
        Ok(y)
    }
    fn rows(&self) -> Option<&BTreeMap<BitVec, BitVec>> {
        self.inner.rows()
    }
    fn describe(&self) -> String {
        self.inner.describe()
    }
}

/// Per-purpose sampling counts and the overall probe limit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleBudget {
    pub max_probes: Option<u64>,
    pub ordering_samples: u64,
    pub merge_samples: u64,
    pub spec_samples: u64,
    pub spec_samples_cap: u64,
}

impl Default for SampleBudget {
    fn default() -> Self {
        SampleBudget {
            max_probes: None,
            ordering_samples: 400,
            merge_samples: 10_000,
            spec_samples: 10_000,
            spec_samples_cap: 1_000_000,
        }
    }
}

impl SampleBudget {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("ordering_samples", self.ordering_samples),
            ("merge_samples", self.merge_samples),
            ("spec_samples", self.spec_samples),
            ("spec_samples_cap", self.spec_samples_cap),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        if self.spec_samples > self.spec_samples_cap {
            return Err(Error::Config(format!(
                "spec_samples {} exceeds the per-node cap {}",
                self.spec_samples, self.spec_samples_cap
            )));
        }
        if self.merge_samples > self.spec_samples_cap {
            return Err(Error::Config(format!(
                "merge_samples {} exceeds the per-node cap {}",
                self.merge_samples, self.spec_samples_cap
            )));
        }
        if let Some(max) = self.max_probes {
            if max == 0 {
                return Err(Error::Config("max_probes must be at least 1".into()));
            }
            for (name, v) in &counts[..3] {
                if *v > max {
                    return Err(Error::Config(format!(
                        "{name} {v} exceeds max_probes {max}"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> BitVec {
        BitVec::parse(s).unwrap()
    }

    #[test]
    fn budget_is_enforced_and_monotone() {
        let h = builtin("parity:4").unwrap().with_budget(Some(5));
        h.query(&[bits("1011"), bits("0000")]).unwrap();
        assert_eq!(h.probes_used(), 2);
        let err = h
            .query(&[bits("1011"), bits("0000"), bits("1111"), bits("0001")])
            .unwrap_err();
        assert!(matches!(err, Error::Budget { requested: 4, used: 2, limit: 5 }));
        assert_eq!(h.probes_used(), 2);
        h.query(&vec![bits("1011"); 3]).unwrap();
        assert_eq!(h.remaining(), Some(0));
    }

    #[test]
    fn query_rejects_wrong_width() {
        let h = builtin("parity:4").unwrap();
        assert!(matches!(
            h.query(&[bits("101")]),
            Err(Error::InputShape { expected: 4, got: 3 })
        ));
        assert_eq!(h.probes_used(), 0);
    }

    #[test]
    fn repeated_batches_are_identical() {
        let h = OracleHandle::new(DeterminismCheck::new(Builtin::parse("adder:4").unwrap()));
        let batch: Vec<BitVec> = (0..256u128).map(|x| BitVec::from_u128(x, 8)).collect();
        let a = h.query(&batch).unwrap();
        let b = h.query(&batch).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn budget_validation() {
        let mut b = SampleBudget::default();
        b.validate().unwrap();
        b.max_probes = Some(100);
        assert!(b.validate().is_err());
        b = SampleBudget {
            spec_samples: 2_000_000,
            ..SampleBudget::default()
        };
        assert!(b.validate().is_err());
    }
}
