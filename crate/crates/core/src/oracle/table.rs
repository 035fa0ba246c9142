// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use super::{Oracle, OracleKind};
use crate::bits::BitVec;
use crate::error::{Error, Result};
use crate::ios::{Provenance, SampleSet};

/// Oracle answering from a finite table. Queries outside the table fail
/// with [`Error::AbsentQuery`].
#[derive(Clone, Debug)]
pub struct TableOracle {
    n: usize,
    m: usize,
    rows: BTreeMap<BitVec, BitVec>,
    name: String,
}

impl TableOracle {
    pub fn new(n: usize, m: usize, rows: BTreeMap<BitVec, BitVec>) -> Self {
        TableOracle {
            n,
            m,
            rows,
            name: "table".into(),
        }
    }

    pub fn from_samples(set: &SampleSet) -> Result<Self> {
        Ok(Self::new(set.inputs(), set.outputs(), set.to_table()?))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let set = SampleSet::read_ios(path, Provenance::Given)?;
        let mut t = Self::from_samples(&set)?;
        t.name = format!("table:{}", path.display());
        Ok(t)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

impl Oracle for TableOracle {
    fn inputs(&self) -> usize {
        self.n
    }

    fn outputs(&self) -> usize {
        self.m
    }

    fn kind(&self) -> OracleKind {
        OracleKind::TruthTableFile
    }

    fn eval(&self, input: &BitVec) -> Result<BitVec> {
        self.rows
            .get(input)
            .cloned()
            .ok_or_else(|| Error::AbsentQuery(input.clone()))
    }

    fn rows(&self) -> Option<&BTreeMap<BitVec, BitVec>> {
        Some(&self.rows)
    }

    fn describe(&self) -> String {
        self.name.clone()
    }
}

/// An oracle with extra rows laid over it. Extra rows win on overlap.
/// When the base is table-backed the overlay exposes the merged table.
pub struct OverlayOracle {
    base: Arc<dyn Oracle>,
    extra: BTreeMap<BitVec, BitVec>,
    merged: Option<BTreeMap<BitVec, BitVec>>,
}

impl OverlayOracle {
    pub fn new(base: Arc<dyn Oracle>, extra: BTreeMap<BitVec, BitVec>) -> Self {
        let merged = base.rows().map(|rows| {
            let mut all = rows.clone();
            all.extend(extra.iter().map(|(k, v)| (k.clone(), v.clone())));
            all
        });
        OverlayOracle {
            base,
            extra,
            merged,
        }
    }
}

impl Oracle for OverlayOracle {
    fn inputs(&self) -> usize {
        self.base.inputs()
    }

    fn outputs(&self) -> usize {
        self.base.outputs()
    }

    fn kind(&self) -> OracleKind {
        self.base.kind()
    }

    fn eval(&self, input: &BitVec) -> Result<BitVec> {
        match self.extra.get(input) {
            Some(y) => Ok(y.clone()),
            None => self.base.eval(input),
        }
    }

    fn eval_batch(&self, inputs: &[BitVec]) -> Result<Vec<BitVec>> {
        let misses: Vec<BitVec> = inputs
            .iter()
            .filter(|x| !self.extra.contains_key(*x))
            .cloned()
            .collect();
        let mut answered = self.base.eval_batch(&misses)?.into_iter();
        Ok(inputs
            .iter()
            .map(|x| match self.extra.get(x) {
                Some(y) => y.clone(),
                None => answered.next().expect("aligned batch"),
            })
            .collect())
    }

    fn rows(&self) -> Option<&BTreeMap<BitVec, BitVec>> {
        self.merged.as_ref()
    }

    fn describe(&self) -> String {
        format!("{}+{}", self.base.describe(), self.extra.len())
    }
}
