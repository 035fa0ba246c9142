// SPDX-License-Identifier: Apache-2.0

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::netlist::Netlist;
use crate::bits::BitVec;
use crate::bsd::Bsd;
use crate::error::{Error, Result};
use crate::ios::{Provenance, SampleSet};
use crate::oracle::OracleHandle;
use crate::sampling::{enumerate_input, random_input, RngStream};

/// Anything that maps an input to an output vector.
pub trait Evaluate: Sync {
    fn inputs(&self) -> usize;
    fn outputs(&self) -> usize;
    fn eval(&self, input: &BitVec) -> Result<BitVec>;
}

impl Evaluate for Bsd {
    fn inputs(&self) -> usize {
        Bsd::inputs(self)
    }

    fn outputs(&self) -> usize {
        Bsd::outputs(self)
    }

    fn eval(&self, input: &BitVec) -> Result<BitVec> {
        self.evaluate(input)
    }
}

impl Evaluate for Netlist {
    fn inputs(&self) -> usize {
        self.inputs
    }

    fn outputs(&self) -> usize {
        self.outputs
    }

    fn eval(&self, input: &BitVec) -> Result<BitVec> {
        self.evaluate(input)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckMode {
    /// Every input; refused when `2^n` is above the cap.
    Exhaustive,
    /// This many uniform random inputs.
    Sampled(u64),
    /// Every row of a table oracle.
    Table,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mismatch {
    pub input: BitVec,
    pub expected: BitVec,
    pub got: BitVec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceVerdict {
    pub mode: CheckMode,
    pub inputs_checked: u64,
    /// Inputs where every output bit matched.
    pub inputs_correct: u64,
    /// Correct predictions per output bit.
    pub correct: Vec<u64>,
    pub per_bit: Vec<f64>,
    pub aggregate: f64,
    /// 95% half-width of `aggregate` in sampled mode, else 0.
    pub half_width: f64,
    /// First mismatching input in enumeration order.
    pub counterexample: Option<Mismatch>,
}

impl EquivalenceVerdict {
    pub fn is_equivalent(&self) -> bool {
        self.counterexample.is_none()
    }
}

struct Tally {
    correct: Vec<u64>,
    inputs_correct: u64,
    first: Option<Mismatch>,
}

impl Tally {
    fn new(m: usize) -> Self {
        Tally {
            correct: vec![0; m],
            inputs_correct: 0,
            first: None,
        }
    }

    fn add(mut self, other: Tally) -> Tally {
        for (a, b) in self.correct.iter_mut().zip(other.correct) {
            *a += b;
        }
        self.inputs_correct += other.inputs_correct;
        self.first = self.first.or(other.first);
        self
    }
}

fn tally(design: &dyn Evaluate, xs: &[BitVec], ys: &[BitVec]) -> Result<Tally> {
    let mut t = Tally::new(design.outputs());
    for (x, y) in xs.iter().zip(ys) {
        let got = design.eval(x)?;
        for (j, c) in t.correct.iter_mut().enumerate() {
            *c += (got.get(j) == y.get(j)) as u64;
        }
        if &got == y {
            t.inputs_correct += 1;
        } else if t.first.is_none() {
            t.first = Some(Mismatch {
                input: x.clone(),
                expected: y.clone(),
                got,
            });
        }
    }
    Ok(t)
}

const CHUNK: u64 = 4096;

fn inputs_for(oracle: &OracleHandle, mode: CheckMode, exhaustive_cap: u64, stream: &RngStream) -> Result<Vec<Vec<BitVec>>> {
    let n = oracle.inputs();
    match mode {
        CheckMode::Table => {
            let rows = oracle
                .rows()
                .ok_or_else(|| Error::Config("table mode needs a table oracle".into()))?;
            let xs: Vec<BitVec> = rows.keys().cloned().collect();
            Ok(xs.chunks(CHUNK as usize).map(<[BitVec]>::to_vec).collect())
        }
        CheckMode::Exhaustive => {
            if n >= 64 || (1u64 << n) > exhaustive_cap {
                return Err(Error::CapExceeded { n, cap: exhaustive_cap });
            }
            let total = 1u64 << n;
            let free: Vec<usize> = (0..n).collect();
            let base = BitVec::zeros(n);
            Ok((0..total.div_ceil(CHUNK))
                .map(|c| {
                    (c * CHUNK..((c + 1) * CHUNK).min(total))
                        .map(|i| enumerate_input(&base, &free, i))
                        .collect()
                })
                .collect())
        }
        CheckMode::Sampled(count) => {
            let mut rng = stream.rng();
            let xs: Vec<BitVec> = (0..count).map(|_| random_input(n, &mut rng)).collect();
            Ok(xs.chunks(CHUNK as usize).map(<[BitVec]>::to_vec).collect())
        }
    }
}

/// Compares `design` with `oracle` on the inputs selected by `mode`.
pub fn check_equivalence(
    design: &dyn Evaluate,
    oracle: &OracleHandle,
    mode: CheckMode,
    exhaustive_cap: u64,
    stream: &RngStream,
) -> Result<EquivalenceVerdict> {
    if design.inputs() != oracle.inputs() || design.outputs() != oracle.outputs() {
        return Err(Error::InputShape {
            expected: oracle.inputs(),
            got: design.inputs(),
        });
    }
    let chunks = inputs_for(oracle, mode, exhaustive_cap, stream)?;
    let checked: u64 = chunks.iter().map(|c| c.len() as u64).sum();
    let parts: Vec<Tally> = chunks
        .par_iter()
        .map(|xs| {
            let ys = oracle.query(xs)?;
            tally(design, xs, &ys)
        })
        .collect::<Result<_>>()?;
    let t = parts
        .into_iter()
        .fold(Tally::new(design.outputs()), Tally::add);
    let total = checked.max(1) as f64;
    let per_bit: Vec<f64> = t.correct.iter().map(|&c| c as f64 / total).collect();
    let aggregate = per_bit.iter().sum::<f64>() / per_bit.len() as f64;
    let half_width = match mode {
        CheckMode::Sampled(_) => 1.96 * (aggregate * (1.0 - aggregate) / total).sqrt(),
        _ => 0.0,
    };
    Ok(EquivalenceVerdict {
        mode,
        inputs_checked: checked,
        inputs_correct: t.inputs_correct,
        correct: t.correct,
        per_bit,
        aggregate,
        half_width,
        counterexample: t.first,
    })
}

/// Up to `limit` mismatching inputs, most wrong output bits first, ties in
/// enumeration order.
pub fn counterexamples(
    design: &dyn Evaluate,
    oracle: &OracleHandle,
    mode: CheckMode,
    exhaustive_cap: u64,
    stream: &RngStream,
    limit: usize,
) -> Result<SampleSet> {
    let chunks = inputs_for(oracle, mode, exhaustive_cap, stream)?;
    let found: Vec<Vec<(usize, Mismatch)>> = chunks
        .par_iter()
        .map(|xs| -> Result<_> {
            let ys = oracle.query(xs)?;
            let mut out = Vec::new();
            for (x, y) in xs.iter().zip(ys) {
                let got = design.eval(x)?;
                if got != y {
                    out.push((got.hamming(&y), Mismatch {
                        input: x.clone(),
                        expected: y,
                        got,
                    }));
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut all: Vec<(usize, Mismatch)> = found.into_iter().flatten().collect();
    // stable: equal distances keep enumeration order
    all.sort_by_key(|m| std::cmp::Reverse(m.0));
    let mut set = SampleSet::new(oracle.inputs(), oracle.outputs());
    for (_, m) in all.into_iter().take(limit) {
        set.push(m.input, m.expected, Provenance::Counterexample)?;
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::builtin;

    fn parity_diagram(n: usize) -> Bsd {
        let mut d = Bsd::new(n, 1);
        let (mut even, mut odd) = (d.terminal(false), d.terminal(true));
        for v in (0..n).rev() {
            let e = d.mk(v, even, odd);
            let o = d.mk(v, odd, even);
            even = e;
            odd = o;
        }
        d.set_root(0, even);
        d
    }

    #[test]
    fn parity_is_equivalent_and_mutant_is_caught() {
        let h = builtin("parity:5").unwrap();
        let d = parity_diagram(5);
        let s = RngStream::new(0, "v", &[]);
        let v = check_equivalence(&d, &h, CheckMode::Exhaustive, 1 << 20, &s).unwrap();
        assert!(v.is_equivalent());
        assert_eq!(v.inputs_checked, 32);
        assert_eq!(v.aggregate, 1.0);

        let mut bad = parity_diagram(5);
        let t = bad.terminal(true);
        let r = bad.root(0);
        let wrong = bad.mk(0, r, t);
        bad.set_root(0, wrong);
        let v = check_equivalence(&bad, &h, CheckMode::Exhaustive, 1 << 20, &s).unwrap();
        let cx = v.counterexample.unwrap();
        assert_eq!(h.query_one(&cx.input).unwrap(), cx.expected);
        assert_ne!(cx.expected, cx.got);
        let set = counterexamples(&bad, &h, CheckMode::Exhaustive, 1 << 20, &s, 3).unwrap();
        assert_eq!(set.len(), 3);
    }

    #[test]
    fn exhaustive_respects_cap() {
        let h = builtin("parity:5").unwrap();
        let d = parity_diagram(5);
        let s = RngStream::new(0, "v", &[]);
        assert!(matches!(
            check_equivalence(&d, &h, CheckMode::Exhaustive, 16, &s),
            Err(Error::CapExceeded { .. })
        ));
        let v = check_equivalence(&d, &h, CheckMode::Sampled(100), 16, &s).unwrap();
        assert_eq!((v.inputs_checked, v.half_width), (100, 0.0));
    }
}
