// SPDX-License-Identifier: Apache-2.0

//! Input/output samples and the `.ios` text format.
//!
//! ```text
//! inputs=2 outputs=1
//! # x0 x1 -> x0 | x1
//! 00 0
//! 01 1
//! ```
//!
//! The first line is the header. Every other non-empty line holds an input
//! string and an output string separated by exactly one space, where
//! character `i` is bit `i`. `#` starts a comment that runs to the end of
//! the line. Lines end in LF; a CR is rejected.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bits::BitVec;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Given,
    Random,
    Counterexample,
}

impl Provenance {
    /// Given and counterexample samples are binding on the learner.
    pub fn is_mandatory(self) -> bool {
        !matches!(self, Provenance::Random)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IoSample {
    pub input: BitVec,
    pub output: BitVec,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSet {
    n: usize,
    m: usize,
    samples: Vec<IoSample>,
}

impl SampleSet {
    pub fn new(n: usize, m: usize) -> Self {
        SampleSet {
            n,
            m,
            samples: Vec::new(),
        }
    }

    pub fn inputs(&self) -> usize {
        self.n
    }

    pub fn outputs(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, IoSample> {
        self.samples.iter()
    }

    pub fn samples(&self) -> &[IoSample] {
        &self.samples
    }

    pub fn push(&mut self, input: BitVec, output: BitVec, provenance: Provenance) -> Result<()> {
        if input.width() != self.n {
            return Err(Error::InputShape {
                expected: self.n,
                got: input.width(),
            });
        }
        if output.width() != self.m {
            return Err(Error::InputShape {
                expected: self.m,
                got: output.width(),
            });
        }
        self.samples.push(IoSample {
            input,
            output,
            provenance,
        });
        Ok(())
    }

    /// Appends every sample of `other`; widths must match.
    pub fn extend(&mut self, other: &SampleSet) -> Result<()> {
        for s in other.iter() {
            self.push(s.input.clone(), s.output.clone(), s.provenance)?;
        }
        Ok(())
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        for s in &mut self.samples {
            s.provenance = provenance;
        }
        self
    }

    /// Drops random samples, keeping the ones the learner must honor.
    pub fn mandatory(&self) -> SampleSet {
        SampleSet {
            n: self.n,
            m: self.m,
            samples: self
                .samples
                .iter()
                .filter(|s| s.provenance.is_mandatory())
                .cloned()
                .collect(),
        }
    }

    /// Distinct inputs mapped to their outputs; contradictory duplicates
    /// are an error.
    pub fn to_table(&self) -> Result<BTreeMap<BitVec, BitVec>> {
        let mut table = BTreeMap::new();
        for s in &self.samples {
            if let Some(prev) = table.insert(s.input.clone(), s.output.clone()) {
                if prev != s.output {
                    return Err(Error::Inconsistent {
                        input: s.input.clone(),
                        given: prev,
                        oracle: s.output.clone(),
                    });
                }
            }
        }
        Ok(table)
    }

    /// Parses `.ios` text. Contradictory duplicate lines are rejected.
    pub fn parse_ios(text: &str, provenance: Provenance) -> Result<SampleSet> {
        let err = |line: usize, msg: String| Error::Parse { line, msg };
        let mut lines = text.split('\n').enumerate();
        let (n, m) = loop {
            let Some((i, raw)) = lines.next() else {
                return Err(err(1, "missing header".into()));
            };
            if raw.contains('\r') {
                return Err(err(i + 1, "CR line endings are not accepted".into()));
            }
            if i == 0 {
                break parse_header(raw).map_err(|msg| err(1, msg))?;
            }
        };
        let mut set = SampleSet::new(n, m);
        let mut seen: BTreeMap<BitVec, (BitVec, usize)> = BTreeMap::new();
        for (i, raw) in lines {
            let lineno = i + 1;
            if raw.contains('\r') {
                return Err(err(lineno, "CR line endings are not accepted".into()));
            }
            let body = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            };
            let body = body.trim_end_matches(' ');
            if body.is_empty() {
                continue;
            }
            let (inp, out) = body
                .split_once(' ')
                .ok_or_else(|| err(lineno, "expected `<inputs> <outputs>`".into()))?;
            if out.contains(' ') || inp.is_empty() {
                return Err(err(lineno, "fields must be separated by exactly one space".into()));
            }
            let input = BitVec::parse(inp).map_err(|e| err(lineno, e.to_string()))?;
            let output = BitVec::parse(out).map_err(|e| err(lineno, e.to_string()))?;
            if input.width() != n || output.width() != m {
                return Err(err(
                    lineno,
                    format!(
                        "expected {n} input and {m} output bits, found {} and {}",
                        input.width(),
                        output.width()
                    ),
                ));
            }
            if let Some((prev, at)) = seen.get(&input) {
                if *prev != output {
                    return Err(err(
                        lineno,
                        format!("input {input} contradicts line {at}: {prev} vs {output}"),
                    ));
                }
            } else {
                seen.insert(input.clone(), (output.clone(), lineno));
            }
            set.push(input, output, provenance)?;
        }
        Ok(set)
    }

    pub fn read_ios(path: &Path, provenance: Provenance) -> Result<SampleSet> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_ios(&text, provenance)
    }

    pub fn to_ios(&self) -> String {
        let mut out = format!("{}\n", ios_header(self.n, self.m));
        for s in &self.samples {
            out.push_str(&ios_line(&s.input, &s.output));
            out.push('\n');
        }
        out
    }

    pub fn write_ios(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_ios())?;
        Ok(())
    }
}

impl<'a> IntoIterator for &'a SampleSet {
    type Item = &'a IoSample;
    type IntoIter = std::slice::Iter<'a, IoSample>;
    fn into_iter(self) -> Self::IntoIter {
        self.samples.iter()
    }
}

pub fn ios_header(n: usize, m: usize) -> String {
    format!("inputs={n} outputs={m}")
}

/// One `.ios` data line (no trailing newline).
pub fn ios_line(input: &BitVec, output: &BitVec) -> String {
    let mut s = String::with_capacity(input.width() + output.width() + 1);
    let _ = write!(s, "{input} {output}");
    s
}

fn parse_header(line: &str) -> std::result::Result<(usize, usize), String> {
    let body = match line.find('#') {
        Some(p) => &line[..p],
        None => line,
    };
    let mut parts = body.split_whitespace();
    let mut field = |name: &str| -> std::result::Result<usize, String> {
        let tok = parts.next().ok_or_else(|| format!("header missing `{name}=`"))?;
        let value = tok
            .strip_prefix(name)
            .and_then(|t| t.strip_prefix('='))
            .ok_or_else(|| format!("expected `{name}=<count>`, found {tok:?}"))?;
        let v: usize = value
            .parse()
            .map_err(|_| format!("bad {name} count {value:?}"))?;
        if v == 0 {
            return Err(format!("{name} must be at least 1"));
        }
        Ok(v)
    };
    let n = field("inputs")?;
    let m = field("outputs")?;
    if parts.next().is_some() {
        return Err("trailing tokens in header".into());
    }
    Ok((n, m))
}
