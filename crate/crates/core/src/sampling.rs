// SPDX-License-Identifier: Apache-2.0

//! Seeded sampling, path-conditioned draws and accuracy estimation.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::BitVec;
use crate::bsd::Bsd;
use crate::error::{Error, Result};
use crate::ios::{Provenance, SampleSet};
use crate::oracle::OracleHandle;

/// Input bits fixed by the decisions on a root-to-node path, in the order
/// the decisions were taken.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PathAssignment {
    fixed: Vec<(u32, bool)>,
}

impl PathAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: &[(usize, bool)]) -> Result<Self> {
        let mut p = Self::new();
        for &(v, b) in pairs {
            p = p.with(v, b)?;
        }
        Ok(p)
    }

    /// This path extended by one decision. Fails if `var` is already fixed.
    pub fn with(&self, var: usize, value: bool) -> Result<Self> {
        if self.contains(var) {
            return Err(Error::Domain(format!("variable {var} already on the path")));
        }
        let mut fixed = self.fixed.clone();
        fixed.push((var as u32, value));
        Ok(PathAssignment { fixed })
    }

    pub fn len(&self) -> usize {
        self.fixed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fixed.is_empty()
    }

    pub fn contains(&self, var: usize) -> bool {
        self.get(var).is_some()
    }

    pub fn get(&self, var: usize) -> Option<bool> {
        self.fixed
            .iter()
            .find(|(v, _)| *v as usize == var)
            .map(|(_, b)| *b)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, bool)> + '_ {
        self.fixed.iter().map(|&(v, b)| (v as usize, b))
    }

    /// Unfixed variables of an `n`-bit input, ascending.
    pub fn free_vars(&self, n: usize) -> Vec<usize> {
        let mut pinned = vec![false; n];
        for (v, _) in self.iter() {
            pinned[v] = true;
        }
        (0..n).filter(|&i| !pinned[i]).collect()
    }

    pub fn pin(&self, x: &mut BitVec) {
        for (v, b) in self.iter() {
            x.set(v, b);
        }
    }

    pub fn matches(&self, x: &BitVec) -> bool {
        self.iter().all(|(v, b)| x.get(v) == b)
    }

    /// Order-independent digest of the fixed bits.
    pub fn digest(&self) -> u64 {
        let mut pairs = self.fixed.clone();
        pairs.sort_unstable();
        let mut h = FNV_OFFSET;
        for (v, b) in pairs {
            h = fnv(h, ((v as u64) << 1) | b as u64);
        }
        h
    }
}

impl fmt::Display for PathAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (v, b)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "x{v}={}", b as u8)?;
        }
        f.write_str("}")
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;

fn fnv(mut h: u64, word: u64) -> u64 {
    for byte in word.to_le_bytes() {
        h ^= byte as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A reproducible random stream named by a master seed and a key.
///
/// Keys are derived from a purpose tag and integer parts (cluster ids,
/// path digests, layer numbers), never from scheduling order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RngStream {
    pub seed: u64,
    pub key: u64,
}

impl RngStream {
    pub fn new(seed: u64, tag: &str, parts: &[u64]) -> Self {
        RngStream {
            seed,
            key: derive_key(FNV_OFFSET, tag, parts),
        }
    }

    /// A child stream; distinct `(tag, parts)` give independent streams.
    pub fn derive(&self, tag: &str, parts: &[u64]) -> Self {
        RngStream {
            seed: self.seed,
            key: derive_key(self.key, tag, parts),
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(splitmix(self.seed ^ splitmix(self.key)))
    }
}

fn derive_key(mut h: u64, tag: &str, parts: &[u64]) -> u64 {
    for b in tag.bytes() {
        h = fnv(h, b as u64);
    }
    h = fnv(h, 0xff);
    for &p in parts {
        h = fnv(h, p);
    }
    h
}

pub fn random_input(n: usize, rng: &mut impl Rng) -> BitVec {
    let words: Vec<u64> = (0..n.div_ceil(64)).map(|_| rng.gen()).collect();
    BitVec::from_words(n, &words)
}

/// The `index`-th assignment of `free` (bit `j` of `index` goes to
/// `free[j]`) on top of a base input.
pub fn enumerate_input(base: &BitVec, free: &[usize], index: u64) -> BitVec {
    let mut x = base.clone();
    for (j, &v) in free.iter().enumerate() {
        x.set(v, (index >> j) & 1 == 1);
    }
    x
}

/// True when every assignment of `free_count` bits fits in `count` draws.
pub fn is_exhaustive(free_count: usize, count: u64) -> bool {
    free_count < 64 && (1u64 << free_count) <= count
}

/// Inputs with the path bits pinned. Enumerates every assignment of the
/// free bits once when that takes at most `count` inputs; otherwise draws
/// `count` uniform inputs with replacement. The flag reports which.
pub fn conditioned_inputs(
    n: usize,
    path: &PathAssignment,
    count: u64,
    stream: &RngStream,
) -> (Vec<BitVec>, bool) {
    let free = path.free_vars(n);
    let mut base = BitVec::zeros(n);
    path.pin(&mut base);
    if is_exhaustive(free.len(), count) {
        let xs = (0..1u64 << free.len())
            .map(|i| enumerate_input(&base, &free, i))
            .collect();
        return (xs, true);
    }
    let mut rng = stream.rng();
    let xs = (0..count)
        .map(|_| {
            let mut x = random_input(n, &mut rng);
            path.pin(&mut x);
            x
        })
        .collect();
    (xs, false)
}

/// Conditioned draw answered by the oracle.
///
/// For table-backed oracles that do not cover the whole input space the
/// draw is taken from the table rows that agree with the path instead:
/// all of them when there are at most `count`, otherwise `count` of them
/// chosen without replacement.
pub fn draw_conditioned(
    oracle: &OracleHandle,
    path: &PathAssignment,
    count: u64,
    stream: &RngStream,
) -> Result<SampleSet> {
    if count == 0 {
        return Err(Error::Config("draw count must be at least 1".into()));
    }
    let (n, m) = (oracle.inputs(), oracle.outputs());
    for (v, _) in path.iter() {
        if v >= n {
            return Err(Error::Domain(format!("path variable {v} out of range")));
        }
    }
    let mut set = SampleSet::new(n, m);
    if oracle.is_partial() {
        let rows = oracle.rows().expect("partial oracles have rows");
        let mut hits: Vec<(&BitVec, &BitVec)> =
            rows.iter().filter(|(x, _)| path.matches(x)).collect();
        if hits.len() as u64 > count {
            let mut rng = stream.rng();
            let picked = rand::seq::index::sample(&mut rng, hits.len(), count as usize);
            let mut idx: Vec<usize> = picked.into_iter().collect();
            idx.sort_unstable();
            hits = idx.into_iter().map(|i| hits[i]).collect();
        }
        let inputs: Vec<BitVec> = hits.iter().map(|(x, _)| (*x).clone()).collect();
        let outputs = oracle.query(&inputs)?;
        for (x, y) in inputs.into_iter().zip(outputs) {
            set.push(x, y, Provenance::Random)?;
        }
        return Ok(set);
    }
    let (inputs, _) = conditioned_inputs(n, path, count, stream);
    let outputs = oracle.query(&inputs)?;
    for (x, y) in inputs.into_iter().zip(outputs) {
        set.push(x, y, Provenance::Random)?;
    }
    Ok(set)
}

/// Total number of differing bits between two equally shaped sequences.
pub fn hamming(u: &[BitVec], v: &[BitVec]) -> Result<usize> {
    if u.len() != v.len() {
        return Err(Error::InputShape {
            expected: u.len(),
            got: v.len(),
        });
    }
    let mut total = 0;
    for (a, b) in u.iter().zip(v) {
        if a.width() != b.width() {
            return Err(Error::InputShape {
                expected: a.width(),
                got: b.width(),
            });
        }
        total += a.hamming(b);
    }
    Ok(total)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AccuracyMode {
    /// Every input of the space was checked.
    Exhaustive,
    /// Uniform random inputs.
    Sampled,
    /// Every row of a table-backed oracle was checked.
    Table,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccuracyEstimate {
    pub mode: AccuracyMode,
    pub inputs_checked: u64,
    /// Correct predictions per output bit.
    pub correct: Vec<u64>,
    pub per_bit: Vec<f64>,
    pub aggregate: f64,
    /// 95% normal-approximation half-width of the aggregate; 0 when exact.
    pub half_width: f64,
}

impl AccuracyEstimate {
    fn from_counts(mode: AccuracyMode, inputs_checked: u64, correct: Vec<u64>) -> Self {
        let total = inputs_checked.max(1) as f64;
        let per_bit: Vec<f64> = correct.iter().map(|&c| c as f64 / total).collect();
        let aggregate = per_bit.iter().sum::<f64>() / per_bit.len() as f64;
        let half_width = match mode {
            AccuracyMode::Sampled => 1.96 * (aggregate * (1.0 - aggregate) / total).sqrt(),
            _ => 0.0,
        };
        AccuracyEstimate {
            mode,
            inputs_checked,
            correct,
            per_bit,
            aggregate,
            half_width,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.mode != AccuracyMode::Sampled
    }
}

const CHUNK: u64 = 4096;

/// Per-bit agreement between `diagram` and `oracle`.
///
/// Table-backed oracles are checked on every row. Otherwise, when
/// `2^n <= exhaustive_cap` every input is enumerated; beyond that `count`
/// uniform inputs are drawn from `stream`.
pub fn estimate_accuracy(
    diagram: &Bsd,
    oracle: &OracleHandle,
    count: u64,
    exhaustive_cap: u64,
    stream: &RngStream,
) -> Result<AccuracyEstimate> {
    let (n, m) = (oracle.inputs(), oracle.outputs());
    if diagram.inputs() != n || diagram.outputs() != m {
        return Err(Error::InputShape {
            expected: n,
            got: diagram.inputs(),
        });
    }
    let tally = |xs: &[BitVec], ys: &[BitVec]| -> Vec<u64> {
        let mut c = vec![0u64; m];
        for (x, y) in xs.iter().zip(ys) {
            for (j, &r) in diagram.roots().iter().enumerate() {
                if diagram.eval_node(r, x) == y.get(j) {
                    c[j] += 1;
                }
            }
        }
        c
    };
    let add = |mut a: Vec<u64>, b: Vec<u64>| {
        for (x, y) in a.iter_mut().zip(b) {
            *x += y;
        }
        a
    };

    if let Some(rows) = oracle.rows() {
        let xs: Vec<BitVec> = rows.keys().cloned().collect();
        let ys = oracle.query(&xs)?;
        let correct = tally(&xs, &ys);
        return Ok(AccuracyEstimate::from_counts(
            AccuracyMode::Table,
            xs.len() as u64,
            correct,
        ));
    }

    if n < 64 && (1u64 << n) <= exhaustive_cap {
        let total = 1u64 << n;
        let free: Vec<usize> = (0..n).collect();
        let base = BitVec::zeros(n);
        let chunks: Vec<u64> = (0..total.div_ceil(CHUNK)).collect();
        let correct = chunks
            .par_iter()
            .map(|&c| -> Result<Vec<u64>> {
                let lo = c * CHUNK;
                let hi = (lo + CHUNK).min(total);
                let xs: Vec<BitVec> = (lo..hi).map(|i| enumerate_input(&base, &free, i)).collect();
                let ys = oracle.query(&xs)?;
                Ok(tally(&xs, &ys))
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(vec![0u64; m], add);
        return Ok(AccuracyEstimate::from_counts(
            AccuracyMode::Exhaustive,
            total,
            correct,
        ));
    }

    if count == 0 {
        return Err(Error::Config("accuracy sample count must be at least 1".into()));
    }
    let (xs, _) = conditioned_inputs(n, &PathAssignment::new(), count, stream);
    let correct = xs
        .par_chunks(CHUNK as usize)
        .map(|chunk| -> Result<Vec<u64>> {
            let ys = oracle.query(chunk)?;
            Ok(tally(chunk, &ys))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(vec![0u64; m], add);
    Ok(AccuracyEstimate::from_counts(
        AccuracyMode::Sampled,
        xs.len() as u64,
        correct,
    ))
}
