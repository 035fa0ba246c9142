// SPDX-License-Identifier: Apache-2.0

//! Fixed-width bit vectors used for circuit inputs and outputs.
//!
//! Bit `i` of a vector is input/output bit `i` of the circuit. In the text
//! form (`"0110"`) character `i`, counted from the left, is bit `i`, so the
//! string reads LSB-first for the arithmetic builtins.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use smallvec::SmallVec;

use crate::error::{Error, Result};

type Words = SmallVec<[u64; 2]>;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVec {
    width: usize,
    words: Words,
}

fn word_count(width: usize) -> usize {
    width.div_ceil(64)
}

impl BitVec {
    /// All-zero vector. `width` must be at least 1.
    pub fn zeros(width: usize) -> Self {
        assert!(width >= 1, "bit vectors have width >= 1");
        let mut words = Words::new();
        words.resize(word_count(width), 0);
        BitVec { width, words }
    }

    pub fn ones(width: usize) -> Self {
        let mut v = Self::zeros(width);
        for w in v.words.iter_mut() {
            *w = u64::MAX;
        }
        v.clear_tail();
        v
    }

    /// Low `width` bits of `value`, bit `i` of the vector = bit `i` of the value.
    pub fn from_u128(value: u128, width: usize) -> Self {
        let mut v = Self::zeros(width);
        for i in 0..width.min(128) {
            if (value >> i) & 1 == 1 {
                v.set(i, true);
            }
        }
        v
    }

    /// Vector from little-endian 64-bit words; excess bits are dropped.
    pub fn from_words(width: usize, words: &[u64]) -> Self {
        let mut v = Self::zeros(width);
        for (dst, src) in v.words.iter_mut().zip(words) {
            *dst = *src;
        }
        v.clear_tail();
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    /// Parses an `01` string where character `i` is bit `i`.
    pub fn parse(text: &str) -> Result<Self> {
        if text.is_empty() {
            return Err(Error::Parse {
                line: 0,
                msg: "empty bit string".into(),
            });
        }
        let mut v = Self::zeros(text.len());
        for (i, c) in text.bytes().enumerate() {
            match c {
                b'0' => {}
                b'1' => v.set(i, true),
                other => {
                    return Err(Error::Parse {
                        line: 0,
                        msg: format!("invalid bit character {:?}", other as char),
                    })
                }
            }
        }
        Ok(v)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.width);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, bit: bool) {
        debug_assert!(i < self.width);
        let mask = 1u64 << (i % 64);
        if bit {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        let b = self.get(i);
        self.set(i, !b);
    }

    pub fn with_flipped(&self, i: usize) -> Self {
        let mut v = self.clone();
        v.flip(i);
        v
    }

    /// Value of bits `lo..lo+len` as an integer (bit `lo` is the LSB).
    pub fn field(&self, lo: usize, len: usize) -> u128 {
        debug_assert!(len <= 128 && lo + len <= self.width);
        let mut out = 0u128;
        for i in 0..len {
            if self.get(lo + i) {
                out |= 1 << i;
            }
        }
        out
    }

    pub fn set_field(&mut self, lo: usize, len: usize, value: u128) {
        for i in 0..len {
            self.set(lo + i, (value >> i) & 1 == 1);
        }
    }

    /// Whole vector as an integer; only valid for widths up to 128.
    pub fn to_u128(&self) -> u128 {
        self.field(0, self.width)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Number of differing positions; widths must match.
    pub fn hamming(&self, other: &BitVec) -> usize {
        debug_assert_eq!(self.width, other.width);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    pub fn and(&self, other: &BitVec) -> BitVec {
        self.zip_words(other, |a, b| a & b)
    }

    pub fn or(&self, other: &BitVec) -> BitVec {
        self.zip_words(other, |a, b| a | b)
    }

    pub fn and_not(&self, other: &BitVec) -> BitVec {
        self.zip_words(other, |a, b| a & !b)
    }

    pub fn xor(&self, other: &BitVec) -> BitVec {
        self.zip_words(other, |a, b| a ^ b)
    }

    fn zip_words(&self, other: &BitVec, f: impl Fn(u64, u64) -> u64) -> BitVec {
        debug_assert_eq!(self.width, other.width);
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(&a, &b)| f(a, b))
            .collect();
        let mut v = BitVec {
            width: self.width,
            words,
        };
        v.clear_tail();
        v
    }

    /// Indices of set bits in increasing order.
    pub fn ones_iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.width).filter(move |&i| self.get(i))
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.width).map(move |i| self.get(i))
    }

    pub fn to_bools(&self) -> Vec<bool> {
        self.iter().collect()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    fn clear_tail(&mut self) {
        let rem = self.width % 64;
        if rem != 0 {
            let last = self.words.len() - 1;
            self.words[last] &= (1u64 << rem) - 1;
        }
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec({self})")
    }
}

impl Serialize for BitVec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for BitVec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        BitVec::parse(&s).map_err(serde::de::Error::custom)
    }
}
