//! Finite binary strings: the conditions of single Cohen forcing and the
//! prefix approximations of Cohen reals.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A finite sequence of bits. The empty string is the top condition.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BitString(Vec<bool>);

impl BitString {
    pub const fn new() -> Self {
        Self(Vec::new())
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![false; len])
    }

    pub fn ones(len: usize) -> Self {
        Self(vec![true; len])
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    /// The `len`-bit binary expansion of `value`, most significant bit first.
    pub fn from_index(value: u64, len: usize) -> Self {
        Self((0..len).map(|i| (value >> (len - 1 - i)) & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn get(&self, i: usize) -> Option<bool> {
        self.0.get(i).copied()
    }

    /// Bit at `i`, reading positions past the end as 0.
    pub fn bit_or_zero(&self, i: usize) -> bool {
        self.get(i).unwrap_or(false)
    }

    pub fn set(&mut self, i: usize, bit: bool) {
        self.0[i] = bit;
    }

    pub fn push(&mut self, bit: bool) {
        self.0.push(bit);
    }

    pub fn extend_from(&mut self, other: &BitString) {
        self.0.extend_from_slice(&other.0);
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.0.iter().copied()
    }

    /// True iff `self` extends `q`, i.e. `q` is an initial segment of `self`.
    pub fn extends(&self, q: &BitString) -> bool {
        q.len() <= self.len() && self.0[..q.len()] == q.0[..]
    }

    /// Two strings are compatible iff one extends the other.
    pub fn compatible(&self, other: &BitString) -> bool {
        self.extends(other) || other.extends(self)
    }

    pub fn prefix(&self, len: usize) -> BitString {
        Self(self.0[..len.min(self.len())].to_vec())
    }

    /// Extend with 0s up to `len`; never shortens.
    pub fn padded_to(&self, len: usize) -> BitString {
        let mut out = self.clone();
        out.pad_to(len);
        out
    }

    pub fn pad_to(&mut self, len: usize) {
        if self.0.len() < len {
            self.0.resize(len, false);
        }
    }

    pub fn concat(&self, tail: &BitString) -> BitString {
        let mut out = self.clone();
        out.extend_from(tail);
        out
    }

    pub fn ones_positions(&self) -> Vec<usize> {
        self.iter()
            .enumerate()
            .filter_map(|(i, b)| b.then_some(i))
            .collect()
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|b| **b).count()
    }

    /// Position of the first occurrence of `pattern` as a contiguous substring.
    pub fn find(&self, pattern: &BitString) -> Option<usize> {
        if pattern.is_empty() {
            return Some(0);
        }
        self.0.windows(pattern.len()).position(|w| w == pattern.bits())
    }

    /// Whether `pattern` occurs starting at some position `>= from`.
    pub fn occurs_from(&self, pattern: &BitString, from: usize) -> bool {
        if pattern.is_empty() {
            return true;
        }
        self.0
            .windows(pattern.len())
            .enumerate()
            .any(|(i, w)| i >= from && w == pattern.bits())
    }

    /// All strings of exactly `len` bits, in lexicographic order.
    pub fn all_of_len(len: usize) -> impl Iterator<Item = BitString> {
        assert!(len < 64, "enumeration of 2^{len} strings");
        (0..1u64 << len).map(move |v| BitString::from_index(v, len))
    }

    /// All strings of length at most `len`, shortest first.
    pub fn all_up_to(len: usize) -> impl Iterator<Item = BitString> {
        (0..=len).flat_map(BitString::all_of_len)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            f.write_str(if *b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Validation(format!(
                    "bit strings contain only '0' and '1', found {other:?}"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitString)
    }
}

impl From<&str> for BitString {
    /// Panics on characters other than `0`/`1`; meant for literals.
    fn from(s: &str) -> Self {
        s.parse().expect("invalid bit string literal")
    }
}

impl FromIterator<bool> for BitString {
    fn from_iter<T: IntoIterator<Item = bool>>(iter: T) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
