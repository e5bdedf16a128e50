//! Matrix conditions: finitely supported families of bit strings, the
//! conditions of a finite product of Cohen forcings.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};

static EMPTY: BitString = BitString::new();

/// A finite set of column labels.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IndexSet(BTreeSet<usize>);

impl IndexSet {
    pub fn new() -> Self {
        Self(BTreeSet::new())
    }

    /// `{0, 1, ..., n-1}`.
    pub fn range(n: usize) -> Self {
        (0..n).collect()
    }

    pub fn from_mask(mask: u64) -> Self {
        (0..64).filter(|i| mask >> i & 1 == 1).collect()
    }

    /// Bitmask encoding; every label must be below 64.
    pub fn to_mask(&self) -> u64 {
        self.0.iter().fold(0, |m, i| {
            assert!(*i < 64, "label {i} does not fit a mask");
            m | 1 << i
        })
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.contains(&i)
    }

    pub fn insert(&mut self, i: usize) -> bool {
        self.0.insert(i)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn is_subset(&self, other: &IndexSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn union(&self, other: &IndexSet) -> IndexSet {
        Self(self.0.union(&other.0).copied().collect())
    }

    pub fn intersection(&self, other: &IndexSet) -> IndexSet {
        Self(self.0.intersection(&other.0).copied().collect())
    }

    pub fn difference(&self, other: &IndexSet) -> IndexSet {
        Self(self.0.difference(&other.0).copied().collect())
    }

    pub fn first(&self) -> Option<usize> {
        self.0.first().copied()
    }

    /// Rank of `i` within the set, if present.
    pub fn position(&self, i: usize) -> Option<usize> {
        self.0.iter().position(|x| *x == i)
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl FromIterator<usize> for IndexSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl<const N: usize> From<[usize; N]> for IndexSet {
    fn from(items: [usize; N]) -> Self {
        items.into_iter().collect()
    }
}

impl fmt::Debug for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.iter()).finish()
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (n, i) in self.0.iter().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

/// A condition in `Add(ω, I)` for a finite index set `I`: one bit string per
/// column, absent columns being empty.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix")]
pub struct MatrixCondition {
    index_set: IndexSet,
    /// Only nonempty columns are stored.
    columns: BTreeMap<usize, BitString>,
}

#[derive(Deserialize)]
struct RawMatrix {
    index_set: IndexSet,
    /// Keyed by the column index written as a string, as JSON requires.
    #[serde(default)]
    columns: BTreeMap<String, BitString>,
}

impl TryFrom<RawMatrix> for MatrixCondition {
    type Error = Error;

    fn try_from(raw: RawMatrix) -> Result<Self> {
        let columns = raw
            .columns
            .into_iter()
            .map(|(k, v)| {
                k.parse::<usize>()
                    .map(|k| (k, v))
                    .map_err(|_| Error::MalformedMatrix(format!("column key `{k}` is not an index")))
            })
            .collect::<Result<Vec<_>>>()?;
        MatrixCondition::from_columns(raw.index_set, columns)
    }
}

impl MatrixCondition {
    /// The empty (top) condition over `index_set`.
    pub fn new(index_set: IndexSet) -> Self {
        Self {
            index_set,
            columns: BTreeMap::new(),
        }
    }

    pub fn from_columns<I, B>(index_set: IndexSet, columns: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, B)>,
        B: Into<BitString>,
    {
        let mut out = Self::new(index_set);
        for (i, bits) in columns {
            out.set_column(i, bits.into())?;
        }
        Ok(out)
    }

    /// One column labelled 0.
    pub fn single(bits: BitString) -> Self {
        let mut out = Self::new(IndexSet::from([0]));
        out.set_column(0, bits).expect("label 0 is in the index set");
        out
    }

    /// Columns labelled `0..n` from a slice, in order.
    pub fn from_slice(columns: &[BitString]) -> Self {
        let mut out = Self::new(IndexSet::range(columns.len()));
        for (i, c) in columns.iter().enumerate() {
            out.set_column(i, c.clone()).expect("label in range");
        }
        out
    }

    pub fn index_set(&self) -> &IndexSet {
        &self.index_set
    }

    /// The column at `i`; empty if unset or outside the index set.
    pub fn column(&self, i: usize) -> &BitString {
        self.columns.get(&i).unwrap_or(&EMPTY)
    }

    pub fn set_column(&mut self, i: usize, bits: BitString) -> Result<()> {
        if !self.index_set.contains(i) {
            return Err(Error::Domain(format!(
                "column {i} outside index set {}",
                self.index_set
            )));
        }
        if bits.is_empty() {
            self.columns.remove(&i);
        } else {
            self.columns.insert(i, bits);
        }
        Ok(())
    }

    /// Apply `f` to column `i` in place.
    pub fn update_column(&mut self, i: usize, f: impl FnOnce(&mut BitString)) -> Result<()> {
        let mut col = self.column(i).clone();
        f(&mut col);
        self.set_column(i, col)
    }

    /// Indices with a nonempty column.
    pub fn support(&self) -> IndexSet {
        self.columns.keys().copied().collect()
    }

    pub fn columns(&self) -> impl Iterator<Item = (usize, &BitString)> + '_ {
        self.index_set.iter().map(move |i| (i, self.column(i)))
    }

    /// Length of the longest column.
    pub fn height(&self) -> usize {
        self.columns.values().map(BitString::len).max().unwrap_or(0)
    }

    /// All nonempty columns have the same height.
    pub fn is_uniform(&self) -> bool {
        let h = self.height();
        self.columns.values().all(|c| c.len() == h)
    }

    /// All columns of the index set, empty or not, have height `h`.
    pub fn is_full_height(&self, h: usize) -> bool {
        self.index_set.iter().all(|i| self.column(i).len() == h)
    }

    /// Row `r` across the index set; `None` where the column is too short.
    pub fn row(&self, r: usize) -> Vec<Option<bool>> {
        self.index_set.iter().map(|i| self.column(i).get(r)).collect()
    }

    fn require_same_index_set(&self, q: &MatrixCondition) -> Result<()> {
        if self.index_set != q.index_set {
            return Err(Error::Structural(format!(
                "index sets differ: {} vs {}",
                self.index_set, q.index_set
            )));
        }
        Ok(())
    }

    fn require_subset(&self, a: &IndexSet) -> Result<()> {
        if !a.is_subset(&self.index_set) {
            return Err(Error::Domain(format!(
                "{a} is not a subset of {}",
                self.index_set
            )));
        }
        Ok(())
    }

    /// `self ≤ q`: every column of `self` extends the matching column of `q`.
    pub fn extends(&self, q: &MatrixCondition) -> Result<bool> {
        self.require_same_index_set(q)?;
        Ok(self.extends_unchecked(q))
    }

    pub(crate) fn extends_unchecked(&self, q: &MatrixCondition) -> bool {
        q.columns.iter().all(|(i, c)| self.column(*i).extends(c))
    }

    /// `self ≤_J q`: `self` extends `q` and agrees with it outside `J`.
    pub fn j_extension(&self, q: &MatrixCondition, j: &IndexSet) -> Result<bool> {
        self.require_same_index_set(q)?;
        self.require_subset(j)?;
        Ok(self.extends_unchecked(q)
            && self
                .index_set
                .iter()
                .filter(|i| !j.contains(*i))
                .all(|i| self.column(i) == q.column(i)))
    }

    /// Columnwise compatibility over the union of both index sets.
    pub fn compatible(&self, q: &MatrixCondition) -> bool {
        q.columns
            .iter()
            .all(|(i, c)| self.column(*i).compatible(c))
    }

    /// Pad every nonempty column with 0s to the maximal height.
    pub fn pad_uniform(&self) -> MatrixCondition {
        let h = self.height();
        let mut out = self.clone();
        for col in out.columns.values_mut() {
            col.pad_to(h);
        }
        out
    }

    /// Pad every column of the index set, empty ones included, to `h`.
    pub fn pad_all_to(&self, h: usize) -> MatrixCondition {
        let mut out = self.clone();
        for i in self.index_set.iter() {
            out.update_column(i, |c| c.pad_to(h)).expect("own index");
        }
        out
    }

    /// `p↾A`.
    pub fn restrict(&self, a: &IndexSet) -> Result<MatrixCondition> {
        self.require_subset(a)?;
        Ok(self.restrict_unchecked(a))
    }

    pub(crate) fn restrict_unchecked(&self, a: &IndexSet) -> MatrixCondition {
        MatrixCondition {
            index_set: a.clone(),
            columns: self
                .columns
                .iter()
                .filter(|(i, _)| a.contains(**i))
                .map(|(i, c)| (*i, c.clone()))
                .collect(),
        }
    }

    /// Replace the columns of `self` on `other`'s index set by `other`'s columns.
    pub fn overlay(&self, other: &MatrixCondition) -> Result<MatrixCondition> {
        self.require_subset(other.index_set())?;
        let mut out = self.clone();
        for i in other.index_set.iter() {
            out.set_column(i, other.column(i).clone())?;
        }
        Ok(out)
    }

    /// The same columns over a larger index set.
    pub fn lift(&self, index_set: &IndexSet) -> Result<MatrixCondition> {
        if !self.index_set.is_subset(index_set) {
            return Err(Error::Domain(format!(
                "cannot lift {} into {index_set}",
                self.index_set
            )));
        }
        Ok(MatrixCondition {
            index_set: index_set.clone(),
            columns: self.columns.clone(),
        })
    }

    /// Truncate every column to at most `h` bits.
    pub fn truncate_rows(&self, h: usize) -> MatrixCondition {
        let mut out = MatrixCondition::new(self.index_set.clone());
        for (i, c) in &self.columns {
            out.set_column(*i, c.prefix(h)).expect("own index");
        }
        out
    }

    /// Total number of bits over all columns.
    pub fn total_bits(&self) -> usize {
        self.columns.values().map(BitString::len).sum()
    }
}

impl fmt::Debug for MatrixCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (n, i) in self.index_set.iter().enumerate() {
            if n > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{i}:\"{}\"", self.column(i))?;
        }
        write!(f, "}}")
    }
}

impl fmt::Display for MatrixCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Round-robin join: position `i·N + j` of the output holds bit `i` of input
/// `j`. Shorter inputs are padded with trailing 0s first.
pub fn interleave_join(xs: &[BitString]) -> Result<BitString> {
    if xs.is_empty() {
        return Err(Error::Domain("interleave of an empty sequence".into()));
    }
    let len = xs.iter().map(BitString::len).max().unwrap_or(0);
    Ok((0..len)
        .flat_map(|i| xs.iter().map(move |x| x.bit_or_zero(i)))
        .collect())
}

/// Inverse of [`interleave_join`]: the `j`-th of `count` interleaved strings.
pub fn stride_extract(joined: &BitString, count: usize, j: usize) -> BitString {
    assert!(j < count, "stride {j} out of {count}");
    joined.iter().skip(j).step_by(count).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(cols: &[(usize, &str)]) -> MatrixCondition {
        let set: IndexSet = cols.iter().map(|(i, _)| *i).collect();
        MatrixCondition::from_columns(set, cols.iter().map(|(i, s)| (*i, BitString::from(*s))))
            .unwrap()
    }

    #[test]
    fn j_extension_examples() {
        let j = IndexSet::from([0]);
        assert!(m(&[(0, "10"), (1, "0")])
            .j_extension(&m(&[(0, "1"), (1, "0")]), &j)
            .unwrap());
        assert!(!m(&[(0, "10"), (1, "01")])
            .j_extension(&m(&[(0, "1"), (1, "0")]), &j)
            .unwrap());
        let p = m(&[(0, "1"), (1, "0")]);
        assert!(p.j_extension(&p, &IndexSet::new()).unwrap());
        assert!(matches!(
            p.j_extension(&p, &IndexSet::from([7])),
            Err(Error::Domain(_))
        ));
        // J = index set coincides with extends.
        let all = p.index_set().clone();
        let q = m(&[(0, "11"), (1, "00")]);
        assert_eq!(q.j_extension(&p, &all).unwrap(), q.extends(&p).unwrap());
    }

    #[test]
    fn extends_requires_same_index_set() {
        assert!(matches!(
            m(&[(0, "1")]).extends(&m(&[(1, "1")])),
            Err(Error::Structural(_))
        ));
    }

    #[test]
    fn pad_uniform_examples() {
        assert_eq!(m(&[(0, "10"), (1, "1")]).pad_uniform(), m(&[(0, "10"), (1, "10")]));
        let with_empty = m(&[(0, "10"), (1, "")]);
        assert_eq!(with_empty.pad_uniform(), with_empty);
        let u = m(&[(0, "10"), (1, "01")]);
        assert_eq!(u.pad_uniform(), u);
    }

    #[test]
    fn interleave_examples() {
        let b = |s: &str| BitString::from(s);
        assert_eq!(interleave_join(&[b("10"), b("01")]).unwrap(), b("1001"));
        assert_eq!(interleave_join(&[b("1")]).unwrap(), b("1"));
        assert_eq!(interleave_join(&[b("11"), b("00"), b("10")]).unwrap(), b("101100"));
        assert_eq!(interleave_join(&[b("1"), b("011")]).unwrap(), b("100101"));
        assert!(interleave_join(&[]).is_err());
    }

    #[test]
    fn restrict_examples() {
        let p = m(&[(0, "1"), (1, "0")]);
        assert_eq!(p.restrict(&IndexSet::from([0])).unwrap(), m(&[(0, "1")]));
        assert_eq!(p.restrict(p.index_set()).unwrap(), p);
        assert_eq!(
            p.restrict(&IndexSet::new()).unwrap(),
            MatrixCondition::new(IndexSet::new())
        );
        assert!(p.restrict(&IndexSet::from([2])).is_err());
    }

    #[test]
    fn json_shape() {
        let p = m(&[(0, "10"), (1, "")]);
        let v = serde_json::to_value(&p).unwrap();
        assert_eq!(v, serde_json::json!({"index_set": [0, 1], "columns": {"0": "10"}}));
        let back: MatrixCondition = serde_json::from_value(v).unwrap();
        assert_eq!(back, p);
        let bad = serde_json::json!({"index_set": [0], "columns": {"3": "1"}});
        assert!(serde_json::from_value::<MatrixCondition>(bad).is_err());
    }
}
