use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::conditions::IndexSet;
use crate::error::{Error, Result};

use super::obstacles::ObstacleFamily;

/// Largest poset the brute-force embedding checker accepts (it visits all subsets).
pub const MAX_CHECKED_ELEMENTS: usize = 20;

/// A finite partial order on `0..n`, with optional element names.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawPoset", into = "RawPoset")]
pub struct FinitePoset {
    names: Vec<String>,
    leq: Vec<Vec<bool>>,
}

/// JSON form: element names plus generating pairs `[a, b]` meaning `a ≤ b`.
#[derive(Clone, Deserialize, Serialize)]
struct RawPoset {
    elements: Vec<String>,
    #[serde(default)]
    order: Vec<(String, String)>,
}

impl TryFrom<RawPoset> for FinitePoset {
    type Error = Error;

    fn try_from(raw: RawPoset) -> Result<Self> {
        let index = |name: &str| {
            raw.elements
                .iter()
                .position(|e| e == name)
                .ok_or_else(|| Error::Validation(format!("unknown element `{name}`")))
        };
        let pairs = raw
            .order
            .iter()
            .map(|(a, b)| Ok((index(a)?, index(b)?)))
            .collect::<Result<Vec<_>>>()?;
        FinitePoset::generated(raw.elements.clone(), &pairs)
    }
}

impl From<FinitePoset> for RawPoset {
    fn from(p: FinitePoset) -> Self {
        let mut order = Vec::new();
        for a in 0..p.len() {
            for b in 0..p.len() {
                if a != b && p.leq(a, b) {
                    order.push((p.names[a].clone(), p.names[b].clone()));
                }
            }
        }
        RawPoset {
            elements: p.names,
            order,
        }
    }
}

impl FinitePoset {
    /// From a full order matrix; the axioms are checked.
    pub fn new(names: Vec<String>, leq: Vec<Vec<bool>>) -> Result<Self> {
        let n = names.len();
        if leq.len() != n || leq.iter().any(|row| row.len() != n) {
            return Err(Error::Validation("order matrix does not match the elements".into()));
        }
        let mut distinct = names.clone();
        distinct.sort();
        distinct.dedup();
        if distinct.len() != n {
            return Err(Error::Validation("element names repeat".into()));
        }
        for a in 0..n {
            if !leq[a][a] {
                return Err(Error::Validation(format!("order is not reflexive at {}", names[a])));
            }
            for b in 0..n {
                if a != b && leq[a][b] && leq[b][a] {
                    return Err(Error::Validation(format!(
                        "order is not antisymmetric on {} and {}",
                        names[a], names[b]
                    )));
                }
                for c in 0..n {
                    if leq[a][b] && leq[b][c] && !leq[a][c] {
                        return Err(Error::Validation(format!(
                            "order is not transitive on {}, {}, {}",
                            names[a], names[b], names[c]
                        )));
                    }
                }
            }
        }
        Ok(Self { names, leq })
    }

    /// The reflexive-transitive closure of `pairs`.
    pub fn generated(names: Vec<String>, pairs: &[(usize, usize)]) -> Result<Self> {
        let n = names.len();
        let mut leq = vec![vec![false; n]; n];
        for (a, row) in leq.iter_mut().enumerate() {
            row[a] = true;
        }
        for &(a, b) in pairs {
            if a >= n || b >= n {
                return Err(Error::Validation(format!("pair ({a}, {b}) out of range")));
            }
            leq[a][b] = true;
        }
        for k in 0..n {
            for a in 0..n {
                for b in 0..n {
                    if leq[a][k] && leq[k][b] {
                        leq[a][b] = true;
                    }
                }
            }
        }
        Self::new(names, leq)
    }

    /// Elements named `0..n`.
    pub fn numbered(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        Self::generated((0..n).map(|i| i.to_string()).collect(), pairs)
    }

    /// `sets` ordered by inclusion.
    pub fn of_sets(sets: &[IndexSet]) -> Result<Self> {
        let names = sets.iter().map(|s| s.to_string()).collect();
        let leq = sets
            .iter()
            .map(|a| sets.iter().map(|b| a.is_subset(b)).collect())
            .collect();
        Self::new(names, leq)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.leq[a][b]
    }

    pub fn bottom(&self) -> Option<usize> {
        (0..self.len()).find(|&z| (0..self.len()).all(|x| self.leq(z, x)))
    }

    /// Some element is above every element of `xs`.
    pub fn has_upper_bound(&self, xs: &[usize]) -> bool {
        (0..self.len()).any(|z| xs.iter().all(|&x| self.leq(x, z)))
    }

    /// Some element other than the bottom is below every element of `xs`.
    pub fn has_nonzero_lower_bound(&self, xs: &[usize]) -> bool {
        let bottom = self.bottom();
        (0..self.len()).any(|z| Some(z) != bottom && xs.iter().all(|&x| self.leq(z, x)))
    }

    /// The greatest lower bound of `a` and `b`, if there is one.
    pub fn meet(&self, a: usize, b: usize) -> Option<usize> {
        let lower: Vec<usize> = (0..self.len())
            .filter(|&z| self.leq(z, a) && self.leq(z, b))
            .collect();
        lower
            .iter()
            .copied()
            .find(|&m| lower.iter().all(|&z| self.leq(z, m)))
    }

    pub fn is_meet_semilattice(&self) -> bool {
        (0..self.len()).all(|a| (0..self.len()).all(|b| self.meet(a, b).is_some()))
    }
}

/// One failed clause of the *-embedding definition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "clause", rename_all = "snake_case")]
pub enum EmbeddingViolation {
    NotTotal { element: String },
    NotInjective { left: String, right: String },
    Order { left: String, right: String, source: bool, target: bool },
    UpperBound { subset: Vec<String>, source: bool, target: bool },
    LowerBound { subset: Vec<String>, source: bool, target: bool },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    pub subsets_checked: usize,
    pub violations: Vec<EmbeddingViolation>,
}

impl EmbeddingReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Brute-force check that `f: P → Q` (given as `f[x]` per element of `P`) is a
/// *-embedding: injective, an order embedding, and for every `X ⊆ P`, `X` has
/// an upper bound (a nonzero lower bound) iff `f[X]` does.
pub fn check_star_embedding(f: &[usize], p: &FinitePoset, q: &FinitePoset) -> Result<EmbeddingReport> {
    if p.len() > MAX_CHECKED_ELEMENTS {
        return Err(Error::Resource(format!("{} elements to check", p.len())));
    }
    let mut report = EmbeddingReport::default();
    let name = |i: usize| p.names[i].clone();
    if f.len() != p.len() || f.iter().any(|&y| y >= q.len()) {
        for i in 0..p.len() {
            if f.get(i).is_none_or(|&y| y >= q.len()) {
                report.violations.push(EmbeddingViolation::NotTotal { element: name(i) });
            }
        }
        return Ok(report);
    }
    for a in 0..p.len() {
        for b in 0..p.len() {
            if a < b && f[a] == f[b] {
                report.violations.push(EmbeddingViolation::NotInjective {
                    left: name(a),
                    right: name(b),
                });
            }
            if p.leq(a, b) != q.leq(f[a], f[b]) {
                report.violations.push(EmbeddingViolation::Order {
                    left: name(a),
                    right: name(b),
                    source: p.leq(a, b),
                    target: q.leq(f[a], f[b]),
                });
            }
        }
    }
    for mask in 0u64..1 << p.len() {
        let xs: Vec<usize> = (0..p.len()).filter(|b| mask & (1 << b) != 0).collect();
        let ys: Vec<usize> = xs.iter().map(|&x| f[x]).collect();
        report.subsets_checked += 1;
        let subset = || xs.iter().map(|&x| name(x)).collect();
        let (s, t) = (p.has_upper_bound(&xs), q.has_upper_bound(&ys));
        if s != t {
            report.violations.push(EmbeddingViolation::UpperBound {
                subset: subset(),
                source: s,
                target: t,
            });
        }
        let (s, t) = (p.has_nonzero_lower_bound(&xs), q.has_nonzero_lower_bound(&ys));
        if s != t {
            report.violations.push(EmbeddingViolation::LowerBound {
                subset: subset(),
                source: s,
                target: t,
            });
        }
    }
    Ok(report)
}

/// The down-set representation of a bottomed poset as an obstacle family.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DownsetEmbedding {
    /// Ground set: the non-bottom elements of `P`, by index.
    pub family: ObstacleFamily,
    /// `p ↦ p↓ = {q : 0 < q ≤ p}`, indexed like `P`.
    pub images: Vec<IndexSet>,
}

impl DownsetEmbedding {
    /// The members of the family as a poset under ⊆, and `f` into it.
    pub fn target(&self) -> Result<(FinitePoset, Vec<IndexSet>, Vec<usize>)> {
        let members = self.family.members(MAX_CHECKED_ELEMENTS)?;
        let q = FinitePoset::of_sets(&members)?;
        let f = self
            .images
            .iter()
            .map(|img| members.iter().position(|m| m == img).expect("image is a member"))
            .collect();
        Ok((q, members, f))
    }

    pub fn named_images<'a>(&'a self, p: &'a FinitePoset) -> BTreeMap<&'a str, &'a IndexSet> {
        p.names().iter().map(String::as_str).zip(self.images.iter()).collect()
    }
}

/// Send `p` to `p↓`; the family's members are the down-sets and their subsets.
pub fn downset_embedding(p: &FinitePoset) -> Result<DownsetEmbedding> {
    let bottom = p
        .bottom()
        .ok_or_else(|| Error::Domain("poset has no least element".into()))?;
    let ground: IndexSet = (0..p.len()).filter(|&x| x != bottom).collect();
    let images: Vec<IndexSet> = (0..p.len())
        .map(|x| ground.iter().filter(|&y| p.leq(y, x)).collect())
        .collect();
    // Obstacles: the minimal subsets of the ground set contained in no down-set.
    let labels = ground.to_vec();
    let n = labels.len();
    if n > MAX_CHECKED_ELEMENTS {
        return Err(Error::Resource(format!("{n} elements")));
    }
    let image_masks: Vec<u64> = images
        .iter()
        .map(|img| {
            labels
                .iter()
                .enumerate()
                .filter(|(_, l)| img.contains(**l))
                .fold(0, |acc, (b, _)| acc | 1 << b)
        })
        .collect();
    let member = |mask: u64| image_masks.iter().any(|&m| mask & !m == 0);
    let obstacles = (0u64..1 << n)
        .filter(|&mask| {
            !member(mask) && (0..n).all(|b| mask & (1 << b) == 0 || member(mask & !(1 << b)))
        })
        .map(|mask| (0..n).filter(|b| mask & (1 << b) != 0).map(|b| labels[b]).collect())
        .collect();
    Ok(DownsetEmbedding {
        family: ObstacleFamily::new(ground, obstacles)?,
        images,
    })
}
