use std::fmt;

use serde::{Deserialize, Serialize};

use crate::conditions::IndexSet;
use crate::error::{Error, Result};

/// Default cap on `|I|` for enumerating the members of a family.
pub const DEFAULT_MEMBER_BOUND: usize = 20;

/// A finite index set `I` with obstacles `𝓑`; the induced family `𝒜` is the
/// set of subsets of `I` containing no obstacle.
///
/// Obstacles have at least two elements, so `𝒜` contains every singleton.
/// Construction keeps only the ⊆-minimal obstacles, which leaves `𝒜` unchanged.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawFamily")]
pub struct ObstacleFamily {
    #[serde(rename = "I")]
    index_set: IndexSet,
    #[serde(rename = "B")]
    obstacles: Vec<IndexSet>,
}

#[derive(Deserialize)]
struct RawFamily {
    #[serde(rename = "I")]
    index_set: IndexSet,
    #[serde(rename = "B", default)]
    obstacles: Vec<IndexSet>,
}

impl TryFrom<RawFamily> for ObstacleFamily {
    type Error = Error;

    fn try_from(raw: RawFamily) -> Result<Self> {
        ObstacleFamily::new(raw.index_set, raw.obstacles)
    }
}

/// Whether no set in `sets` is a proper subset of another (duplicates count as comparable).
pub fn is_antichain(sets: &[IndexSet]) -> bool {
    sets.iter().enumerate().all(|(a, x)| {
        sets.iter()
            .enumerate()
            .all(|(b, y)| a == b || !x.is_subset(y))
    })
}

fn minimal_sets(mut sets: Vec<IndexSet>) -> Vec<IndexSet> {
    sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    sets.dedup();
    let mut out: Vec<IndexSet> = Vec::new();
    for s in sets {
        if !out.iter().any(|m| m.is_subset(&s)) {
            out.push(s);
        }
    }
    out.sort();
    out
}

impl ObstacleFamily {
    /// Validate and normalize to ⊆-minimal obstacles.
    pub fn new(index_set: IndexSet, obstacles: Vec<IndexSet>) -> Result<Self> {
        for b in &obstacles {
            if !b.is_subset(&index_set) {
                return Err(Error::Validation(format!("obstacle {b} is not a subset of {index_set}")));
            }
            if b.len() < 2 {
                return Err(Error::Validation(format!(
                    "obstacle {b} has fewer than two elements"
                )));
            }
        }
        Ok(Self {
            index_set,
            obstacles: minimal_sets(obstacles),
        })
    }

    /// Like [`ObstacleFamily::new`], but rejects obstacles that are not a ⊆-antichain.
    pub fn new_antichain(index_set: IndexSet, obstacles: Vec<IndexSet>) -> Result<Self> {
        if !is_antichain(&obstacles) {
            return Err(Error::Validation("obstacles do not form a ⊆-antichain".into()));
        }
        Self::new(index_set, obstacles)
    }

    /// The family whose members are exactly `members`, which must be
    /// subset-closed, contain every singleton of `index_set`, and contain
    /// only subsets of it. Obstacles are the minimal non-members.
    pub fn from_members(index_set: IndexSet, members: &[IndexSet]) -> Result<Self> {
        let n = index_set.len();
        if n > DEFAULT_MEMBER_BOUND {
            return Err(Error::Resource(format!("index set of size {n}")));
        }
        let labels = index_set.to_vec();
        let to_mask = |s: &IndexSet| -> Result<u64> {
            s.iter().try_fold(0u64, |acc, i| {
                labels
                    .iter()
                    .position(|l| *l == i)
                    .map(|p| acc | 1 << p)
                    .ok_or_else(|| Error::Validation(format!("{s} is not a subset of {index_set}")))
            })
        };
        let mut is_member = vec![false; 1 << n];
        for m in members {
            is_member[to_mask(m)? as usize] = true;
        }
        for (mask, &member) in is_member.iter().enumerate() {
            if !member {
                continue;
            }
            for bit in 0..n {
                if mask & (1 << bit) != 0 && !is_member[mask & !(1 << bit)] {
                    return Err(Error::Validation("family is not closed under subsets".into()));
                }
            }
        }
        for bit in 0..n {
            if !is_member[1 << bit] {
                return Err(Error::Validation(format!(
                    "family misses the singleton {{{}}}",
                    labels[bit]
                )));
            }
        }
        let from_mask = |mask: usize| -> IndexSet {
            (0..n).filter(|b| mask & (1 << b) != 0).map(|b| labels[b]).collect()
        };
        let obstacles = (0..1usize << n)
            .filter(|&mask| {
                !is_member[mask] && (0..n).all(|b| mask & (1 << b) == 0 || is_member[mask & !(1 << b)])
            })
            .map(from_mask)
            .collect();
        Self::new(index_set, obstacles)
    }

    pub fn index_set(&self) -> &IndexSet {
        &self.index_set
    }

    pub fn obstacles(&self) -> &[IndexSet] {
        &self.obstacles
    }

    pub fn is_obstacle(&self, b: &IndexSet) -> bool {
        self.obstacles.contains(b)
    }

    /// `S ∈ 𝒜`: a subset of `I` containing no obstacle.
    pub fn is_member(&self, s: &IndexSet) -> bool {
        s.is_subset(&self.index_set) && self.contained_obstacle(s).is_none()
    }

    /// The first obstacle contained in `s`.
    pub fn contained_obstacle(&self, s: &IndexSet) -> Option<&IndexSet> {
        self.obstacles.iter().find(|b| b.is_subset(s))
    }

    /// All members of `𝒜`, by increasing bitmask over `I` in label order.
    pub fn members(&self, bound: usize) -> Result<Vec<IndexSet>> {
        let n = self.index_set.len();
        if n > bound.min(63) {
            return Err(Error::Resource(format!(
                "enumerating 2^{n} subsets exceeds the bound 2^{bound}"
            )));
        }
        let labels = self.index_set.to_vec();
        Ok((0..1u64 << n)
            .map(|mask| {
                (0..n)
                    .filter(|b| mask & (1 << b) != 0)
                    .map(|b| labels[b])
                    .collect::<IndexSet>()
            })
            .filter(|s| self.contained_obstacle(s).is_none())
            .collect())
    }

    /// Members not contained in any other member.
    pub fn maximal_members(&self, bound: usize) -> Result<Vec<IndexSet>> {
        let all = self.members(bound)?;
        Ok(all
            .iter()
            .filter(|s| !all.iter().any(|t| t != *s && s.is_subset(t)))
            .cloned()
            .collect())
    }
}

/// `𝒜` as a list of members, e.g. for display.
pub fn family_members(fam: &ObstacleFamily, bound: usize) -> Result<Vec<IndexSet>> {
    fam.members(bound)
}

impl fmt::Debug for ObstacleFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "I={} B=[", self.index_set)?;
        for (n, b) in self.obstacles.iter().enumerate() {
            if n > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{b}")?;
        }
        write!(f, "]")
    }
}
