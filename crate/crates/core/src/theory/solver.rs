//! Satisfiability of existential sentences in obstacle families.
//!
//! Only which Venn regions of the variables are inhabited matters: collapsing
//! each inhabited region to one point preserves every literal, and the family
//! can then be taken to be the downward closure of the sets that positive
//! literals require to be members. So a sentence in `v` variables is decided
//! by trying every set of nonempty regions, smallest first.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::conditions::IndexSet;
use crate::error::{Error, Result};

use super::obstacles::ObstacleFamily;
use super::sentence::{Literal, Sentence};

pub const DEFAULT_MAX_VARIABLES: usize = 4;

/// A family and an assignment of its members to the sentence's variables.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub family: ObstacleFamily,
    pub assignment: BTreeMap<String, IndexSet>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "UPPERCASE")]
pub enum Verdict {
    Sat { witness: Witness },
    Unsat,
}

impl Verdict {
    pub fn is_sat(&self) -> bool {
        matches!(self, Verdict::Sat { .. })
    }
}

pub fn decide_sentence(s: &Sentence) -> Result<Verdict> {
    decide_with_bound(s, DEFAULT_MAX_VARIABLES)
}

/// Region sets over `2^v - 1` regions ordered by size, then by mask.
fn region_sets(v: usize) -> &'static [u32] {
    static CACHE: OnceLock<Vec<Vec<u32>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| {
        (0..=DEFAULT_MAX_VARIABLES)
            .map(|v| {
                let count = (1u32 << v) - 1;
                let mut masks: Vec<u32> = (0..1u32 << count).collect();
                masks.sort_by_key(|m| (m.count_ones(), *m));
                masks
            })
            .collect()
    });
    &cache[v]
}

pub fn decide_with_bound(s: &Sentence, max_variables: usize) -> Result<Verdict> {
    s.validate()?;
    let v = s.variables.len();
    if v > max_variables.min(DEFAULT_MAX_VARIABLES) {
        return Err(Error::Resource(format!(
            "{v} variables exceed the bound of {}",
            max_variables.min(DEFAULT_MAX_VARIABLES)
        )));
    }
    // Region r (bit r) is the set of points lying in exactly the variables of signature r + 1.
    let inside: Vec<u32> = (0..v)
        .map(|i| {
            (0..(1u32 << v) - 1)
                .filter(|r| (r + 1) & (1 << i) != 0)
                .fold(0, |acc, r| acc | 1 << r)
        })
        .collect();
    let union = |sets: &[u32], vars: &[usize]| vars.iter().fold(0u32, |acc, &i| acc | sets[i]);
    let mut sets = vec![0u32; v];
    for &regions in region_sets(v) {
        for i in 0..v {
            sets[i] = regions & inside[i];
        }
        let mut generators: Vec<u32> = sets.clone();
        for lit in &s.literals {
            if let Literal::Amalgamable { vars } = lit {
                generators.push(union(&sets, vars));
            }
        }
        let member = |u: u32| u.count_ones() <= 1 || generators.iter().any(|g| u & !g == 0);
        let holds = s.literals.iter().all(|lit| match lit {
            Literal::Leq { left, right } => sets[*left] & !sets[*right] == 0,
            Literal::NotLeq { left, right } => sets[*left] & !sets[*right] != 0,
            Literal::Meet { target, left, right } => sets[*target] == sets[*left] & sets[*right],
            Literal::Amalgamable { .. } => true,
            Literal::NotAmalgamable { vars } => !member(union(&sets, vars)),
        });
        if holds {
            return Ok(Verdict::Sat {
                witness: witness(s, regions, &sets, &generators)?,
            });
        }
    }
    Ok(Verdict::Unsat)
}

fn witness(s: &Sentence, regions: u32, sets: &[u32], generators: &[u32]) -> Result<Witness> {
    // Relabel inhabited regions as 0..k in increasing region order.
    let present: Vec<u32> = (0..32).filter(|r| regions & (1 << r) != 0).collect();
    let relabel = |mask: u32| -> IndexSet {
        present
            .iter()
            .enumerate()
            .filter(|(_, r)| mask & (1 << **r) != 0)
            .map(|(i, _)| i)
            .collect()
    };
    let k = present.len();
    let compact = |mask: u32| -> u32 {
        present
            .iter()
            .enumerate()
            .filter(|(_, r)| mask & (1 << **r) != 0)
            .fold(0, |acc, (i, _)| acc | 1 << i)
    };
    let gens: Vec<u32> = generators.iter().map(|&g| compact(g)).collect();
    let member = |u: u32| u.count_ones() <= 1 || gens.iter().any(|g| u & !g == 0);
    let obstacles = (0u32..1 << k)
        .filter(|&m| !member(m) && (0..k).all(|b| m & (1 << b) == 0 || member(m & !(1 << b))))
        .map(|m| (0..k).filter(|b| m & (1 << b) != 0).collect())
        .collect();
    let family = ObstacleFamily::new(IndexSet::range(k), obstacles)?;
    let assignment = s
        .variables
        .iter()
        .zip(sets)
        .map(|(name, &set)| (name.clone(), relabel(set)))
        .collect();
    Ok(Witness { family, assignment })
}

/// Check a witness directly against the set semantics.
pub fn check_witness(s: &Sentence, w: &Witness) -> bool {
    let Some(sets) = s
        .variables
        .iter()
        .map(|v| w.assignment.get(v))
        .collect::<Option<Vec<&IndexSet>>>()
    else {
        return false;
    };
    let union = |vars: &[usize]| vars.iter().fold(IndexSet::new(), |acc, &i| acc.union(sets[i]));
    sets.iter().all(|x| w.family.is_member(x))
        && s.literals.iter().all(|lit| match lit {
            Literal::Leq { left, right } => sets[*left].is_subset(sets[*right]),
            Literal::NotLeq { left, right } => !sets[*left].is_subset(sets[*right]),
            Literal::Meet { target, left, right } => {
                *sets[*target] == sets[*left].intersection(sets[*right])
            }
            Literal::Amalgamable { vars } => w.family.is_member(&union(vars)),
            Literal::NotAmalgamable { vars } => !w.family.is_member(&union(vars)),
        })
}
