//! Finite forcing names for sets of naturals over products of binary Cohen
//! forcing, and the exactly decidable atomic forcing relation `p ⊩ ǩ ∈ σ`.
//!
//! A name is a finite set of pairs `(condition, k)`; its value in a generic
//! `G` is `{k : some entry condition lies in G}`. Because entry conditions
//! are finite, whether the entries of value `k` are dense below `p` only
//! depends on the first `L` bits of each column, where `L` is the longest
//! entry column. [`forces_in`] decides this by splitting `p` on exactly the
//! columns an entry still constrains.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::conditions::{IndexSet, MatrixCondition};
use crate::error::{Error, Result};

/// The outcome of asking whether a condition decides `ǩ ∈ σ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Decision {
    ForcedIn,
    ForcedOut,
    Undecided,
}

impl Decision {
    pub fn is_decided(self) -> bool {
        self != Decision::Undecided
    }

    /// Swap in and out; `Undecided` stays put.
    pub fn opposite(self) -> Decision {
        match self {
            Decision::ForcedIn => Decision::ForcedOut,
            Decision::ForcedOut => Decision::ForcedIn,
            Decision::Undecided => Decision::Undecided,
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decision::ForcedIn => "in",
            Decision::ForcedOut => "out",
            Decision::Undecided => "undecided",
        })
    }
}

/// A flat name for a set of naturals.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawName")]
pub struct FiniteName {
    coordinates: IndexSet,
    entries: Vec<(MatrixCondition, usize)>,
}

#[derive(Deserialize)]
struct RawName {
    coordinates: IndexSet,
    #[serde(default)]
    entries: Vec<(MatrixCondition, usize)>,
}

impl TryFrom<RawName> for FiniteName {
    type Error = Error;

    fn try_from(raw: RawName) -> Result<Self> {
        FiniteName::new(raw.coordinates, raw.entries)
    }
}

impl FiniteName {
    /// Entry conditions must be over exactly `coordinates`; duplicates are dropped.
    pub fn new(
        coordinates: IndexSet,
        entries: impl IntoIterator<Item = (MatrixCondition, usize)>,
    ) -> Result<Self> {
        let mut out = Vec::new();
        for (cond, k) in entries {
            if cond.index_set() != &coordinates {
                return Err(Error::Structural(format!(
                    "entry condition over {} in a name over {coordinates}",
                    cond.index_set()
                )));
            }
            if !out.contains(&(cond.clone(), k)) {
                out.push((cond, k));
            }
        }
        Ok(Self {
            coordinates,
            entries: out,
        })
    }

    pub fn empty(coordinates: IndexSet) -> Self {
        Self {
            coordinates,
            entries: Vec::new(),
        }
    }

    /// The canonical name `ǩ` over `coordinates`: `{(1, k)}`.
    pub fn check(coordinates: IndexSet, k: usize) -> Self {
        let top = MatrixCondition::new(coordinates.clone());
        Self {
            coordinates,
            entries: vec![(top, k)],
        }
    }

    pub fn coordinates(&self) -> &IndexSet {
        &self.coordinates
    }

    pub fn entries(&self) -> &[(MatrixCondition, usize)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The values mentioned by some entry, ascending.
    pub fn values(&self) -> BTreeSet<usize> {
        self.entries.iter().map(|(_, k)| *k).collect()
    }

    /// Longest entry column; extensions beyond this height never change a decision.
    pub fn depth(&self) -> usize {
        self.entries
            .iter()
            .map(|(c, _)| c.height())
            .max()
            .unwrap_or(0)
    }

    fn conditions_for(&self, k: usize) -> Vec<&MatrixCondition> {
        self.entries
            .iter()
            .filter(|(_, v)| *v == k)
            .map(|(c, _)| c)
            .collect()
    }
}

impl fmt::Debug for FiniteName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "name over {} {{", self.coordinates)?;
        for (n, (c, k)) in self.entries.iter().enumerate() {
            if n > 0 {
                write!(f, ", ")?;
            }
            write!(f, "({c:?}, {k})")?;
        }
        write!(f, "}}")
    }
}

fn localize(p: &MatrixCondition, sigma: &FiniteName) -> Result<MatrixCondition> {
    if !sigma.coordinates.is_subset(p.index_set()) {
        return Err(Error::Domain(format!(
            "name over {} but condition over {}",
            sigma.coordinates,
            p.index_set()
        )));
    }
    Ok(p.restrict_unchecked(&sigma.coordinates))
}

/// Whether `{r ≤ p : r extends some entry}` is dense below `p`.
fn dense_below(p: &MatrixCondition, entries: &[&MatrixCondition]) -> bool {
    let live: Vec<&MatrixCondition> = entries.iter().copied().filter(|e| p.compatible(e)).collect();
    if live.is_empty() {
        return false;
    }
    if live.iter().any(|e| p.extends_unchecked(e)) {
        return true;
    }
    let col = splitting_column(p, &live, None).expect("compatible but not extended");
    [false, true].into_iter().all(|bit| {
        let mut r = p.clone();
        r.update_column(col, |c| c.push(bit)).expect("own column");
        dense_below(&r, &live)
    })
}

/// A column where some live entry is still longer than `p`.
fn splitting_column(
    p: &MatrixCondition,
    live: &[&MatrixCondition],
    movable: Option<&IndexSet>,
) -> Option<usize> {
    live.iter().find_map(|e| {
        e.columns().find_map(|(i, c)| {
            let ok = movable.is_none_or(|m| m.contains(i));
            (ok && c.len() > p.column(i).len()).then_some(i)
        })
    })
}

/// Decide `p ⊩ ǩ ∈ σ` exactly.
pub fn forces_in(p: &MatrixCondition, k: usize, sigma: &FiniteName) -> Result<Decision> {
    let p = localize(p, sigma)?;
    Ok(decide_local(&p, &sigma.conditions_for(k)))
}

fn decide_local(p: &MatrixCondition, entries: &[&MatrixCondition]) -> Decision {
    if !entries.iter().any(|e| p.compatible(e)) {
        Decision::ForcedOut
    } else if dense_below(p, entries) {
        Decision::ForcedIn
    } else {
        Decision::Undecided
    }
}

/// Search for an extension of `p` that changes only the `movable` columns and
/// reaches decision `want` about `ǩ ∈ σ`, appending at most `budget` bits.
///
/// Only columns some compatible entry still constrains are split, so the
/// search is exhaustive once `budget` covers the total entry length.
pub fn find_deciding_extension(
    p: &MatrixCondition,
    movable: &IndexSet,
    k: usize,
    sigma: &FiniteName,
    want: Decision,
    budget: usize,
) -> Result<Option<MatrixCondition>> {
    assert!(want.is_decided(), "search target must be in or out");
    let local = localize(p, sigma)?;
    let entries = sigma.conditions_for(k);
    Ok(search(&local, movable, &entries, want, budget).map(|found| {
        p.overlay(&found).expect("found condition lives on the name's coordinates")
    }))
}

fn search(
    p: &MatrixCondition,
    movable: &IndexSet,
    entries: &[&MatrixCondition],
    want: Decision,
    budget: usize,
) -> Option<MatrixCondition> {
    let now = decide_local(p, entries);
    if now == want {
        return Some(p.clone());
    }
    if now.is_decided() || budget == 0 {
        return None;
    }
    let live: Vec<&MatrixCondition> = entries.iter().copied().filter(|e| p.compatible(e)).collect();
    // Try every movable column some live entry still constrains.
    let mut tried = BTreeSet::new();
    for e in &live {
        for (col, bits) in e.columns() {
            let have = p.column(col).len();
            if !movable.contains(col) || bits.len() <= have || !tried.insert(col) {
                continue;
            }
            let toward = bits.get(have).expect("entry longer than p");
            let order = if want == Decision::ForcedIn {
                [toward, !toward]
            } else {
                [!toward, toward]
            };
            for bit in order {
                let mut r = p.clone();
                r.update_column(col, |c| c.push(bit)).expect("own column");
                if let Some(found) = search(&r, movable, entries, want, budget - 1) {
                    return Some(found);
                }
            }
        }
    }
    None
}

/// The part of `σ`'s value an `x` decides below `horizon`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evaluation {
    pub members: BTreeSet<usize>,
    pub undecided: Vec<usize>,
}

impl Evaluation {
    pub fn is_total(&self) -> bool {
        self.undecided.is_empty()
    }
}

/// `σ^x` restricted to `k < horizon`: `k` is a member iff some initial
/// segment of `x` forces `ǩ ∈ σ`.
pub fn evaluate(x: &MatrixCondition, sigma: &FiniteName, horizon: usize) -> Result<Evaluation> {
    let mut out = Evaluation::default();
    for k in 0..horizon {
        // Forcing is monotone, so x itself decides whatever a segment does.
        match forces_in(x, k, sigma)? {
            Decision::ForcedIn => {
                out.members.insert(k);
            }
            Decision::ForcedOut => {}
            Decision::Undecided => out.undecided.push(k),
        }
    }
    Ok(out)
}

/// Evaluate `σ` on the filled columns, leaving a name over `remaining`.
///
/// An entry survives iff its filled part is an initial segment of `filled`;
/// the survivor is its restriction to `remaining`.
pub fn partial_evaluate(
    sigma: &FiniteName,
    filled: &MatrixCondition,
    remaining: &IndexSet,
) -> Result<FiniteName> {
    let f = filled.index_set();
    if !f.intersection(remaining).is_empty() || &f.union(remaining) != sigma.coordinates() {
        return Err(Error::Domain(format!(
            "filled {f} and remaining {remaining} do not partition {}",
            sigma.coordinates()
        )));
    }
    let entries = sigma
        .entries
        .iter()
        .filter(|(e, _)| f.iter().all(|i| filled.column(i).extends(e.column(i))))
        .map(|(e, k)| (e.restrict_unchecked(remaining), *k));
    FiniteName::new(remaining.clone(), entries)
}

/// A pool name no bounded `X`-extension can decide, with its test value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparatingName {
    pub name: FiniteName,
    /// The natural `ǩ` whose membership in `χ` stays open.
    pub test_value: usize,
    /// Bits per search the undecidability was verified to.
    pub depth: usize,
    /// Nothing was examined (depth 0).
    pub vacuous: bool,
}

/// Bounded stand-in for the product-decision lemma: the first pool name `ρ`
/// such that no `X`-extension of `q` appending at most `depth` bits decides
/// `ǩ ∈ χ`, where `k` is the least value `ρ` mentions.
///
/// Pool names not over `X`, and empty ones, never qualify.
pub fn search_separating_name(
    q: &MatrixCondition,
    chi: &FiniteName,
    x: &IndexSet,
    pool: &[FiniteName],
    depth: usize,
) -> Result<Option<SeparatingName>> {
    if !x.is_subset(q.index_set()) {
        return Err(Error::Domain(format!("{x} is not a subset of {}", q.index_set())));
    }
    for rho in pool {
        if rho.coordinates() != x {
            continue;
        }
        let Some(k) = rho.values().first().copied() else {
            continue;
        };
        if depth == 0 {
            return Ok(Some(SeparatingName {
                name: rho.clone(),
                test_value: k,
                depth,
                vacuous: true,
            }));
        }
        if undecidable_by(q, x, k, chi, depth)? {
            return Ok(Some(SeparatingName {
                name: rho.clone(),
                test_value: k,
                depth,
                vacuous: false,
            }));
        }
    }
    Ok(None)
}

/// No extension of `q` on the `movable` columns within `depth` bits decides `ǩ ∈ χ`.
pub fn undecidable_by(
    q: &MatrixCondition,
    movable: &IndexSet,
    k: usize,
    chi: &FiniteName,
    depth: usize,
) -> Result<bool> {
    if forces_in(q, k, chi)?.is_decided() {
        return Ok(false);
    }
    for want in [Decision::ForcedIn, Decision::ForcedOut] {
        if find_deciding_extension(q, movable, k, chi, want, depth)?.is_some() {
            return Ok(false);
        }
    }
    Ok(true)
}
