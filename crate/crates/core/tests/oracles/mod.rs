//! Brute-force reference semantics, written without the library's own
//! decision code: forcing by enumerating total extensions, the existential
//! theory by enumerating small families, and all small bottomed posets.
#![allow(dead_code)]

use cohenmv_core::theory::Literal;
use cohenmv_core::{BitString, Decision, FiniteName, IndexSet, MatrixCondition};

/// `p ⊩ ǩ ∈ σ` by filter semantics: every total extension of `p` to height
/// `horizon` (at least the name's depth) puts `k` in, or every one leaves it out.
pub fn filter_decision(p: &MatrixCondition, k: usize, sigma: &FiniteName, horizon: usize) -> Decision {
    let coords = sigma.coordinates().to_vec();
    let free: Vec<usize> = coords.iter().map(|&c| horizon - p.column(c).len().min(horizon)).collect();
    let total_free: usize = free.iter().sum();
    let (mut some_in, mut some_out) = (false, false);
    for fill in 0u64..1 << total_free {
        let mut shift = 0;
        let x: Vec<BitString> = coords
            .iter()
            .zip(&free)
            .map(|(&c, &f)| {
                let mut col = p.column(c).prefix(horizon);
                for b in 0..f {
                    col.push(fill >> (shift + b) & 1 == 1);
                }
                shift += f;
                col
            })
            .collect();
        let inside = sigma.entries().iter().any(|(e, v)| {
            *v == k && coords.iter().zip(&x).all(|(&c, col)| col.extends(e.column(c)))
        });
        if inside {
            some_in = true;
        } else {
            some_out = true;
        }
    }
    match (some_in, some_out) {
        (true, false) => Decision::ForcedIn,
        (false, true) => Decision::ForcedOut,
        _ => Decision::Undecided,
    }
}

/// Every literal over `v` variables: `x ≤ y` and its negation for all
/// ordered pairs, `A` and its negation for every nonempty set of variables,
/// and `x = y ∧ z` for all triples.
pub fn all_literals(v: usize) -> Vec<Literal> {
    let mut out = Vec::new();
    for left in 0..v {
        for right in 0..v {
            out.push(Literal::Leq { left, right });
            out.push(Literal::NotLeq { left, right });
        }
    }
    for mask in 1u32..1 << v {
        let vars: Vec<usize> = (0..v).filter(|i| mask >> i & 1 == 1).collect();
        out.push(Literal::Amalgamable { vars: vars.clone() });
        out.push(Literal::NotAmalgamable { vars });
    }
    for target in 0..v {
        for left in 0..v {
            for right in 0..v {
                out.push(Literal::Meet { target, left, right });
            }
        }
    }
    out
}

/// Subset-closed families over `m` points containing every singleton, as
/// membership tables indexed by bitmask.
pub fn small_families(m: usize) -> Vec<Vec<bool>> {
    let big: Vec<u32> = (0u32..1 << m).filter(|s| s.count_ones() >= 2).collect();
    let mut out = Vec::new();
    for choice in 0u64..1 << big.len() {
        let mut member = vec![false; 1 << m];
        for s in 0u32..1 << m {
            if s.count_ones() <= 1 {
                member[s as usize] = true;
            }
        }
        for (j, &s) in big.iter().enumerate() {
            if choice >> j & 1 == 1 {
                member[s as usize] = true;
            }
        }
        let closed = (0u32..1 << m)
            .all(|s| !member[s as usize] || (0..m).all(|b| s >> b & 1 == 0 || member[(s & !(1 << b)) as usize]));
        if closed {
            out.push(member);
        }
    }
    out
}

fn literal_holds(lit: &Literal, sets: &[u32], member: &[bool]) -> bool {
    let union = |vars: &[usize]| vars.iter().fold(0u32, |a, &i| a | sets[i]);
    match lit {
        Literal::Leq { left, right } => sets[*left] & !sets[*right] == 0,
        Literal::NotLeq { left, right } => sets[*left] & !sets[*right] != 0,
        Literal::Amalgamable { vars } => member[union(vars) as usize],
        Literal::NotAmalgamable { vars } => !member[union(vars) as usize],
        Literal::Meet { target, left, right } => sets[*target] == sets[*left] & sets[*right],
    }
}

/// Which literal sets are satisfiable in some family on at most `max_points`
/// points, as the maximal truth vectors over [`all_literals`].
pub struct TheoryOracle {
    pub literals: Vec<Literal>,
    maximal: Vec<u64>,
}

impl TheoryOracle {
    pub fn new(v: usize, max_points: usize) -> Self {
        let literals = all_literals(v);
        assert!(literals.len() <= 64);
        let mut vectors = std::collections::BTreeSet::new();
        for m in 0..=max_points {
            for member in small_families(m) {
                let members: Vec<u32> = (0u32..1 << m).filter(|&s| member[s as usize]).collect();
                let mut idx = vec![0usize; v];
                loop {
                    let sets: Vec<u32> = idx.iter().map(|&i| members[i]).collect();
                    let mask = literals
                        .iter()
                        .enumerate()
                        .filter(|(_, l)| literal_holds(l, &sets, &member))
                        .fold(0u64, |a, (j, _)| a | 1 << j);
                    vectors.insert(mask);
                    let mut d = 0;
                    while d < v {
                        idx[d] += 1;
                        if idx[d] < members.len() {
                            break;
                        }
                        idx[d] = 0;
                        d += 1;
                    }
                    if d == v {
                        break;
                    }
                }
            }
        }
        let all: Vec<u64> = vectors.into_iter().collect();
        let maximal = all
            .iter()
            .copied()
            .filter(|&a| !all.iter().any(|&b| b != a && a & !b == 0))
            .collect();
        Self { literals, maximal }
    }

    /// Whether the literals selected by `mask` hold together in some model.
    pub fn sat(&self, mask: u64) -> bool {
        self.maximal.iter().any(|&m| mask & !m == 0)
    }
}

/// Every partial order on `n` labelled elements in which element 0 is least,
/// as `leq[a][b]` tables.
pub fn bottomed_posets(n: usize) -> Vec<Vec<Vec<bool>>> {
    if n == 0 {
        return Vec::new();
    }
    let pairs: Vec<(usize, usize)> = (1..n)
        .flat_map(|a| (1..n).filter(move |&b| b != a).map(move |b| (a, b)))
        .collect();
    let mut out = Vec::new();
    for choice in 0u64..1 << pairs.len() {
        let mut leq = vec![vec![false; n]; n];
        for (a, row) in leq.iter_mut().enumerate() {
            row[a] = true;
        }
        leq[0].fill(true);
        for (j, &(a, b)) in pairs.iter().enumerate() {
            if choice >> j & 1 == 1 {
                leq[a][b] = true;
            }
        }
        let antisymmetric = (0..n).all(|a| (0..n).all(|b| a == b || !(leq[a][b] && leq[b][a])));
        let transitive = (0..n).all(|a| {
            (0..n).all(|b| (0..n).all(|c| !(leq[a][b] && leq[b][c]) || leq[a][c]))
        });
        if antisymmetric && transitive {
            out.push(leq);
        }
    }
    out
}

/// Row/index-set helper for building conditions from bit strings.
pub fn cond(cols: &[&str]) -> MatrixCondition {
    MatrixCondition::from_slice(&cols.iter().map(|c| BitString::from(*c)).collect::<Vec<_>>())
}

pub fn set(xs: &[usize]) -> IndexSet {
    xs.iter().copied().collect()
}
