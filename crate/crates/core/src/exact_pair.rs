//! Exact pairs over a countable tower, at desk scale.
//!
//! A tower is kept as its mutually generic columns `c′_n`; its `n`-th model
//! is generated by the join of `c′_0..c′_n`. The builders fill two matrices
//! round by round: round `r` treats the first `min(r + 1, T)` columns as
//! filled and frozen, meets one dense requirement by moving only the other
//! columns, tries to separate one pair of names, then completes the next
//! column against the tower.

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::conditions::{interleave_join, IndexSet, MatrixCondition};
use crate::dense::{meets, DenseRequirement};
use crate::error::{Error, Result};
use crate::names::{evaluate, find_deciding_extension, forces_in, partial_evaluate, Decision, FiniteName};
use crate::report::Report;

/// Bits the fallback search may add when a requirement's own meet would
/// touch a frozen column.
pub const FROZEN_MEET_BUDGET: usize = 6;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tower {
    pub columns: Vec<BitString>,
    pub provenance: String,
}

impl Tower {
    pub fn new(columns: Vec<BitString>, provenance: impl Into<String>) -> Result<Self> {
        if let Some(c) = columns.iter().find(|c| c.len() != columns[0].len()) {
            return Err(Error::Validation(format!(
                "tower column of length {} beside one of length {}",
                c.len(),
                columns[0].len()
            )));
        }
        Ok(Self {
            columns,
            provenance: provenance.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    /// Common column length.
    pub fn height(&self) -> usize {
        self.columns.first().map_or(0, BitString::len)
    }

    /// The tower's reals: element `n` joins the first `n + 1` columns.
    pub fn elements(&self) -> Vec<BitString> {
        (1..=self.columns.len())
            .map(|n| interleave_join(&self.columns[..n]).expect("nonempty"))
            .collect()
    }

    pub fn as_matrix(&self) -> MatrixCondition {
        MatrixCondition::from_slice(&self.columns)
    }

    /// Whether the product of the columns meets every requirement.
    pub fn meets_all(&self, family: &[DenseRequirement]) -> Result<bool> {
        let m = self.as_matrix();
        for d in family {
            if !meets(&m, d)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// The tower whose `n`-th real is the first `n + 1` columns of `c`.
pub fn tower_from_matrix(c: &MatrixCondition) -> Result<Tower> {
    if c.index_set().is_empty() {
        return Err(Error::Domain("a tower needs at least one column".into()));
    }
    if !c.is_uniform() {
        return Err(Error::Domain("tower matrix is not uniform".into()));
    }
    Tower::new(
        c.columns().map(|(_, col)| col.clone()).collect(),
        "columns of a single matrix",
    )
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome")]
pub enum DiagEntry {
    /// `σ^{d0}` and `τ^{d1}` were made to disagree about `k`.
    Diagonalized {
        pair: usize,
        k: usize,
        sigma: Decision,
        tau: Decision,
    },
    /// Both names were already decided alike below the horizon by the
    /// matrices once `columns` of them were filled.
    Skipped {
        pair: usize,
        columns: usize,
        value: Vec<usize>,
    },
}

impl DiagEntry {
    pub fn pair(&self) -> usize {
        match self {
            DiagEntry::Diagonalized { pair, .. } | DiagEntry::Skipped { pair, .. } => *pair,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactPairResult {
    pub d0: MatrixCondition,
    pub d1: MatrixCondition,
    pub diag_log: Vec<DiagEntry>,
    /// `almost_log[m][n]`: positions where column `n` of `d_m` differs from `c′_n`.
    pub almost_log: [Vec<Vec<usize>>; 2],
}

impl ExactPairResult {
    pub fn matrix(&self, m: usize) -> &MatrixCondition {
        if m == 0 {
            &self.d0
        } else {
            &self.d1
        }
    }
}

fn validate(tower: &Tower, family: &[DenseRequirement], pairs: &[(FiniteName, FiniteName)]) -> Result<IndexSet> {
    if tower.is_empty() {
        return Err(Error::Domain("empty tower".into()));
    }
    let all = IndexSet::range(tower.len());
    for d in family {
        if !d.coordinates().is_subset(&all) {
            return Err(Error::Domain(format!("requirement on {} outside the tower columns", d.coordinates())));
        }
    }
    for (s, t) in pairs {
        for name in [s, t] {
            if !name.coordinates().is_subset(&all) {
                return Err(Error::Domain(format!("name over {} outside the tower columns", name.coordinates())));
            }
            if name.depth() > tower.height() {
                return Err(Error::Domain(format!(
                    "name of depth {} over tower columns of length {}",
                    name.depth(),
                    tower.height()
                )));
            }
        }
    }
    Ok(all)
}

/// A matrix under construction and which of its columns are frozen.
struct Filling<'a> {
    m: MatrixCondition,
    tower: &'a Tower,
    almost: Vec<Vec<usize>>,
    filled: usize,
}

impl<'a> Filling<'a> {
    fn new(tower: &'a Tower) -> Self {
        Self {
            m: MatrixCondition::new(IndexSet::range(tower.len())),
            tower,
            almost: vec![Vec::new(); tower.len()],
            filled: 0,
        }
    }

    fn movable(&self) -> IndexSet {
        (self.filled..self.tower.len()).collect()
    }

    /// Complete the columns below `upto` against the tower.
    fn fill(&mut self, upto: usize) {
        for n in self.filled..upto.min(self.tower.len()) {
            let target = &self.tower.columns[n];
            let own = self.m.column(n).clone();
            self.almost[n] = (0..own.len().min(target.len()))
                .filter(|&i| own.get(i) != target.get(i))
                .collect();
            let completed = if own.len() >= target.len() {
                own
            } else {
                own.concat(&BitString::from_bits(target.bits()[own.len()..].to_vec()))
            };
            self.m.set_column(n, completed).expect("own column");
        }
        self.filled = self.filled.max(upto.min(self.tower.len()));
    }

    /// Meet `d` changing only unfilled columns.
    fn meet(&mut self, d: &DenseRequirement, round: usize) -> Result<()> {
        if d.contains(&self.m)? {
            return Ok(());
        }
        let met = d.meet(&self.m)?;
        let frozen_kept = (0..self.filled).all(|n| met.column(n) == self.m.column(n));
        if frozen_kept {
            self.m = met;
            return Ok(());
        }
        let movable: Vec<usize> = d.coordinates().intersection(&self.movable()).to_vec();
        for budget in 1..=FROZEN_MEET_BUDGET {
            if let Some(found) = extend_into(&self.m, d, &movable, budget)? {
                self.m = found;
                return Ok(());
            }
        }
        Err(Error::Construction(format!(
            "round {round}: `{}` cannot be met without changing the first {} columns; \
             the tower is not generic for it",
            d.description(),
            self.filled
        )))
    }

    /// `σ` partially evaluated by the filled columns, and the finite part
    /// of the rest of the matrix.
    fn residual(&self, sigma: &FiniteName) -> Result<(FiniteName, MatrixCondition)> {
        let frozen: IndexSet = (0..self.filled).collect();
        let f = sigma.coordinates().intersection(&frozen);
        let rest = sigma.coordinates().difference(&frozen);
        let residual = partial_evaluate(sigma, &self.m.restrict(&f)?, &rest)?;
        Ok((residual, self.m.restrict(&rest)?))
    }

    fn decide_to(&mut self, sigma: &FiniteName, k: usize, want: Decision) -> Result<Decision> {
        let (residual, p) = self.residual(sigma)?;
        let now = forces_in(&p, k, &residual)?;
        if now.is_decided() {
            return Ok(now);
        }
        let budget = residual.entries().iter().map(|(e, _)| e.total_bits()).sum::<usize>() + 1;
        let found = find_deciding_extension(&p, p.index_set(), k, &residual, want, budget)?
            .ok_or_else(|| Error::Construction(format!("no extension forces {k} {want}")))?;
        self.m = self.m.overlay(&found)?;
        Ok(want)
    }

    /// Decisions about `0..horizon` from the filled columns and the finite rest.
    fn decisions(&self, sigma: &FiniteName, horizon: usize) -> Result<Vec<Decision>> {
        let (residual, p) = self.residual(sigma)?;
        (0..horizon).map(|k| forces_in(&p, k, &residual)).collect()
    }
}

fn extend_into(
    m: &MatrixCondition,
    d: &DenseRequirement,
    movable: &[usize],
    budget: usize,
) -> Result<Option<MatrixCondition>> {
    if d.contains(m)? {
        return Ok(Some(m.clone()));
    }
    if budget == 0 {
        return Ok(None);
    }
    for &col in movable {
        for bit in [false, true] {
            let mut r = m.clone();
            r.update_column(col, |c| c.push(bit))?;
            if let Some(found) = extend_into(&r, d, movable, budget - 1)? {
                return Ok(Some(found));
            }
        }
    }
    Ok(None)
}

fn members(ds: &[Decision]) -> Vec<usize> {
    ds.iter()
        .enumerate()
        .filter(|(_, d)| **d == Decision::ForcedIn)
        .map(|(k, _)| k)
        .collect()
}

fn rounds(tower: &Tower, family: &[DenseRequirement], pairs: &[(FiniteName, FiniteName)]) -> usize {
    family.len().max(pairs.len()).max(tower.len())
}

/// Build `d0` and `d1` together, diagonalizing every name pair that can be.
pub fn build_exact_pair(
    tower: &Tower,
    family: &[DenseRequirement],
    pairs: &[(FiniteName, FiniteName)],
    horizon: usize,
) -> Result<ExactPairResult> {
    validate(tower, family, pairs)?;
    let mut fills = [Filling::new(tower), Filling::new(tower)];
    let mut diag_log = Vec::new();
    for r in 0..rounds(tower, family, pairs) {
        let n = (r + 1).min(tower.len());
        for f in &mut fills {
            f.fill(n);
        }
        if let Some(d) = family.get(r) {
            for f in &mut fills {
                f.meet(d, r)?;
            }
        }
        if let Some((sigma, tau)) = pairs.get(r) {
            let ds = fills[0].decisions(sigma, horizon)?;
            let dt = fills[1].decisions(tau, horizon)?;
            // An extension forcing in exists unless forced out already, and vice versa.
            let target = (0..horizon).find_map(|k| {
                [(Decision::ForcedIn, Decision::ForcedOut), (Decision::ForcedOut, Decision::ForcedIn)]
                    .into_iter()
                    .find(|(a, b)| ds[k] != a.opposite() && dt[k] != b.opposite())
                    .map(|t| (k, t))
            });
            match target {
                Some((k, (a, b))) => {
                    let sigma_dec = fills[0].decide_to(sigma, k, a)?;
                    let tau_dec = fills[1].decide_to(tau, k, b)?;
                    diag_log.push(DiagEntry::Diagonalized {
                        pair: r,
                        k,
                        sigma: sigma_dec,
                        tau: tau_dec,
                    });
                }
                None => {
                    if ds != dt || ds.iter().any(|d| !d.is_decided()) {
                        return Err(Error::Construction(format!(
                            "pair {r} has no separating value below {horizon} yet is not decided alike"
                        )));
                    }
                    diag_log.push(DiagEntry::Skipped {
                        pair: r,
                        columns: n,
                        value: members(&ds),
                    });
                }
            }
        }
        for f in &mut fills {
            f.fill(n + 1);
        }
    }
    let [a, b] = fills;
    Ok(ExactPairResult {
        d0: a.m,
        d1: b.m,
        diag_log,
        almost_log: [a.almost, b.almost],
    })
}

/// Build `d1` against a given upper bound `d0`.
pub fn build_exact_partner(
    tower: &Tower,
    d0: &MatrixCondition,
    family: &[DenseRequirement],
    pairs: &[(FiniteName, FiniteName)],
    horizon: usize,
) -> Result<ExactPairResult> {
    let all = validate(tower, family, pairs)?;
    if d0.index_set() != &all {
        return Err(Error::Domain(format!(
            "d0 over {} but the tower has columns {all}",
            d0.index_set()
        )));
    }
    let mut targets = Vec::new();
    for (sigma, _) in pairs {
        let e = evaluate(d0, sigma, horizon)?;
        if !e.is_total() {
            return Err(Error::UndecidedEvaluation(e.undecided));
        }
        targets.push(e.members);
    }
    let mut fill = Filling::new(tower);
    let mut diag_log = Vec::new();
    for r in 0..rounds(tower, family, pairs) {
        let n = (r + 1).min(tower.len());
        fill.fill(n);
        if let Some(d) = family.get(r) {
            fill.meet(d, r)?;
        }
        if let (Some((_, tau)), Some(value)) = (pairs.get(r), targets.get(r)) {
            let concrete = |k: usize| {
                if value.contains(&k) {
                    Decision::ForcedIn
                } else {
                    Decision::ForcedOut
                }
            };
            let dt = fill.decisions(tau, horizon)?;
            let undecided = (0..horizon).find(|&k| !dt[k].is_decided());
            let differs = (0..horizon).find(|&k| dt[k].is_decided() && dt[k] != concrete(k));
            if let Some(k) = undecided {
                let want = concrete(k).opposite();
                let got = fill.decide_to(tau, k, want)?;
                diag_log.push(DiagEntry::Diagonalized {
                    pair: r,
                    k,
                    sigma: concrete(k),
                    tau: got,
                });
            } else if let Some(k) = differs {
                diag_log.push(DiagEntry::Diagonalized {
                    pair: r,
                    k,
                    sigma: concrete(k),
                    tau: dt[k],
                });
            } else {
                diag_log.push(DiagEntry::Skipped {
                    pair: r,
                    columns: n,
                    value: members(&dt),
                });
            }
        }
        fill.fill(n + 1);
    }
    let own: Vec<Vec<usize>> = tower
        .columns
        .iter()
        .enumerate()
        .map(|(n, c)| {
            let col = d0.column(n);
            (0..col.len().min(c.len())).filter(|&i| col.get(i) != c.get(i)).collect()
        })
        .collect();
    Ok(ExactPairResult {
        d0: d0.clone(),
        d1: fill.m,
        diag_log,
        almost_log: [own, fill.almost],
    })
}

/// Re-check the four exactness clauses against the declared requirements
/// and name pool.
pub fn verify_exact_pair(
    result: &ExactPairResult,
    tower: &Tower,
    family: &[DenseRequirement],
    pairs: &[(FiniteName, FiniteName)],
    horizon: usize,
) -> Report {
    let mut report = Report::new();
    report.note(format!(
        "exactness is relative to {} requirements and {} name pairs below {horizon}",
        family.len(),
        pairs.len()
    ));
    for (m, label) in [(0, "d0"), (1, "d1")] {
        let d = result.matrix(m);
        for (j, req) in family.iter().enumerate() {
            let ok = meets(d, req).unwrap_or(false);
            report.check(format!("(i) {label} meets requirement {j}"), ok, req.description());
        }
        for (n, c) in tower.columns.iter().enumerate() {
            let col = d.column(n);
            let logged = result.almost_log[m].get(n).cloned().unwrap_or_default();
            let stray: Vec<usize> = (0..col.len().min(c.len()))
                .filter(|&i| col.get(i) != c.get(i) && !logged.contains(&i))
                .collect();
            let complete = col.len() >= c.len();
            report.check(
                format!("(ii) {label} column {n} almost equals the tower"),
                stray.is_empty() && complete,
                if !complete {
                    format!("only {} of {} bits filled", col.len(), c.len())
                } else if stray.is_empty() {
                    format!("{} logged differences", logged.len())
                } else {
                    format!("unlogged differences at {stray:?}")
                },
            );
        }
    }
    for entry in &result.diag_log {
        let Some((sigma, tau)) = pairs.get(entry.pair()) else {
            report.check(format!("pair {} exists", entry.pair()), false, "");
            continue;
        };
        match entry {
            DiagEntry::Diagonalized { pair, k, .. } => {
                let a = forces_in(&result.d0, *k, sigma);
                let b = forces_in(&result.d1, *k, tau);
                let ok = matches!((&a, &b), (Ok(x), Ok(y)) if x.is_decided() && y.is_decided() && x != y);
                report.check(
                    format!("(iii) pair {pair} separated at {k}"),
                    ok,
                    format!("{} vs {}", show(&a), show(&b)),
                );
            }
            DiagEntry::Skipped { pair, columns, value } => {
                let ok = rederive(&result.d0, sigma, *columns, horizon)
                    .and_then(|a| Ok((a, rederive(&result.d1, tau, *columns, horizon)?)))
                    .map(|(a, b)| a.as_ref() == Some(value) && b.as_ref() == Some(value));
                report.check(
                    format!("(iv) pair {pair} value re-derives from {columns} columns"),
                    matches!(ok, Ok(true)),
                    format!("{value:?}"),
                );
            }
        }
    }
    report
}

fn show(d: &Result<Decision>) -> String {
    match d {
        Ok(d) => d.to_string(),
        Err(e) => e.to_string(),
    }
}

/// `σ` evaluated through its restriction to the first `columns` columns of
/// `d`, if that decides every value below `horizon` and agrees with the
/// direct evaluation.
fn rederive(d: &MatrixCondition, sigma: &FiniteName, columns: usize, horizon: usize) -> Result<Option<Vec<usize>>> {
    let frozen: IndexSet = (0..columns).collect();
    let f = sigma.coordinates().intersection(&frozen);
    let rest = sigma.coordinates().difference(&frozen);
    let residual = partial_evaluate(sigma, &d.restrict(&f)?, &rest)?;
    let via = evaluate(&d.restrict(&rest)?, &residual, horizon)?;
    let direct = evaluate(d, sigma, horizon)?;
    Ok((via.is_total() && via == direct).then(|| via.members.into_iter().collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{Registry, RequirementSpec};

    fn b(s: &str) -> BitString {
        BitString::from(s)
    }

    fn tower(cols: &[&str]) -> Tower {
        Tower::new(cols.iter().map(|c| b(c)).collect(), "test").unwrap()
    }

    fn col0(bits: &str, k: usize) -> (MatrixCondition, usize) {
        (MatrixCondition::from_columns(IndexSet::from([0]), [(0, b(bits))]).unwrap(), k)
    }

    #[test]
    fn tower_from_matrix_examples() {
        let m = MatrixCondition::from_slice(&[b("10"), b("01")]);
        assert_eq!(tower_from_matrix(&m).unwrap().elements(), [b("10"), b("1001")]);
        let one = MatrixCondition::from_slice(&[b("110")]);
        assert_eq!(tower_from_matrix(&one).unwrap().elements(), [b("110")]);
        assert!(tower_from_matrix(&MatrixCondition::new(IndexSet::new())).is_err());
    }

    #[test]
    fn no_pairs_only_meets() {
        let t = tower(&["1011", "0110"]);
        let family: Vec<_> = (0..2)
            .map(|c| {
                RequirementSpec::MinLength { n: 2 }
                    .instantiate(&IndexSet::from([c]), &Registry::default())
                    .unwrap()
            })
            .collect();
        let r = build_exact_pair(&t, &family, &[], 8).unwrap();
        assert!(r.diag_log.is_empty());
        assert_eq!(r.d0.column(0), &b("1011"));
        assert_eq!(r.almost_log[0], vec![Vec::<usize>::new(); 2]);
        assert!(verify_exact_pair(&r, &t, &family, &[], 8).passed());
    }

    #[test]
    fn diagonalizes_against_an_empty_name() {
        let t = tower(&["10", "01"]);
        let sigma = FiniteName::new(IndexSet::from([0]), [col0("1", 0)]).unwrap();
        let tau = FiniteName::empty(IndexSet::from([0]));
        let pairs = [(sigma, tau)];
        let r = build_exact_pair(&t, &[], &pairs, 8).unwrap();
        assert_eq!(
            r.diag_log,
            [DiagEntry::Diagonalized { pair: 0, k: 0, sigma: Decision::ForcedIn, tau: Decision::ForcedOut }]
        );
        assert!(verify_exact_pair(&r, &t, &[], &pairs, 8).passed());
    }

    #[test]
    fn skips_names_decided_by_the_first_column() {
        let t = tower(&["10", "01"]);
        let sigma = FiniteName::new(IndexSet::from([0]), [col0("1", 0), col0("0", 1)]).unwrap();
        let pairs = [(sigma.clone(), sigma)];
        let r = build_exact_pair(&t, &[], &pairs, 4).unwrap();
        assert_eq!(r.diag_log, [DiagEntry::Skipped { pair: 0, columns: 1, value: vec![0] }]);
        assert!(verify_exact_pair(&r, &t, &[], &pairs, 4).passed());
    }

    #[test]
    fn faults_are_caught() {
        let t = tower(&["10", "01"]);
        let sigma = FiniteName::new(
            IndexSet::from([0, 1]),
            [(MatrixCondition::from_slice(&[b(""), b("1")]), 0)],
        )
        .unwrap();
        let pairs = [(sigma.clone(), sigma)];
        let r = build_exact_pair(&t, &[], &pairs, 2).unwrap();
        assert!(matches!(r.diag_log[0], DiagEntry::Diagonalized { k: 0, .. }));
        assert!(verify_exact_pair(&r, &t, &[], &pairs, 2).passed());

        let mut flipped = r.clone();
        let c = flipped.d1.column(1).clone();
        let mut c2 = c.clone();
        c2.set(0, !c.get(0).unwrap());
        flipped.d1.set_column(1, c2).unwrap();
        let rep = verify_exact_pair(&flipped, &t, &[], &pairs, 2);
        assert!(rep.failures().any(|f| f.check.starts_with("(iii)")));

        let mut truncated = r.clone();
        truncated.almost_log[1][1].clear();
        truncated.almost_log[0][1].clear();
        let rep = verify_exact_pair(&truncated, &t, &[], &pairs, 2);
        assert!(rep.failures().any(|f| f.check.starts_with("(ii)")));
    }

    #[test]
    fn partner_examples() {
        let t = tower(&["10", "01"]);
        let d0 = t.as_matrix();
        let r = build_exact_partner(&t, &d0, &[], &[], 4).unwrap();
        assert_eq!(r.d1, d0);

        let tau = FiniteName::new(
            IndexSet::from([0, 1]),
            [(MatrixCondition::from_slice(&[b(""), b("0")]), 0)],
        )
        .unwrap();
        let sigma = FiniteName::empty(IndexSet::from([0]));
        let pairs = [(sigma, tau)];
        let r = build_exact_partner(&t, &d0, &[], &pairs, 4).unwrap();
        assert_eq!(
            r.diag_log,
            [DiagEntry::Diagonalized { pair: 0, k: 0, sigma: Decision::ForcedOut, tau: Decision::ForcedIn }]
        );
        assert!(verify_exact_pair(&r, &t, &[], &pairs, 4).passed());

        let unknown = FiniteName::new(IndexSet::from([1]), [(MatrixCondition::from_columns(IndexSet::from([1]), [(1, b("11"))]).unwrap(), 0)]).unwrap();
        let short = MatrixCondition::from_slice(&[b("10"), b("1")]);
        assert!(matches!(
            build_exact_partner(&t, &short, &[], &[(unknown.clone(), unknown)], 4),
            Err(Error::UndecidedEvaluation(ks)) if ks == [0]
        ));
    }
}
