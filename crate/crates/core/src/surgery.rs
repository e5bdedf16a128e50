//! Surgery on Cohen reals: grafting, immunization against a dense set,
//! priming around the good points of a reference real, substitution at the
//! coding positions, and the mutable blockchain built from these.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::conditions::{interleave_join, stride_extract, IndexSet, MatrixCondition};
use crate::dense::{meets, DenseRequirement};
use crate::error::{Error, Result};
use crate::report::Report;
use crate::theory::ObstacleFamily;

/// Above this length `immunize` uses the requirement's structural immunizer
/// instead of looping over all `2^|p|` low modifications.
pub const IMMUNIZE_LOOP_LIMIT: usize = 12;

/// `f ≀_A g`: the `k`-th smallest position of `A` takes the value `g(k)`.
pub fn graft(f: &BitString, g: &BitString, a: &[usize]) -> Result<BitString> {
    let mut positions = a.to_vec();
    positions.sort_unstable();
    positions.dedup();
    if positions.len() != g.len() {
        return Err(Error::Domain(format!(
            "graft of {} bits onto {} positions",
            g.len(),
            positions.len()
        )));
    }
    if let Some(&bad) = positions.iter().find(|&&i| i >= f.len()) {
        return Err(Error::Domain(format!("position {bad} outside a string of length {}", f.len())));
    }
    let mut out = f.clone();
    for (k, &i) in positions.iter().enumerate() {
        out.set(i, g.get(k).expect("lengths checked"));
    }
    Ok(out)
}

/// Replace the first `|q|` bits of `p` by `q`.
fn graft_prefix(p: &BitString, q: &BitString) -> BitString {
    q.concat(&BitString::from_bits(p.bits()[q.len().min(p.len())..].to_vec()))
}

fn single_label(d: &DenseRequirement) -> Result<usize> {
    match d.coordinates().to_vec().as_slice() {
        [label] => Ok(*label),
        _ => Err(Error::Domain(format!(
            "requirement on {} is not over a single coordinate",
            d.coordinates()
        ))),
    }
}

fn as_condition(label: usize, bits: &BitString) -> MatrixCondition {
    MatrixCondition::from_columns(IndexSet::from([label]), [(label, bits.clone())]).expect("own label")
}

/// `(n, D)`-immunity: every string agreeing with `p` from position `n` on lies in `D`.
pub fn is_immune(p: &BitString, n: usize, d: &DenseRequirement) -> Result<bool> {
    if n > p.len() {
        return Err(Error::Domain(format!("n = {n} exceeds |p| = {}", p.len())));
    }
    let label = single_label(d)?;
    for low in BitString::all_of_len(n) {
        if !d.contains(&as_condition(label, &graft_prefix(p, &low)))? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A `D`-immunization of `p`: an extension that is `(|p|, D)`-immune.
///
/// Runs the enumeration loop for short `p`: for each string `q` of length
/// `|p|`, extend the current condition with `q` grafted in to a member of `D`,
/// then graft `p` back. Longer `p` need a structural immunizer.
pub fn immunize(p: &BitString, d: &DenseRequirement) -> Result<BitString> {
    let label = single_label(d)?;
    if p.len() > IMMUNIZE_LOOP_LIMIT {
        return d
            .immunize_structurally(&as_condition(label, p))?
            .map(|c| c.column(label).clone())
            .ok_or_else(|| {
                Error::Resource(format!(
                    "immunizing {} bits needs 2^{} meets and `{}` has no structural immunizer",
                    p.len(),
                    p.len(),
                    d.description()
                ))
            });
    }
    let mut cur = p.clone();
    for q in BitString::all_of_len(p.len()) {
        let met = d.meet(&as_condition(label, &graft_prefix(&cur, &q)))?;
        cur = graft_prefix(met.column(label), p);
    }
    Ok(cur)
}

/// Good points `G(y) = {i : y(i) = 1, y(i+1) = 0}` and `C(y) = G(y) + 1`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoodPointSet {
    #[serde(rename = "G")]
    pub good: Vec<usize>,
    #[serde(rename = "C")]
    pub coding: Vec<usize>,
}

pub fn good_points(y: &BitString) -> GoodPointSet {
    let good: Vec<usize> = (0..y.len().saturating_sub(1))
        .filter(|&i| y.bit_or_zero(i) && !y.bit_or_zero(i + 1))
        .collect();
    let coding = good.iter().map(|i| i + 1).collect();
    GoodPointSet { good, coding }
}

/// `x⃗` primed with respect to `y`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimedFamily {
    pub originals: Vec<BitString>,
    pub reference: BitString,
    pub primed: Vec<BitString>,
}

impl PrimedFamily {
    /// Which column is inactive at `i`, if any.
    pub fn inactive_at(&self, i: usize) -> Option<usize> {
        inactive_column(&good_points(&self.reference), self.originals.len(), i)
    }

    /// `x′_k[z_k/y]` for every `k`.
    pub fn substituted(&self, zs: &[BitString]) -> Result<Vec<BitString>> {
        if zs.len() != self.primed.len() {
            return Err(Error::Domain(format!(
                "{} substitutions for {} columns",
                zs.len(),
                self.primed.len()
            )));
        }
        Ok(self
            .primed
            .iter()
            .zip(zs)
            .map(|(x, z)| substitute(x, z, &self.reference))
            .collect())
    }
}

fn inactive_column(gp: &GoodPointSet, n: usize, i: usize) -> Option<usize> {
    if n == 0 || gp.good.contains(&i) || gp.coding.contains(&i) {
        return None;
    }
    Some(gp.good.iter().filter(|&&g| g < i).count() % n)
}

/// The four-case priming formula: 1 on `G(y)`, 0 on `C(y)`, 0 where the
/// column is inactive, and the original bit elsewhere.
pub fn prime(xs: &[BitString], y: &BitString) -> Result<PrimedFamily> {
    if let Some(x) = xs.iter().find(|x| x.len() != y.len()) {
        return Err(Error::Domain(format!(
            "column of length {} primed against a reference of length {}",
            x.len(),
            y.len()
        )));
    }
    let gp = good_points(y);
    let n = xs.len();
    let primed = xs
        .iter()
        .enumerate()
        .map(|(k, x)| {
            (0..y.len())
                .map(|i| {
                    if gp.good.contains(&i) {
                        true
                    } else if gp.coding.contains(&i) || inactive_column(&gp, n, i) == Some(k) {
                        false
                    } else {
                        x.bit_or_zero(i)
                    }
                })
                .collect()
        })
        .collect();
    Ok(PrimedFamily {
        originals: xs.to_vec(),
        reference: y.clone(),
        primed,
    })
}

/// `x[z/y] = x ≀_{C(y)} z`, with `z` cut or padded with trailing 0s to the
/// number of coding positions inside `x`.
pub fn substitute(x: &BitString, z: &BitString, y: &BitString) -> BitString {
    let c: Vec<usize> = good_points(y).coding.into_iter().filter(|&i| i < x.len()).collect();
    let fitted = z.prefix(c.len()).padded_to(c.len());
    graft(x, &fitted, &c).expect("fitted to the positions")
}

/// What [`decode_surgery`] read off a family.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurgeryDecode {
    /// Recovered coding positions.
    #[serde(rename = "C")]
    pub coding: Vec<usize>,
    pub z: BitString,
    /// The family ends on an all-one row whose bit row is cut off.
    pub incomplete: bool,
}

/// Read `C(y)` and `z` back from a primed-then-substituted family: each
/// maximal run of rows that are all-one across `a` starts at a good point,
/// and the bit after it is 1 exactly when the run has length 2.
pub fn decode_surgery(family: &[BitString], a: &IndexSet) -> Result<SurgeryDecode> {
    if a.is_empty() {
        return Err(Error::Domain("decoding needs at least one column".into()));
    }
    let cols = a
        .iter()
        .map(|k| {
            family
                .get(k)
                .ok_or_else(|| Error::Domain(format!("column {k} outside a family of {}", family.len())))
        })
        .collect::<Result<Vec<_>>>()?;
    let len = cols.iter().map(|c| c.len()).min().unwrap_or(0);
    let ones: Vec<bool> = (0..len).map(|r| cols.iter().all(|c| c.bit_or_zero(r))).collect();
    let mut out = SurgeryDecode::default();
    let mut r = 0;
    while r < len {
        if !ones[r] {
            r += 1;
            continue;
        }
        let start = r;
        while r < len && ones[r] {
            r += 1;
        }
        match r - start {
            1 if start + 1 == len => out.incomplete = true,
            1 | 2 => {
                out.coding.push(start + 1);
                out.z.push(r - start == 2);
            }
            run => {
                return Err(Error::MalformedFamily(format!(
                    "{run} consecutive all-one rows from row {start}"
                )))
            }
        }
    }
    Ok(out)
}

/// Whether two consecutive rows are all-one across every column.
pub fn has_consecutive_all_one_rows(family: &[BitString]) -> bool {
    if family.is_empty() {
        return false;
    }
    let len = family.iter().map(BitString::len).min().unwrap_or(0);
    let one = |r: usize| family.iter().all(|x| x.bit_or_zero(r));
    (1..len).any(|r| one(r - 1) && one(r))
}

/// Inputs for one row `A` of the mutable blockchain: `n` reals and a reference real.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutableRow {
    pub xs: Vec<BitString>,
    pub y: BitString,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutableRowResult {
    pub set: IndexSet,
    /// The members of `A` primed against `y^A`, in increasing order.
    pub primed: PrimedFamily,
    /// `c^A_k` for every `k < n`.
    pub columns: Vec<BitString>,
    /// `z^A`: the payload if `A` is not in the family, 0s otherwise.
    pub z: BitString,
}

/// Fixed reals `c_k` and `y`, and the surgery payload `z_𝒜` for one family.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutableBlockchain {
    pub n: usize,
    pub rows: Vec<MutableRowResult>,
    pub c: Vec<BitString>,
    pub y: BitString,
    pub z_family: BitString,
}

impl MutableBlockchain {
    /// `c_k ≀_y z_𝒜` for every `k`.
    pub fn operated(&self) -> Result<Vec<BitString>> {
        let at = self.y.ones_positions();
        self.c.iter().map(|c| graft(c, &self.z_family, &at)).collect()
    }

    /// Row `j`'s share of each of `strings`.
    pub fn row_stride(&self, strings: &[BitString], j: usize) -> Vec<BitString> {
        strings
            .iter()
            .map(|s| stride_extract(s, self.rows.len(), j))
            .collect()
    }
}

/// Prime each row `A` on its members, join the rows column by column, and
/// lay out `z_𝒜` so that grafting it at the 1s of `y` substitutes `z^A` in
/// row `A` at exactly `C(y^A)`.
pub fn build_mutable_blockchain(
    n: usize,
    rows: &BTreeMap<IndexSet, MutableRow>,
    family: &ObstacleFamily,
    z: &BitString,
) -> Result<MutableBlockchain> {
    if family.index_set() != &IndexSet::range(n) {
        return Err(Error::Validation(format!(
            "family over {} but n = {n}",
            family.index_set()
        )));
    }
    let expected: Vec<IndexSet> = family
        .index_set()
        .to_vec()
        .iter()
        .fold(vec![IndexSet::new()], |acc, &i| {
            acc.iter()
                .flat_map(|s| {
                    let mut with = s.clone();
                    with.insert(i);
                    [s.clone(), with]
                })
                .collect()
        })
        .into_iter()
        .filter(|s| s.len() >= 2)
        .collect();
    for a in &expected {
        if !rows.contains_key(a) {
            return Err(Error::Validation(format!("no row for {a}")));
        }
    }
    if let Some(extra) = rows.keys().find(|a| !expected.contains(a)) {
        return Err(Error::Validation(format!("unexpected row {extra}")));
    }
    let len = rows.values().next().map_or(0, |r| r.y.len());
    for (a, row) in rows {
        if row.xs.len() != n || row.y.len() != len || row.xs.iter().any(|x| x.len() != len) {
            return Err(Error::Validation(format!("row {a} must hold {n} strings of length {len}")));
        }
    }
    if rows.is_empty() {
        return Ok(MutableBlockchain {
            n,
            rows: Vec::new(),
            c: vec![BitString::new(); n],
            y: BitString::new(),
            z_family: BitString::new(),
        });
    }

    let mut results = Vec::new();
    let mut placed = Vec::new();
    let mut indicators = Vec::new();
    for (a, row) in rows {
        let members: Vec<BitString> = a.iter().map(|k| row.xs[k].clone()).collect();
        let primed = prime(&members, &row.y)?;
        let mut columns = row.xs.clone();
        for (rank, k) in a.iter().enumerate() {
            columns[k] = primed.primed[rank].clone();
        }
        let gp = good_points(&row.y);
        let z_a = if family.is_member(a) {
            BitString::zeros(gp.coding.len())
        } else {
            z.prefix(gp.coding.len()).padded_to(gp.coding.len())
        };
        let mut at_c = BitString::zeros(len);
        let mut indicator = BitString::zeros(len);
        for (j, &i) in gp.coding.iter().enumerate() {
            at_c.set(i, z_a.get(j).expect("fitted"));
            indicator.set(i, true);
        }
        placed.push(at_c);
        indicators.push(indicator);
        results.push(MutableRowResult {
            set: a.clone(),
            primed,
            columns,
            z: z_a,
        });
    }
    let c = (0..n)
        .map(|k| {
            let shares: Vec<BitString> = results.iter().map(|r| r.columns[k].clone()).collect();
            interleave_join(&shares)
        })
        .collect::<Result<Vec<_>>>()?;
    let y = interleave_join(&indicators)?;
    let joined = interleave_join(&placed)?;
    let z_family = y.ones_positions().into_iter().map(|i| joined.bit_or_zero(i)).collect();
    Ok(MutableBlockchain {
        n,
        rows: results,
        c,
        y,
        z_family,
    })
}

/// The decode contract: for `A` outside the family, row `A` of the operated
/// reals gives back `z`; for `A` inside, row `A` is left exactly as primed.
pub fn verify_mutable(mb: &MutableBlockchain, family: &ObstacleFamily, z: &BitString) -> Report {
    let mut report = Report::new();
    let operated = match mb.operated() {
        Ok(o) => o,
        Err(e) => {
            report.check("surgery applies", false, e.to_string());
            return report;
        }
    };
    for (j, row) in mb.rows.iter().enumerate() {
        let a = &row.set;
        report.check(
            format!("row {a} primed without consecutive all-one rows"),
            !has_consecutive_all_one_rows(&row.primed.primed),
            "",
        );
        let stride = mb.row_stride(&operated, j);
        if family.is_member(a) {
            let same = a.iter().all(|k| stride[k] == row.columns[k]);
            report.check(format!("identity substitution on {a}"), same, "");
        } else {
            let expected = z.prefix(row.z.len()).padded_to(row.z.len());
            match decode_surgery(&stride, a) {
                Ok(d) => {
                    let ok = d.z == expected
                        && d.coding == good_points(&row.primed.reference).coding
                        && !d.incomplete;
                    report.check(
                        format!("payload recovered from {a}"),
                        ok,
                        if ok { d.z.to_string() } else { format!("decoded {}, expected {expected}", d.z) },
                    );
                }
                Err(e) => report.check(format!("payload recovered from {a}"), false, e.to_string()),
            }
        }
    }
    report
}

/// A pair `(c, d)` built to meet `E_D` for each requirement in turn: `c` is
/// immunized from its current length on and `d` padded with 0s, with
/// `noise` random rows in front of every step.
pub fn build_immune_pair<R: Rng>(
    family: &[DenseRequirement],
    noise: usize,
    rng: &mut R,
) -> Result<(BitString, BitString)> {
    let mut c = BitString::new();
    let mut d = BitString::new();
    for req in family {
        for _ in 0..rng.gen_range(0..=noise) {
            c.push(rng.gen());
            d.push(rng.gen());
        }
        c = immunize(&c, req)?;
        d.pad_to(c.len());
    }
    Ok((c, d))
}

/// `c ≀_d g` on the 1s of `d`, and whether it meets every requirement.
pub fn covert_graft_meets(
    c: &BitString,
    d: &BitString,
    g: &BitString,
    family: &[DenseRequirement],
) -> Result<bool> {
    let grafted = graft(c, g, &d.ones_positions())?;
    for req in family {
        let label = single_label(req)?;
        if !meets(&as_condition(label, &grafted), req)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Reals `x_0..x_{n-1}` and `y` built to meet, for each requirement `D` on a
/// proper subset of the columns, the set of conditions that are immune for
/// `D` from some row on while an outside column is inactive and `y` is 0 on
/// every later row.
pub fn build_preservation_instance<R: Rng>(
    n: usize,
    family: &[DenseRequirement],
    noise: usize,
    rng: &mut R,
) -> Result<(Vec<BitString>, BitString)> {
    let all = IndexSet::range(n);
    let mut m = MatrixCondition::new(all.clone());
    let mut y = BitString::new();
    let push_row = |m: &mut MatrixCondition, y: &mut BitString, bits: &[bool], yb: bool| {
        for (k, &b) in bits.iter().enumerate() {
            m.update_column(k, |c| c.push(b)).expect("own column");
        }
        y.push(yb);
    };
    for req in family {
        let a = req.coordinates();
        let Some(outside) = all.difference(a).first() else {
            return Err(Error::Domain(format!("requirement on {a} is not on a proper subset")));
        };
        for _ in 0..rng.gen_range(0..=noise) {
            let bits: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
            push_row(&mut m, &mut y, &bits, rng.gen());
        }
        if y.bits().last() == Some(&true) {
            push_row(&mut m, &mut y, &vec![false; n], false);
        }
        // Each "010" adds one good point; stop once `outside` is inactive from here on.
        while good_points(&y).good.len() % n != outside {
            for yb in [false, true, false] {
                let bits: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
                push_row(&mut m, &mut y, &bits, yb);
            }
        }
        let Some(immune) = req.immunize_structurally(&m)? else {
            return Err(Error::Domain(format!("`{}` has no structural immunizer", req.description())));
        };
        m = immune.pad_all_to(immune.height().max(y.len()));
        y.pad_to(m.height());
    }
    Ok(((0..n).map(|k| m.column(k).clone()).collect(), y))
}

/// The preservation harness: every requirement on a proper subset of the
/// columns is met by the substituted primed family, and the primed family
/// never has two consecutive all-one rows.
pub fn verify_preservation(
    primed: &PrimedFamily,
    subsets: &[IndexSet],
    family: &[DenseRequirement],
    substitutions: &[BitString],
) -> Report {
    let mut report = Report::new();
    let n = primed.primed.len();
    report.check(
        "primed family has no consecutive all-one rows",
        !has_consecutive_all_one_rows(&primed.primed),
        "",
    );
    let substituted = match primed.substituted(substitutions) {
        Ok(s) => s,
        Err(e) => {
            report.check("substitution", false, e.to_string());
            return report;
        }
    };
    let matrix = MatrixCondition::from_slice(&substituted);
    let mut checked = 0;
    for a in subsets {
        if a.len() >= n || !a.is_subset(&IndexSet::range(n)) {
            report.note(format!("{a} is not a proper subset of the columns; skipped"));
            continue;
        }
        for d in family.iter().filter(|d| d.coordinates().is_subset(a)) {
            checked += 1;
            match meets(&matrix, d) {
                Ok(true) => {}
                Ok(false) => report.check(format!("{d:?} met inside {a}"), false, ""),
                Err(e) => report.check(format!("{d:?} met inside {a}"), false, e.to_string()),
            }
        }
    }
    report.check(
        "substituted subfamilies meet the scheduled requirements",
        report.findings.iter().all(|f| f.passed),
        format!("{checked} requirement checks, relative to the declared family"),
    );
    report
}
