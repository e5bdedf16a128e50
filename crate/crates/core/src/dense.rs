//! Dense open sets of finite products of Cohen forcing, as a membership
//! predicate plus a meet oracle, with a standard library, a plugin registry,
//! and a brute-force density/openness auditor.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::conditions::{IndexSet, MatrixCondition};
use crate::error::{Error, Result};
use crate::names::{forces_in, FiniteName};

pub type MemberFn = dyn Fn(&MatrixCondition) -> bool + Send + Sync;
pub type MeetFn = dyn Fn(&MatrixCondition) -> MatrixCondition + Send + Sync;

/// A dense open `D ⊆ Add(ω, A)`.
///
/// `member` and `meet` see conditions over exactly `coordinates`; the
/// checked wrappers [`DenseRequirement::contains`] and
/// [`DenseRequirement::meet`] restrict larger conditions first.
#[derive(Clone)]
pub struct DenseRequirement {
    coordinates: IndexSet,
    member: Arc<MemberFn>,
    meet: Arc<MeetFn>,
    description: String,
    immunizer: Option<Arc<MeetFn>>,
}

impl DenseRequirement {
    pub fn new(
        coordinates: IndexSet,
        description: impl Into<String>,
        member: impl Fn(&MatrixCondition) -> bool + Send + Sync + 'static,
        meet: impl Fn(&MatrixCondition) -> MatrixCondition + Send + Sync + 'static,
    ) -> Self {
        Self {
            coordinates,
            member: Arc::new(member),
            meet: Arc::new(meet),
            description: description.into(),
            immunizer: None,
        }
    }

    /// Declare that `meet(p)` stays in `D` under every change to the bits of
    /// `p` itself, so it is already a `D`-immunization of `p`.
    pub fn with_immunizing_meet(mut self) -> Self {
        self.immunizer = Some(self.meet.clone());
        self
    }

    /// A map taking `p` to an extension that stays in `D` under every change
    /// to the bits `p` already has.
    pub fn with_immunizer(
        mut self,
        f: impl Fn(&MatrixCondition) -> MatrixCondition + Send + Sync + 'static,
    ) -> Self {
        self.immunizer = Some(Arc::new(f));
        self
    }

    pub fn coordinates(&self) -> &IndexSet {
        &self.coordinates
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn has_immunizer(&self) -> bool {
        self.immunizer.is_some()
    }

    /// Apply the structural immunizer to `p`'s coordinate columns, if any.
    pub fn immunize_structurally(&self, p: &MatrixCondition) -> Result<Option<MatrixCondition>> {
        let Some(f) = &self.immunizer else {
            return Ok(None);
        };
        let local = self.localize(p)?;
        let out = f(&local);
        if !out.extends_unchecked(&local) || !(self.member)(&out) {
            return Err(self.meet_failure(0, "immunizer result is not an extension in D"));
        }
        p.overlay(&out).map(Some)
    }

    fn localize(&self, p: &MatrixCondition) -> Result<MatrixCondition> {
        if !self.coordinates.is_subset(p.index_set()) {
            return Err(Error::Domain(format!(
                "requirement on {} applied to a condition over {}",
                self.coordinates,
                p.index_set()
            )));
        }
        Ok(p.restrict_unchecked(&self.coordinates))
    }

    /// Whether `p↾coordinates ∈ D`.
    pub fn contains(&self, p: &MatrixCondition) -> Result<bool> {
        Ok((self.member)(&self.localize(p)?))
    }

    /// Extend `p` on the coordinates so that it lands in `D`; other columns
    /// are left alone. The oracle's answer is checked.
    pub fn meet(&self, p: &MatrixCondition) -> Result<MatrixCondition> {
        let local = self.localize(p)?;
        let met = self.raw_meet(&local);
        if met.index_set() != &self.coordinates || !met.extends_unchecked(&local) {
            return Err(self.meet_failure(0, "result does not extend its input"));
        }
        if !(self.member)(&met) {
            return Err(self.meet_failure(0, "result is not a member"));
        }
        p.overlay(&met)
    }

    pub(crate) fn raw_member(&self, p: &MatrixCondition) -> bool {
        (self.member)(p)
    }

    pub(crate) fn raw_meet(&self, p: &MatrixCondition) -> MatrixCondition {
        (self.meet)(p)
    }

    pub(crate) fn meet_failure(&self, step: usize, reason: &str) -> Error {
        Error::MeetFailure {
            step,
            requirement: self.description.clone(),
            reason: reason.to_string(),
        }
    }
}

impl fmt::Debug for DenseRequirement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} on {}", self.description, self.coordinates)
    }
}

/// Serializable description of a requirement; coordinates come from context.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum RequirementSpec {
    /// Every coordinate column has at least `n` bits.
    MinLength { n: usize },
    /// Column `column` contains `w` as a contiguous substring.
    ContainsPattern { w: BitString, column: usize },
    /// Columns `i` and `j` differ at some common position.
    SplitsColumns { i: usize, j: usize },
    /// The condition decides `ǩ ∈ σ`.
    DecidesName { sigma: FiniteName, k: usize },
    /// A requirement from the plugin registry.
    Plugin { name: String },
}

impl RequirementSpec {
    pub fn instantiate(&self, coordinates: &IndexSet, registry: &Registry) -> Result<DenseRequirement> {
        let need = |i: usize| {
            if coordinates.contains(i) {
                Ok(())
            } else {
                Err(Error::Domain(format!("column {i} is not among {coordinates}")))
            }
        };
        let coords = coordinates.clone();
        Ok(match self.clone() {
            RequirementSpec::MinLength { n } => {
                let cs = coords.clone();
                DenseRequirement::new(
                    coords,
                    format!("MinLength({n})"),
                    move |p| cs.iter().all(|i| p.column(i).len() >= n),
                    move |p| {
                        let mut out = p.clone();
                        for i in p.index_set().iter() {
                            out.update_column(i, |c| c.pad_to(n)).expect("own index");
                        }
                        out
                    },
                )
                .with_immunizing_meet()
            }
            RequirementSpec::ContainsPattern { w, column } => {
                need(column)?;
                let w2 = w.clone();
                let w3 = w.clone();
                DenseRequirement::new(
                    coords,
                    format!("ContainsPattern({w}, {column})"),
                    move |p| p.column(column).find(&w).is_some(),
                    move |p| {
                        let mut out = p.clone();
                        if out.column(column).find(&w2).is_none() {
                            out.update_column(column, |c| c.extend_from(&w2))
                                .expect("column checked at construction");
                        }
                        out
                    },
                )
                .with_immunizer(move |p| {
                    let mut out = p.clone();
                    out.update_column(column, |c| c.extend_from(&w3))
                        .expect("column checked at construction");
                    out
                })
            }
            RequirementSpec::SplitsColumns { i, j } => {
                need(i)?;
                need(j)?;
                if i == j {
                    return Err(Error::Domain("a column cannot split from itself".into()));
                }
                let force_split = move |p: &MatrixCondition| {
                    let h = p.column(i).len().max(p.column(j).len());
                    let mut out = p.clone();
                    out.update_column(i, |c| {
                        c.pad_to(h);
                        c.push(false);
                    })
                    .expect("checked");
                    out.update_column(j, |c| {
                        c.pad_to(h);
                        c.push(true);
                    })
                    .expect("checked");
                    out
                };
                DenseRequirement::new(
                    coords,
                    format!("SplitsColumns({i}, {j})"),
                    move |p| splits(p.column(i), p.column(j)),
                    move |p| {
                        if splits(p.column(i), p.column(j)) {
                            p.clone()
                        } else {
                            force_split(p)
                        }
                    },
                )
                .with_immunizer(force_split)
            }
            RequirementSpec::DecidesName { sigma, k } => {
                if !sigma.coordinates().is_subset(&coords) {
                    return Err(Error::Domain(format!(
                        "name over {} in a requirement on {coords}",
                        sigma.coordinates()
                    )));
                }
                let depth = sigma.depth();
                let s2 = sigma.clone();
                let label = format!("DecidesName({k})");
                DenseRequirement::new(
                    coords,
                    label,
                    move |p| forces_in(p, k, &sigma).is_ok_and(|d| d.is_decided()),
                    move |p| {
                        let mut out = p.clone();
                        for c in s2.coordinates().iter() {
                            out.update_column(c, |col| col.pad_to(depth)).expect("checked");
                        }
                        out
                    },
                )
                .with_immunizing_meet()
            }
            RequirementSpec::Plugin { name } => registry.get(&name, &coords)?,
        })
    }

    pub fn label(&self) -> String {
        match self {
            RequirementSpec::MinLength { n } => format!("MinLength({n})"),
            RequirementSpec::ContainsPattern { w, column } => format!("ContainsPattern({w}, {column})"),
            RequirementSpec::SplitsColumns { i, j } => format!("SplitsColumns({i}, {j})"),
            RequirementSpec::DecidesName { k, .. } => format!("DecidesName({k})"),
            RequirementSpec::Plugin { name } => name.clone(),
        }
    }
}

fn splits(a: &BitString, b: &BitString) -> bool {
    a.iter().zip(b.iter()).any(|(x, y)| x != y)
}

type PluginFactory = dyn Fn(&IndexSet) -> Result<DenseRequirement> + Send + Sync;

/// User requirements by name. Code is registered, never deserialized.
#[derive(Clone)]
pub struct Registry {
    plugins: HashMap<String, Arc<PluginFactory>>,
}

impl Default for Registry {
    /// The example plugins: `ends-with-one` (dense but not open) and
    /// `one-after-first` (some bit at position ≥ 1 is 1, in every column).
    fn default() -> Self {
        let mut r = Registry::empty();
        r.register("ends-with-one", |coords| {
            let cs = coords.clone();
            let cs2 = coords.clone();
            Ok(DenseRequirement::new(
                coords.clone(),
                "ends-with-one",
                move |p| cs.iter().all(|i| p.column(i).bits().last() == Some(&true)),
                move |p| {
                    let mut out = p.clone();
                    for i in cs2.iter() {
                        if out.column(i).bits().last() != Some(&true) {
                            out.update_column(i, |c| c.push(true)).expect("own index");
                        }
                    }
                    out
                },
            ))
        });
        r.register("one-after-first", |coords| {
            let cs = coords.clone();
            let cs2 = coords.clone();
            let cs3 = coords.clone();
            let ok = |c: &BitString| c.iter().skip(1).any(|b| b);
            Ok(DenseRequirement::new(
                coords.clone(),
                "one-after-first",
                move |p| cs.iter().all(|i| ok(p.column(i))),
                move |p| {
                    let mut out = p.clone();
                    for i in cs2.iter() {
                        if !ok(out.column(i)) {
                            out.update_column(i, |c| {
                                if c.is_empty() {
                                    c.push(false);
                                }
                                c.push(true);
                            })
                            .expect("own index");
                        }
                    }
                    out
                },
            )
            .with_immunizer(move |p| {
                let mut out = p.clone();
                for i in cs3.iter() {
                    out.update_column(i, |c| {
                        if c.is_empty() {
                            c.push(false);
                        }
                        c.push(true);
                    })
                    .expect("own index");
                }
                out
            }))
        });
        r
    }
}

impl Registry {
    pub fn empty() -> Self {
        Self {
            plugins: HashMap::new(),
        }
    }

    pub fn register(
        &mut self,
        name: impl Into<String>,
        factory: impl Fn(&IndexSet) -> Result<DenseRequirement> + Send + Sync + 'static,
    ) {
        self.plugins.insert(name.into(), Arc::new(factory));
    }

    pub fn get(&self, name: &str, coordinates: &IndexSet) -> Result<DenseRequirement> {
        let factory = self
            .plugins
            .get(name)
            .ok_or_else(|| Error::Domain(format!("unknown requirement `{name}`")))?;
        factory(coordinates)
    }

    pub fn names(&self) -> Vec<&str> {
        let mut v: Vec<&str> = self.plugins.keys().map(String::as_str).collect();
        v.sort_unstable();
        v
    }
}

/// Findings of [`check_dense_open`]; empty lists mean the audit passed.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityReport {
    pub depth: usize,
    pub conditions_checked: usize,
    /// Inputs whose meet result fails to extend them or is not a member.
    pub meet_violations: Vec<MeetViolation>,
    /// Pairs `(p, q)` with `p ∈ D`, `q ≤ p`, `q ∉ D`.
    pub openness_violations: Vec<(MatrixCondition, MatrixCondition)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeetViolation {
    pub input: MatrixCondition,
    pub output: MatrixCondition,
    pub reason: String,
}

impl DensityReport {
    pub fn passed(&self) -> bool {
        self.meet_violations.is_empty() && self.openness_violations.is_empty()
    }
}

/// All conditions over `coords` with every column of at most `len` bits.
pub fn conditions_up_to(coords: &IndexSet, len: usize) -> Vec<MatrixCondition> {
    let strings: Vec<BitString> = BitString::all_up_to(len).collect();
    let mut out = vec![MatrixCondition::new(coords.clone())];
    for i in coords.iter() {
        out = out
            .into_iter()
            .flat_map(|p| {
                strings.iter().map(move |s| {
                    let mut q = p.clone();
                    q.set_column(i, s.clone()).expect("own index");
                    q
                })
            })
            .collect();
    }
    out
}

/// Audit meet and openness on every condition with columns of length ≤ `depth`.
///
/// Openness is checked on one-bit extensions of members with columns up to
/// `depth + 1`: any extension leaving `D` passes through such a step.
pub fn check_dense_open(d: &DenseRequirement, depth: usize) -> DensityReport {
    let mut report = DensityReport {
        depth,
        ..DensityReport::default()
    };
    for p in conditions_up_to(d.coordinates(), depth) {
        report.conditions_checked += 1;
        let out = d.raw_meet(&p);
        let reason = if out.index_set() != p.index_set() || !out.extends_unchecked(&p) {
            Some("does not extend its input")
        } else if !d.raw_member(&out) {
            Some("is not a member")
        } else {
            None
        };
        if let Some(r) = reason {
            report.meet_violations.push(MeetViolation {
                input: p,
                output: out,
                reason: r.into(),
            });
        }
    }
    for p in conditions_up_to(d.coordinates(), depth + 1) {
        if !d.raw_member(&p) {
            continue;
        }
        for i in d.coordinates().iter() {
            if p.column(i).len() > depth {
                continue;
            }
            for bit in [false, true] {
                let mut q = p.clone();
                q.update_column(i, |c| c.push(bit)).expect("own index");
                if !d.raw_member(&q) {
                    report.openness_violations.push((p.clone(), q));
                }
            }
        }
    }
    report
}

/// Whether some initial segment of `x↾coordinates` lies in `D`.
pub fn meets(x: &MatrixCondition, d: &DenseRequirement) -> Result<bool> {
    let local = d.localize(x)?;
    Ok((0..=local.height()).any(|h| d.raw_member(&local.truncate_rows(h))))
}

/// One step of a requirement schedule.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum ScheduleStep {
    Dense {
        columns: IndexSet,
        requirement: RequirementSpec,
    },
    Obstacle {
        columns: IndexSet,
    },
    Separation {
        left: IndexSet,
        right: IndexSet,
        sigma: FiniteName,
        tau: FiniteName,
    },
}

impl ScheduleStep {
    pub fn kind(&self) -> &'static str {
        match self {
            ScheduleStep::Dense { .. } => "dense",
            ScheduleStep::Obstacle { .. } => "obstacle",
            ScheduleStep::Separation { .. } => "separation",
        }
    }
}

/// A finite enumeration of requirements, executed in order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequirementSchedule {
    pub steps: Vec<ScheduleStep>,
}

impl RequirementSchedule {
    pub fn new(steps: Vec<ScheduleStep>) -> Self {
        Self { steps }
    }

    /// How often each step kind occurs.
    pub fn repetition_counts(&self) -> BTreeMap<&'static str, usize> {
        let mut out = BTreeMap::new();
        for s in &self.steps {
            *out.entry(s.kind()).or_insert(0) += 1;
        }
        out
    }

    /// Scheduled `(A, D)` pairs, in order, without repeats.
    pub fn dense_pairs(&self) -> Vec<(IndexSet, RequirementSpec)> {
        let mut out: Vec<(IndexSet, RequirementSpec)> = Vec::new();
        for s in &self.steps {
            if let ScheduleStep::Dense { columns, requirement } = s {
                let pair = (columns.clone(), requirement.clone());
                if !out.contains(&pair) {
                    out.push(pair);
                }
            }
        }
        out
    }
}
