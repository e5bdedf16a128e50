//! Blockchain builders: fill a matrix block by block, letting only permitted
//! columns be active in each block, and hide a payload behind rows of 1s
//! across obstacle columns.
//!
//! Every coding writes three rows: a marker row of 1s across the coded
//! columns, a row holding the payload bit there, and an all-zero separator.
//! All other rows have their nonzero bits inside a single permitted set, so
//! the only rows that are all-one across an obstacle are coding rows.

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::conditions::{IndexSet, MatrixCondition};
use crate::dense::{meets, Registry, RequirementSchedule, ScheduleStep};
use crate::error::{Error, Result};
use crate::names::{
    find_deciding_extension, forces_in, search_separating_name, Decision, FiniteName,
};
use crate::report::Report;
use crate::theory::ObstacleFamily;

/// Which builder produced a result.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuildKind {
    Pair,
    Mostowski,
    General,
}

/// One coding point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkerEntry {
    pub marker_row: usize,
    pub bit_row: usize,
    pub payload_index: usize,
    pub bit: bool,
}

/// The coding points written across one set of columns.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkerLog {
    pub columns: IndexSet,
    pub entries: Vec<MarkerEntry>,
}

/// A block of rows written by one step, and the columns allowed to be nonzero in it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub kind: String,
    pub start: usize,
    pub end: usize,
    pub active: IndexSet,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum SeparationOutcome {
    /// Every test value of `σ` is decided by some bounded `A∩A′`-extension.
    Determined,
    /// `ǩ ∈ σ` and `ǩ ∈ τ` are now decided oppositely.
    Separated {
        k: usize,
        sigma: Decision,
        tau: Decision,
        case: u8,
    },
    Skipped { reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparationRecord {
    pub step: usize,
    pub depth: usize,
    #[serde(flatten)]
    pub outcome: SeparationOutcome,
}

/// A built matrix with everything needed to decode and re-verify it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockchainResult {
    pub kind: BuildKind,
    pub matrix: MatrixCondition,
    pub family: ObstacleFamily,
    pub schedule: RequirementSchedule,
    pub payload: BitString,
    pub marker_log: Vec<MarkerLog>,
    pub step_log: Vec<StepRecord>,
    #[serde(default)]
    pub separations: Vec<SeparationRecord>,
}

impl BlockchainResult {
    pub fn height(&self) -> usize {
        self.matrix.height()
    }

    /// Payload bits coded across a superset of `columns`, in row order.
    pub fn expected_payload(&self, columns: &IndexSet) -> BitString {
        let mut entries: Vec<&MarkerEntry> = self
            .marker_log
            .iter()
            .filter(|log| columns.is_subset(&log.columns))
            .flat_map(|log| &log.entries)
            .collect();
        entries.sort_by_key(|e| e.marker_row);
        entries.iter().map(|e| e.bit).collect()
    }
}

/// Tuning for the builders.
#[derive(Clone)]
pub struct BuildOptions {
    pub registry: Registry,
    /// Bits per bounded search in separation steps.
    pub depth: usize,
    /// Extra names tried before the canonical check names in separation steps.
    pub pool: Vec<FiniteName>,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            registry: Registry::default(),
            depth: 8,
            pool: Vec::new(),
        }
    }
}

struct Builder<'a> {
    opts: &'a BuildOptions,
    matrix: MatrixCondition,
    payload: &'a BitString,
    marker_log: Vec<MarkerLog>,
    step_log: Vec<StepRecord>,
    separations: Vec<SeparationRecord>,
}

impl<'a> Builder<'a> {
    fn new(index_set: IndexSet, payload: &'a BitString, opts: &'a BuildOptions) -> Self {
        Self {
            opts,
            matrix: MatrixCondition::new(index_set),
            payload,
            marker_log: Vec::new(),
            step_log: Vec::new(),
            separations: Vec::new(),
        }
    }

    fn height(&self) -> usize {
        self.matrix.height()
    }

    fn pad(&mut self) {
        self.matrix = self.matrix.pad_all_to(self.height());
    }

    fn record(&mut self, step: usize, kind: &str, start: usize, active: &IndexSet) {
        let end = self.height();
        if end > start {
            self.step_log.push(StepRecord {
                step,
                kind: kind.into(),
                start,
                end,
                active: active.clone(),
            });
        }
    }

    /// Meet `D` on the columns of `a`, properly extending each of them.
    fn dense(&mut self, step: usize, a: &IndexSet, spec: &crate::dense::RequirementSpec) -> Result<()> {
        let d = spec.instantiate(a, &self.opts.registry)?;
        let start = self.height();
        let before = self.matrix.clone();
        let mut met = d.meet(&self.matrix).map_err(|e| match e {
            Error::MeetFailure { requirement, reason, .. } => Error::MeetFailure {
                step,
                requirement,
                reason,
            },
            other => other,
        })?;
        for i in a.iter() {
            if met.column(i).len() == before.column(i).len() {
                met.update_column(i, |c| c.push(false))?;
            }
        }
        self.matrix = met;
        self.pad();
        self.record(step, "dense", start, a);
        Ok(())
    }

    /// Marker row, payload bit row and separator across `cols`.
    fn code(&mut self, step: usize, cols: &IndexSet, payload_index: usize) -> Result<()> {
        let bit = self.payload.get(payload_index).ok_or(Error::PayloadExhausted {
            step,
            index: payload_index,
            len: self.payload.len(),
        })?;
        let marker_row = self.height();
        for i in self.matrix.index_set().clone().iter() {
            let on = cols.contains(i);
            self.matrix.update_column(i, |c| {
                c.push(on);
                c.push(on && bit);
                c.push(false);
            })?;
        }
        self.record(step, "coding", marker_row, cols);
        let entry = MarkerEntry {
            marker_row,
            bit_row: marker_row + 1,
            payload_index,
            bit,
        };
        match self.marker_log.iter_mut().find(|l| &l.columns == cols) {
            Some(log) => log.entries.push(entry),
            None => self.marker_log.push(MarkerLog {
                columns: cols.clone(),
                entries: vec![entry],
            }),
        }
        Ok(())
    }

    fn separate(
        &mut self,
        step: usize,
        a: &IndexSet,
        a2: &IndexSet,
        sigma: &FiniteName,
        tau: &FiniteName,
    ) -> Result<()> {
        let depth = self.opts.depth;
        let outcome = self.separation_outcome(step, a, a2, sigma, tau)?;
        self.separations.push(SeparationRecord { step, depth, outcome });
        Ok(())
    }

    fn separation_outcome(
        &mut self,
        step: usize,
        a: &IndexSet,
        a2: &IndexSet,
        sigma: &FiniteName,
        tau: &FiniteName,
    ) -> Result<SeparationOutcome> {
        let x = a.intersection(a2);
        let depth = self.opts.depth;
        let p = self.matrix.clone();
        let pa = p.restrict(a)?;
        let mut pool: Vec<FiniteName> = self
            .opts
            .pool
            .iter()
            .filter(|n| n.coordinates() == &x)
            .cloned()
            .collect();
        pool.extend(sigma.values().into_iter().map(|k| FiniteName::check(x.clone(), k)));
        let Some(found) = search_separating_name(&pa, sigma, &x, &pool, depth)? else {
            return Ok(SeparationOutcome::Determined);
        };
        let k = found.test_value;
        // An A-extension deciding ǩ ∈ σ; one exists because the name is finite.
        let budget = sigma.entries().iter().map(|(c, _)| c.total_bits()).sum::<usize>() + 1;
        let mut p2 = None;
        for want in [Decision::ForcedIn, Decision::ForcedOut] {
            if let Some(r) = find_deciding_extension(&p, a, k, sigma, want, budget)? {
                p2 = Some((r, want));
                break;
            }
        }
        let Some((p2, ds)) = p2 else {
            return Ok(SeparationOutcome::Skipped {
                reason: format!("no A-extension decides {k} in sigma"),
            });
        };
        let start = self.height();
        let p2 = p2.pad_all_to(p2.height().max(start));
        let dt = forces_in(&p2, k, tau)?;
        if dt == ds.opposite() {
            self.matrix = p2;
            self.record(step, "separation", start, a);
            return Ok(SeparationOutcome::Separated {
                k,
                sigma: ds,
                tau: dt,
                case: 1,
            });
        }
        if dt == Decision::Undecided {
            let budget = tau.entries().iter().map(|(c, _)| c.total_bits()).sum::<usize>() + 1;
            let Some(q) = find_deciding_extension(&p2, a2, k, tau, ds.opposite(), budget)? else {
                return Ok(SeparationOutcome::Skipped {
                    reason: format!("no A'-extension decides {k} in tau oppositely"),
                });
            };
            let mid = p2.height();
            self.matrix = p2;
            self.record(step, "separation", start, a);
            self.matrix = q.pad_all_to(q.height().max(mid));
            self.record(step, "separation", mid, a2);
            return Ok(SeparationOutcome::Separated {
                k,
                sigma: ds,
                tau: ds.opposite(),
                case: 1,
            });
        }
        // τ agrees with σ: keep p″ on A′, go back to p on A∖A′, and decide σ the other way.
        let mut r = p2.clone();
        for i in a.difference(a2).iter() {
            r.set_column(i, p.column(i).clone())?;
        }
        if forces_in(&r, k, sigma)?.is_decided() {
            return Ok(SeparationOutcome::Skipped {
                reason: format!("{k} in sigma is decided after restoring the A-side (search depth {depth})"),
            });
        }
        let Some(q) = find_deciding_extension(&r, a, k, sigma, dt.opposite(), budget)? else {
            return Ok(SeparationOutcome::Skipped {
                reason: format!("no A-extension decides {k} in sigma against tau"),
            });
        };
        self.matrix = q.pad_all_to(q.height().max(start));
        self.record(step, "separation", start, a);
        Ok(SeparationOutcome::Separated {
            k,
            sigma: dt.opposite(),
            tau: dt,
            case: 2,
        })
    }

    fn finish(
        self,
        kind: BuildKind,
        family: ObstacleFamily,
        schedule: &RequirementSchedule,
    ) -> BlockchainResult {
        BlockchainResult {
            kind,
            matrix: self.matrix,
            family,
            schedule: schedule.clone(),
            payload: self.payload.clone(),
            marker_log: self.marker_log,
            step_log: self.step_log,
            separations: self.separations,
        }
    }
}

fn reject(step: usize, reason: impl Into<String>) -> Error {
    Error::ScheduleRejected {
        step,
        reason: reason.into(),
    }
}

/// Two columns; dense steps alternate between column 0 and column 1, and each
/// is followed by a coding of the next payload bit across both.
pub fn build_pair(schedule: &RequirementSchedule, z: &BitString, opts: &BuildOptions) -> Result<BlockchainResult> {
    let both = IndexSet::from([0, 1]);
    let family = ObstacleFamily::new(both.clone(), vec![both.clone()])?;
    let mut b = Builder::new(both.clone(), z, opts);
    for (n, step) in schedule.steps.iter().enumerate() {
        let ScheduleStep::Dense { columns, requirement } = step else {
            return Err(reject(n, "pair schedules contain only dense steps"));
        };
        let side = IndexSet::from([n % 2]);
        if columns != &side {
            return Err(reject(n, format!("expected the step to act on {side}, got {columns}")));
        }
        b.dense(n, columns, requirement)?;
        b.code(n, &both, n)?;
    }
    Ok(b.finish(BuildKind::Pair, family, schedule))
}

/// Columns `0..=ℓ` with the family given by `family`; each dense step is
/// followed by a coding of the next payload bit across every column.
pub fn build_mostowski(
    family: &ObstacleFamily,
    schedule: &RequirementSchedule,
    z: &BitString,
    opts: &BuildOptions,
) -> Result<BlockchainResult> {
    let all = family.index_set().clone();
    if all != IndexSet::range(all.len()) || all.is_empty() {
        return Err(Error::Validation(format!("columns must be 0..=l, got {all}")));
    }
    let mut b = Builder::new(all.clone(), z, opts);
    for (n, step) in schedule.steps.iter().enumerate() {
        let ScheduleStep::Dense { columns, requirement } = step else {
            return Err(reject(n, "Mostowski schedules contain only dense steps"));
        };
        if !family.is_member(columns) {
            return Err(reject(n, format!("{columns} is not in the family")));
        }
        b.dense(n, columns, requirement)?;
        b.code(n, &all, n)?;
    }
    Ok(b.finish(BuildKind::Mostowski, family.clone(), schedule))
}

/// Dense steps on members, obstacle steps coding the obstacle's next payload
/// bit, and separation steps deciding two names apart.
pub fn build_general(
    family: &ObstacleFamily,
    schedule: &RequirementSchedule,
    z: &BitString,
    opts: &BuildOptions,
) -> Result<BlockchainResult> {
    let mut b = Builder::new(family.index_set().clone(), z, opts);
    let mut occurrences: Vec<(IndexSet, usize)> = Vec::new();
    for (n, step) in schedule.steps.iter().enumerate() {
        match step {
            ScheduleStep::Dense { columns, requirement } => {
                if !family.is_member(columns) {
                    return Err(reject(n, format!("{columns} is not in the family")));
                }
                b.dense(n, columns, requirement)?;
            }
            ScheduleStep::Obstacle { columns } => {
                if !family.is_obstacle(columns) {
                    return Err(reject(n, format!("{columns} is not an obstacle")));
                }
                let seen = match occurrences.iter_mut().find(|(c, _)| c == columns) {
                    Some((_, count)) => {
                        *count += 1;
                        *count - 1
                    }
                    None => {
                        occurrences.push((columns.clone(), 1));
                        0
                    }
                };
                b.code(n, columns, seen)?;
            }
            ScheduleStep::Separation { left, right, sigma, tau } => {
                if !family.is_member(left) || !family.is_member(right) {
                    return Err(reject(n, format!("{left} and {right} must both be in the family")));
                }
                if !sigma.coordinates().is_subset(left) || !tau.coordinates().is_subset(right) {
                    return Err(reject(n, "names must live on their sides"));
                }
                b.separate(n, left, right, sigma, tau)?;
            }
        }
    }
    Ok(b.finish(BuildKind::General, family.clone(), schedule))
}

/// Rows where every column of `cols` is 1 (short columns read as 0).
pub fn all_one_rows(matrix: &MatrixCondition, cols: &IndexSet) -> Vec<bool> {
    (0..matrix.height())
        .map(|r| !cols.is_empty() && cols.iter().all(|i| matrix.column(i).bit_or_zero(r)))
        .collect()
}

/// Coding points across `cols` as `(marker_row, bit)`, found by the marker rule:
/// a marker is an all-one row whose predecessor is not all-one; the next row
/// carries the bit.
pub fn scan_markers(matrix: &MatrixCondition, cols: &IndexSet) -> Result<Vec<(usize, bool)>> {
    let ones = all_one_rows(matrix, cols);
    let mut out = Vec::new();
    let mut r = 0;
    while r < ones.len() {
        if !ones[r] {
            r += 1;
            continue;
        }
        let start = r;
        while r < ones.len() && ones[r] {
            r += 1;
        }
        if r - start > 2 {
            return Err(Error::MalformedMatrix(format!(
                "{} consecutive all-one rows from row {start} across {cols}",
                r - start
            )));
        }
        if start + 1 >= ones.len() {
            return Err(Error::MalformedMatrix(format!(
                "marker at row {start} has no bit row"
            )));
        }
        out.push((start, r - start == 2));
    }
    Ok(out)
}

/// Recover the payload bits coded across the first obstacle contained in `b`.
pub fn decode(matrix: &MatrixCondition, b: &IndexSet, family: &ObstacleFamily) -> Result<BitString> {
    let obstacle = family
        .contained_obstacle(b)
        .ok_or_else(|| Error::NotAnObstacle(b.to_vec()))?;
    if !obstacle.is_subset(matrix.index_set()) {
        return Err(Error::Domain(format!(
            "obstacle {obstacle} outside the matrix columns {}",
            matrix.index_set()
        )));
    }
    Ok(scan_markers(matrix, obstacle)?.into_iter().map(|(_, bit)| bit).collect())
}

/// Re-check a built result: uniformity, row accounting, genericity for every
/// scheduled requirement, payload recovery per obstacle, and concealment for
/// every member of the family.
pub fn verify_generic(result: &BlockchainResult, registry: &Registry) -> Report {
    let mut report = Report::new();
    let m = &result.matrix;
    let h = m.height();
    report.check(
        "uniform",
        m.is_full_height(h),
        if m.is_full_height(h) { String::new() } else { format!("columns are not all of height {h}") },
    );

    let mut next = 0;
    let mut contiguous = true;
    for rec in &result.step_log {
        contiguous &= rec.start == next && rec.end > rec.start;
        next = rec.end;
    }
    contiguous &= next == h;
    report.check("rows partitioned among steps", contiguous, "");

    for rec in &result.step_log {
        let stray: Vec<String> = (rec.start..rec.end)
            .flat_map(|r| {
                m.index_set()
                    .iter()
                    .filter(move |&i| !rec.active.contains(i) && m.column(i).bit_or_zero(r))
                    .map(move |i| format!("({r},{i})"))
            })
            .collect();
        if !stray.is_empty() {
            report.check(
                format!("step {} writes only inside {}", rec.step, rec.active),
                false,
                format!("nonzero bits at {}", stray.join(" ")),
            );
        }
    }

    for (a, spec) in result.schedule.dense_pairs() {
        let name = format!("{} met on {a}", spec.label());
        match spec.instantiate(&a, registry).and_then(|d| meets(m, &d)) {
            Ok(ok) => report.check(name, ok, ""),
            Err(e) => report.check(name, false, e.to_string()),
        }
    }

    for log in &result.marker_log {
        for e in &log.entries {
            let ones = |r: usize| log.columns.iter().all(|i| m.column(i).bit_or_zero(r));
            let bit_ok = log.columns.iter().all(|i| m.column(i).bit_or_zero(e.bit_row) == e.bit);
            let ok = e.bit_row == e.marker_row + 1
                && result.payload.get(e.payload_index) == Some(e.bit)
                && ones(e.marker_row)
                && bit_ok;
            if !ok {
                report.check(
                    format!("coding point at row {} across {}", e.marker_row, log.columns),
                    false,
                    "matrix or payload disagrees with the log",
                );
            }
        }
    }

    for b in result.family.obstacles() {
        let expected = result.expected_payload(b);
        match decode(m, b, &result.family) {
            Ok(got) => report.check(
                format!("payload recovered from {b}"),
                got == expected,
                if got == expected { format!("{got}") } else { format!("decoded {got}, expected {expected}") },
            ),
            Err(e) => report.check(format!("payload recovered from {b}"), false, e.to_string()),
        }
    }

    match result.family.members(crate::theory::DEFAULT_MEMBER_BOUND) {
        Ok(members) => {
            let mut concealed = 0;
            for c in members.iter().filter(|c| !c.is_empty()) {
                let hidden = matches!(decode(m, c, &result.family), Err(Error::NotAnObstacle(_)));
                let covered = all_one_rows(m, c).iter().enumerate().all(|(r, &one)| {
                    !one || result
                        .step_log
                        .iter()
                        .any(|rec| rec.start <= r && r < rec.end && c.is_subset(&rec.active))
                });
                if hidden && covered {
                    concealed += 1;
                } else {
                    report.check(format!("payload concealed from {c}"), false, "all-one rows outside permitted blocks");
                }
            }
            report.check("payload concealed from members", true, format!("{concealed} members checked"));
        }
        Err(e) => report.note(format!("concealment not checked: {e}")),
    }

    for s in &result.separations {
        if let SeparationOutcome::Skipped { reason } = &s.outcome {
            report.note(format!("separation at step {} skipped: {reason}", s.step));
        }
    }
    report
}
