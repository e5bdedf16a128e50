//! Seeded random inputs: families, schedules, names, requirement families,
//! sparse reference reals and product-built towers.
//!
//! Every generator takes the RNG explicitly; `rng(seed)` gives the stream
//! the CLI and the test suites use, so a seed fixes every output.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::BitString;
use crate::conditions::{IndexSet, MatrixCondition};
use crate::dense::{DenseRequirement, Registry, RequirementSchedule, RequirementSpec, ScheduleStep};
use crate::error::Result;
use crate::exact_pair::Tower;
use crate::names::FiniteName;
use crate::theory::{is_antichain, ObstacleFamily};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_bits<R: Rng>(rng: &mut R, len: usize) -> BitString {
    (0..len).map(|_| rng.gen::<bool>()).collect()
}

fn random_subset<R: Rng>(rng: &mut R, of: &IndexSet, min: usize) -> IndexSet {
    let items = of.to_vec();
    let size = rng.gen_range(min.min(items.len())..=items.len());
    items.choose_multiple(rng, size).copied().collect()
}

/// A family over `0..size` whose obstacles form an antichain of at most
/// `max_obstacles` sets, each of size at least 2.
pub fn random_family<R: Rng>(rng: &mut R, size: usize, max_obstacles: usize) -> ObstacleFamily {
    let all = IndexSet::range(size);
    let mut obstacles: Vec<IndexSet> = Vec::new();
    if size >= 2 {
        for _ in 0..rng.gen_range(0..=max_obstacles) {
            let b = random_subset(rng, &all, 2);
            let mut next = obstacles.clone();
            next.push(b);
            if is_antichain(&next) {
                obstacles = next;
            }
        }
    }
    ObstacleFamily::new_antichain(all, obstacles).expect("antichain of subsets of size 2 or more")
}

/// A nonempty member of the family's `𝒜`.
pub fn random_member<R: Rng>(rng: &mut R, family: &ObstacleFamily) -> IndexSet {
    let mut a = IndexSet::new();
    let mut order = family.index_set().to_vec();
    order.shuffle(rng);
    let target = rng.gen_range(1..=order.len().max(1));
    for i in order {
        let mut next = a.clone();
        next.insert(i);
        if family.is_member(&next) {
            a = next;
        }
        if a.len() >= target {
            break;
        }
    }
    a
}

/// A name over `coords` with up to `entries` entries of at most `bits` bits
/// per column, valued below `values`.
pub fn random_name<R: Rng>(
    rng: &mut R,
    coords: &IndexSet,
    entries: usize,
    bits: usize,
    values: usize,
) -> FiniteName {
    let list: Vec<(MatrixCondition, usize)> = (0..rng.gen_range(0..=entries))
        .map(|_| {
            let cols = coords.iter().map(|c| {
                let len = rng.gen_range(0..=bits);
                (c, random_bits(rng, len))
            });
            let cond = MatrixCondition::from_columns(coords.clone(), cols.collect::<Vec<_>>())
                .expect("columns inside coords");
            (cond, rng.gen_range(0..values.max(1)))
        })
        .collect();
    FiniteName::new(coords.clone(), list).expect("entries over coords")
}

/// A library requirement on `coords`.
pub fn random_spec<R: Rng>(rng: &mut R, coords: &IndexSet) -> RequirementSpec {
    let cols = coords.to_vec();
    let pick = rng.gen_range(0..if cols.len() >= 2 { 4 } else { 3 });
    match pick {
        0 => RequirementSpec::MinLength { n: rng.gen_range(1..=4) },
        1 => {
            let len = rng.gen_range(1..=3);
            RequirementSpec::ContainsPattern {
                w: random_bits(rng, len),
                column: *cols.choose(rng).expect("nonempty coordinates"),
            }
        }
        2 => {
            let sub = random_subset(rng, coords, 1);
            RequirementSpec::DecidesName {
                sigma: random_name(rng, &sub, 3, 3, 3),
                k: rng.gen_range(0..3),
            }
        }
        _ => {
            let two: Vec<usize> = cols.choose_multiple(rng, 2).copied().collect();
            RequirementSpec::SplitsColumns { i: two[0], j: two[1] }
        }
    }
}

/// Knobs for [`random_schedule`].
#[derive(Clone, Copy, Debug)]
pub struct ScheduleShape {
    pub steps: usize,
    pub payload_len: usize,
    /// Chance in percent that a step separates two names.
    pub separation_percent: u32,
}

/// A general schedule: dense steps on members, obstacle steps while the
/// payload lasts for that obstacle, and occasional separation steps.
pub fn random_schedule<R: Rng>(rng: &mut R, family: &ObstacleFamily, shape: ScheduleShape) -> RequirementSchedule {
    let mut used = vec![0usize; family.obstacles().len()];
    let steps = (0..rng.gen_range(1..=shape.steps.max(1)))
        .map(|_| {
            let roll = rng.gen_range(0..100);
            if roll < shape.separation_percent {
                let left = random_member(rng, family);
                let right = random_member(rng, family);
                return ScheduleStep::Separation {
                    sigma: random_name(rng, &left, 3, 2, 3),
                    tau: random_name(rng, &right, 3, 2, 3),
                    left,
                    right,
                };
            }
            let open: Vec<usize> = (0..used.len()).filter(|&j| used[j] < shape.payload_len).collect();
            if roll < 40 + shape.separation_percent && !open.is_empty() {
                let j = *open.choose(rng).expect("nonempty");
                used[j] += 1;
                return ScheduleStep::Obstacle {
                    columns: family.obstacles()[j].clone(),
                };
            }
            let columns = random_member(rng, family);
            ScheduleStep::Dense {
                requirement: random_spec(rng, &columns),
                columns,
            }
        })
        .collect();
    RequirementSchedule::new(steps)
}

/// A dense-only schedule for the pair builder: steps alternate between
/// column 0 and column 1.
pub fn random_pair_schedule<R: Rng>(rng: &mut R, steps: usize) -> RequirementSchedule {
    RequirementSchedule::new(
        (0..steps)
            .map(|n| {
                let columns = IndexSet::from([n % 2]);
                ScheduleStep::Dense {
                    requirement: random_spec(rng, &columns),
                    columns,
                }
            })
            .collect(),
    )
}

/// `count` single-column library requirements on column `label`.
pub fn random_requirement_family<R: Rng>(rng: &mut R, count: usize, label: usize) -> Vec<RequirementSpec> {
    let coords = IndexSet::from([label]);
    (0..count).map(|_| random_spec(rng, &coords)).collect()
}

/// A reference real with exactly `good` good points, each followed by at
/// least two rows before the next, so all-one runs in a primed family
/// have length at most 2.
pub fn sparse_reference<R: Rng>(rng: &mut R, good: usize, max_gap: usize) -> BitString {
    let mut y = BitString::new();
    for _ in 0..good {
        for _ in 0..rng.gen_range(1..=max_gap.max(1)) {
            y.push(false);
        }
        for _ in 0..rng.gen_range(1..=max_gap.max(1)) {
            y.push(true);
        }
        y.push(false);
    }
    for _ in 0..rng.gen_range(0..=max_gap) {
        y.push(false);
    }
    y
}

/// Columns built together so their product meets every requirement in
/// `family`. `lead` random rows come first, then each requirement is met
/// after up to `noise` more; the columns are then padded with random bits
/// to at least `min_height`.
pub fn product_tower<R: Rng>(
    rng: &mut R,
    columns: usize,
    family: &[DenseRequirement],
    noise: usize,
    lead: usize,
    min_height: usize,
) -> Result<Tower> {
    let grow = |rng: &mut R, m: &MatrixCondition, h: usize| {
        let cols: Vec<BitString> = (0..columns)
            .map(|c| {
                let col = m.column(c).clone();
                let len = h.saturating_sub(col.len());
                col.concat(&random_bits(rng, len))
            })
            .collect();
        MatrixCondition::from_slice(&cols)
    };
    let mut m = grow(rng, &MatrixCondition::new(IndexSet::range(columns)), lead);
    for d in family {
        let h = m.height() + rng.gen_range(0..=noise);
        m = grow(rng, &m, h);
        m = d.meet(&m)?.pad_uniform();
    }
    let h = m.height().max(min_height);
    let m = grow(rng, &m, h);
    Tower::new(
        (0..columns).map(|c| m.column(c).clone()).collect(),
        format!("product-built against {} requirements after {lead} random rows", family.len()),
    )
}

/// Inputs for an exact-pair run on `columns` tower columns.
#[derive(Clone, Debug)]
pub struct ExactInstance {
    pub tower: Tower,
    pub dense: Vec<(IndexSet, RequirementSpec)>,
    pub pairs: Vec<(FiniteName, FiniteName)>,
}

pub fn random_exact_instance<R: Rng>(
    rng: &mut R,
    columns: usize,
    dense: usize,
    pairs: usize,
    values: usize,
) -> Result<ExactInstance> {
    let all = IndexSet::range(columns);
    let dense: Vec<(IndexSet, RequirementSpec)> = (0..dense)
        .map(|_| {
            let a = random_subset(rng, &all, 1);
            let spec = random_spec(rng, &a);
            (a, spec)
        })
        .collect();
    let pairs: Vec<(FiniteName, FiniteName)> = (0..pairs)
        .map(|_| {
            let a = random_subset(rng, &all, 1);
            let b = random_subset(rng, &all, 1);
            (random_name(rng, &a, 3, 3, values), random_name(rng, &b, 3, 3, values))
        })
        .collect();
    let reqs = instantiate_all(&dense, &Registry::default())?;
    let tower = product_tower(rng, columns, &reqs, 2, 64, 8)?;
    Ok(ExactInstance { tower, dense, pairs })
}

/// A Mostowski schedule: dense steps on random members, using only
/// `MinLength` when the member is every column so that no dense row is
/// all-one across the coded columns.
pub fn random_mostowski_schedule<R: Rng>(rng: &mut R, family: &ObstacleFamily, steps: usize) -> RequirementSchedule {
    RequirementSchedule::new(
        (0..steps)
            .map(|_| {
                let columns = random_member(rng, family);
                let requirement = if &columns == family.index_set() {
                    RequirementSpec::MinLength { n: rng.gen_range(1..=4) }
                } else {
                    random_spec(rng, &columns)
                };
                ScheduleStep::Dense { columns, requirement }
            })
            .collect(),
    )
}

/// Rows for the mutable blockchain on `n` columns: random reals and a
/// sparse reference real with `good` good points for every `A` with `|A| ≥ 2`.
pub fn random_mutable_rows<R: Rng>(
    rng: &mut R,
    n: usize,
    good: usize,
) -> std::collections::BTreeMap<IndexSet, crate::surgery::MutableRow> {
    let subsets: Vec<IndexSet> = (0u64..1 << n)
        .map(IndexSet::from_mask)
        .filter(|a| a.len() >= 2)
        .collect();
    let ys: Vec<BitString> = subsets.iter().map(|_| sparse_reference(rng, good, 3)).collect();
    let len = ys.iter().map(BitString::len).max().unwrap_or(0);
    subsets
        .into_iter()
        .zip(ys)
        .map(|(a, y)| {
            let xs = (0..n).map(|_| random_bits(rng, len)).collect();
            (a, crate::surgery::MutableRow { xs, y: y.padded_to(len) })
        })
        .collect()
}

/// Instantiate specs on their own coordinates.
pub fn instantiate_all(specs: &[(IndexSet, RequirementSpec)], registry: &Registry) -> Result<Vec<DenseRequirement>> {
    specs.iter().map(|(c, s)| s.instantiate(c, registry)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_fix_outputs() {
        let a = random_family(&mut rng(7), 5, 4);
        let b = random_family(&mut rng(7), 5, 4);
        assert_eq!(a, b);
        let shape = ScheduleShape { steps: 20, payload_len: 4, separation_percent: 10 };
        assert_eq!(random_schedule(&mut rng(3), &a, shape), random_schedule(&mut rng(3), &a, shape));
    }

    #[test]
    fn generated_objects_are_valid() {
        let mut r = rng(11);
        for _ in 0..50 {
            let fam = random_family(&mut r, 6, 4);
            assert!(fam.obstacles().len() <= 4);
            let a = random_member(&mut r, &fam);
            assert!(!a.is_empty() && fam.is_member(&a));
            let y = sparse_reference(&mut r, 5, 3);
            let gp = crate::surgery::good_points(&y);
            assert_eq!(gp.good.len(), 5);
            assert!(gp.good.windows(2).all(|w| w[1] >= w[0] + 3));
        }
    }
}
