//! Seeded workloads shared by the benchmarks.

use cohenmv_core::gen::{self, ExactInstance, ScheduleShape};
use cohenmv_core::theory::{parse_sentence, ObstacleFamily, Sentence};
use cohenmv_core::{BitString, DenseRequirement, IndexSet, Registry, RequirementSchedule, Result};

/// A general-blockchain session on `size` columns.
pub struct Session {
    pub family: ObstacleFamily,
    pub schedule: RequirementSchedule,
    pub payload: BitString,
}

pub fn session(seed: u64, size: usize, steps: usize, payload: usize) -> Session {
    let mut rng = gen::rng(seed);
    let family = gen::random_family(&mut rng, size, 4);
    let payload = gen::random_bits(&mut rng, payload);
    let shape = ScheduleShape {
        steps,
        payload_len: payload.len(),
        separation_percent: 10,
    };
    let schedule = gen::random_schedule(&mut rng, &family, shape);
    Session {
        family,
        schedule,
        payload,
    }
}

/// `count` single-column requirements on column 0.
pub fn column_requirements(seed: u64, count: usize) -> Result<Vec<DenseRequirement>> {
    let specs = gen::random_requirement_family(&mut gen::rng(seed), count, 0);
    let col = IndexSet::from([0]);
    let registry = Registry::default();
    specs.iter().map(|s| s.instantiate(&col, &registry)).collect()
}

pub fn exact_instance(seed: u64, columns: usize) -> Result<(ExactInstance, Vec<DenseRequirement>)> {
    let inst = gen::random_exact_instance(&mut gen::rng(seed), columns, 20, 10, 8)?;
    let family = gen::instantiate_all(&inst.dense, &Registry::default())?;
    Ok((inst, family))
}

pub fn sentences() -> Vec<Sentence> {
    [
        "EXISTS x0,x1 : NOT A(x0,x1)",
        "EXISTS x0,x1 : x0 <= x1 AND NOT A(x0,x1)",
        "EXISTS x0,x1,x2 : A(x0,x1) AND A(x1,x2) AND A(x0,x2) AND NOT A(x0,x1,x2)",
        "EXISTS x0,x1,x2,x3 : x0 = x1 MEET x2 AND NOT A(x1,x2) AND x3 <= x0 AND NOT x0 <= x3",
    ]
    .iter()
    .map(|s| parse_sentence(s).expect("fixed sentences parse"))
    .collect()
}
