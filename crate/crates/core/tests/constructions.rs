use cohenmv_core::blockchain::{build_general, build_mostowski, build_pair, verify_generic, BlockchainResult, BuildOptions};
use cohenmv_core::gen::{self, ScheduleShape};
use cohenmv_core::theory::ObstacleFamily;
use cohenmv_core::{
    build_exact_pair, build_exact_partner, build_mutable_blockchain, verify_exact_pair, verify_mutable, BitString,
    ExactPairResult, IndexSet, Registry,
};

#[test]
fn seeded_general_sessions_verify_and_survive_json() {
    for seed in 0..40 {
        let mut rng = gen::rng(seed);
        let family = gen::random_family(&mut rng, 5, 3);
        let z = gen::random_bits(&mut rng, 8);
        let shape = ScheduleShape {
            steps: 30,
            payload_len: z.len(),
            separation_percent: 15,
        };
        let schedule = gen::random_schedule(&mut rng, &family, shape);
        let r = build_general(&family, &schedule, &z, &BuildOptions::default()).unwrap();
        assert!(verify_generic(&r, &Registry::default()).passed(), "seed {seed}");
        let back: BlockchainResult = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back, r);
    }
}

#[test]
fn pair_and_mostowski_builds_verify() {
    let z = BitString::from("0110");
    let schedule = gen::random_pair_schedule(&mut gen::rng(1), z.len());
    let r = build_pair(&schedule, &z, &BuildOptions::default()).unwrap();
    assert!(verify_generic(&r, &Registry::default()).passed());

    let family = ObstacleFamily::new(IndexSet::range(3), vec![IndexSet::range(3)]).unwrap();
    let schedule = gen::random_mostowski_schedule(&mut gen::rng(2), &family, z.len());
    let r = build_mostowski(&family, &schedule, &z, &BuildOptions::default()).unwrap();
    assert!(verify_generic(&r, &Registry::default()).passed());
}

#[test]
fn same_seed_same_build() {
    let build = || {
        let mut rng = gen::rng(99);
        let family = gen::random_family(&mut rng, 6, 4);
        let shape = ScheduleShape {
            steps: 40,
            payload_len: 16,
            separation_percent: 10,
        };
        let schedule = gen::random_schedule(&mut rng, &family, shape);
        build_general(&family, &schedule, &BitString::from("1011001110001011"), &BuildOptions::default()).unwrap()
    };
    assert_eq!(build(), build());
}

#[test]
fn mutable_blockchain_with_two_obstacles() {
    let family = ObstacleFamily::new(IndexSet::range(3), vec![IndexSet::from([0, 1]), IndexSet::from([1, 2])]).unwrap();
    let z = BitString::from("110100");
    let rows = gen::random_mutable_rows(&mut gen::rng(8), 3, z.len());
    let mb = build_mutable_blockchain(3, &rows, &family, &z).unwrap();
    let report = verify_mutable(&mb, &family, &z);
    assert!(report.passed(), "{report}");
    // Flipping any one bit of the family-wide payload is caught somewhere.
    let mut tampered = false;
    for j in 0..mb.z_family.len() {
        let mut t = mb.clone();
        t.z_family.set(j, !mb.z_family.get(j).unwrap());
        tampered |= !verify_mutable(&t, &family, &z).passed();
    }
    assert!(tampered);
}

#[test]
fn exact_pairs_across_tower_widths() {
    for columns in 1..=4 {
        let inst = gen::random_exact_instance(&mut gen::rng(columns as u64), columns, 20, 10, 8).unwrap();
        let family = gen::instantiate_all(&inst.dense, &Registry::default()).unwrap();
        let r = build_exact_pair(&inst.tower, &family, &inst.pairs, 8).unwrap();
        assert!(verify_exact_pair(&r, &inst.tower, &family, &inst.pairs, 8).passed());
        let back: ExactPairResult = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back, r);
        let p = build_exact_partner(&inst.tower, &inst.tower.as_matrix(), &family, &inst.pairs, 8).unwrap();
        assert!(verify_exact_pair(&p, &inst.tower, &family, &inst.pairs, 8).passed());
    }
}
