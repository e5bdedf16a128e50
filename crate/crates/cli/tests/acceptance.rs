//! The ten acceptance criteria, each timed against its limit. Prints one
//! line per criterion and exits nonzero if any fails.

#[path = "../../core/tests/oracles/mod.rs"]
mod oracles;

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use cohenmv_core::blockchain::{self, all_one_rows, scan_markers, BuildOptions};
use cohenmv_core::gen::{self, ScheduleShape};
use cohenmv_core::theory::{
    check_star_embedding, check_witness, decide_sentence, downset_embedding, parse_sentence, FinitePoset,
    ObstacleFamily, Sentence, Verdict, DEFAULT_MEMBER_BOUND,
};
use cohenmv_core::{
    build_exact_pair, build_exact_partner, build_mutable_blockchain, decode_surgery, evaluate, forces_in,
    immunize, verify_exact_pair, verify_mutable, BitString, DenseRequirement, DiagEntry, Error,
    FiniteName, IndexSet, MatrixCondition, Registry, RequirementSpec, ScheduleStep, stride_extract,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, Option<u64>, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn failed_checks(r: &cohenmv_core::Report) -> String {
    r.failures().map(|f| format!("{}: {}", f.check, f.detail)).collect::<Vec<_>>().join("; ")
}

fn err(e: Error) -> String {
    e.to_string()
}

/// Every subset-closed family over `0..m` containing the singletons, as its
/// members of size at least 2. Sets are decided in order of size, and a set
/// may join only when all its subsets one smaller already have.
fn downset_families(m: usize) -> Vec<Vec<u64>> {
    let mut big: Vec<u64> = (0u64..1 << m).filter(|s| s.count_ones() >= 2).collect();
    big.sort_by_key(|s| (s.count_ones(), *s));
    fn go(big: &[u64], j: usize, chosen: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if j == big.len() {
            out.push(chosen.clone());
            return;
        }
        go(big, j + 1, chosen, out);
        let s = big[j];
        let closed = (0..64)
            .filter(|b| s >> b & 1 == 1)
            .map(|b| s & !(1 << b))
            .all(|t| t.count_ones() < 2 || chosen.contains(&t));
        if closed {
            chosen.push(s);
            go(big, j + 1, chosen, out);
            chosen.pop();
        }
    }
    let mut out = Vec::new();
    go(&big, 0, &mut Vec::new(), &mut out);
    out
}

fn family_of(m: usize, members: &[u64]) -> Result<ObstacleFamily, String> {
    let mut sets: Vec<IndexSet> = vec![IndexSet::new()];
    sets.extend((0..m).map(|i| IndexSet::from([i])));
    sets.extend(members.iter().map(|&s| IndexSet::from_mask(s)));
    ObstacleFamily::from_members(IndexSet::range(m), &sets).map_err(err)
}

fn blockchain_soundness() -> Outcome {
    let registry = Registry::default();
    let mut decoded_bits = 0;
    for seed in 0..500u64 {
        let mut rng = gen::rng(seed);
        let size = 1 + (seed % 6) as usize;
        let family = gen::random_family(&mut rng, size, 4);
        let z = gen::random_bits(&mut rng, (seed % 17) as usize);
        let shape = ScheduleShape {
            steps: 40,
            payload_len: z.len(),
            separation_percent: 10,
        };
        let schedule = gen::random_schedule(&mut rng, &family, shape);
        let r = blockchain::build_general(&family, &schedule, &z, &BuildOptions::default())
            .map_err(|e| format!("seed {seed}: {e}"))?;
        let report = blockchain::verify_generic(&r, &registry);
        ensure(report.passed(), || format!("seed {seed}: {}", failed_checks(&report)))?;

        for (a, spec) in schedule.dense_pairs() {
            let d = spec.instantiate(&a, &registry).map_err(err)?;
            let part = r.matrix.restrict(&a).map_err(err)?;
            ensure(d.contains(&part).map_err(err)?, || format!("seed {seed}: {} not met on {a}", spec.label()))?;
        }
        for b in family.obstacles() {
            let steps = schedule
                .steps
                .iter()
                .filter(|s| matches!(s, ScheduleStep::Obstacle { columns } if columns == b))
                .count();
            let got = blockchain::decode(&r.matrix, b, &family).map_err(err)?;
            ensure(got == z.prefix(steps), || format!("seed {seed}: {b} decoded {got}, payload {z}"))?;
            decoded_bits += got.len();
        }
        for a in family.members(DEFAULT_MEMBER_BOUND).map_err(err)? {
            let hidden = matches!(blockchain::decode(&r.matrix, &a, &family), Err(Error::NotAnObstacle(_)));
            ensure(hidden, || format!("seed {seed}: member {a} decodes"))?;
        }
    }
    Ok(format!("500 sessions, {decoded_bits} payload bits recovered"))
}

fn mostowski_pattern() -> Outcome {
    let mut families = 0;
    for l in 0..=4usize {
        let m = l + 1;
        let all = IndexSet::range(m);
        for (j, members) in downset_families(m).iter().enumerate() {
            let family = family_of(m, members)?;
            let mut rng = gen::rng((l * 100_000 + j) as u64);
            let z = gen::random_bits(&mut rng, 1 + j % 4);
            let schedule = gen::random_mostowski_schedule(&mut rng, &family, z.len());
            let r = blockchain::build_mostowski(&family, &schedule, &z, &BuildOptions::default()).map_err(err)?;
            let ones = all_one_rows(&r.matrix, &all);
            let starts: Vec<usize> = (0..ones.len()).filter(|&i| ones[i] && (i == 0 || !ones[i - 1])).collect();
            let markers: Vec<usize> = r
                .marker_log
                .iter()
                .filter(|log| log.columns == all)
                .flat_map(|log| log.entries.iter().map(|e| e.marker_row))
                .collect();
            ensure(starts == markers, || format!("l={l} family {j}: all-one runs {starts:?}, markers {markers:?}"))?;
            let spelled: BitString = scan_markers(&r.matrix, &all).map_err(err)?.into_iter().map(|(_, b)| b).collect();
            ensure(spelled == z, || format!("l={l} family {j}: spelled {spelled}, payload {z}"))?;
            families += 1;
        }
    }
    Ok(format!("{families} families"))
}

/// Single-column library requirements with open members, on column 0.
fn immunization_library() -> Result<Vec<DenseRequirement>, String> {
    let col = IndexSet::from([0]);
    let registry = Registry::default();
    let mut specs: Vec<RequirementSpec> = (1..=6).map(|n| RequirementSpec::MinLength { n }).collect();
    specs.extend(BitString::all_up_to(3).filter(|w| !w.is_empty()).map(|w| RequirementSpec::ContainsPattern { w, column: 0 }));
    let mut rng = gen::rng(3);
    for _ in 0..8 {
        let sigma = gen::random_name(&mut rng, &col, 3, 3, 3);
        for k in 0..3 {
            specs.push(RequirementSpec::DecidesName { sigma: sigma.clone(), k });
        }
    }
    specs.push(RequirementSpec::Plugin { name: "one-after-first".into() });
    specs.iter().map(|s| s.instantiate(&col, &registry).map_err(err)).collect()
}

fn immunization() -> Outcome {
    let library = immunization_library()?;
    let mut checked = 0;
    for d in &library {
        for p in BitString::all_up_to(5) {
            let q = immunize(&p, d).map_err(err)?;
            ensure(q.extends(&p), || format!("{d:?}: {q} does not extend {p}"))?;
            let tail = &q.bits()[p.len()..];
            for low in BitString::all_of_len(p.len()) {
                let mut v = low.bits().to_vec();
                v.extend_from_slice(tail);
                let m = MatrixCondition::single(BitString::from_bits(v));
                ensure(d.contains(&m).map_err(err)?, || format!("{d:?}: {p} -> {q} fails at low part {low}"))?;
                checked += 1;
            }
        }
    }
    Ok(format!("{} requirements, {checked} modifications", library.len()))
}

fn covert_graft() -> Outcome {
    let registry = Registry::default();
    let mut grafts = 0;
    for seed in 0..200u64 {
        let mut rng = gen::rng(10_000 + seed);
        let specs = gen::random_requirement_family(&mut rng, 20, 0);
        let family: Vec<DenseRequirement> = specs
            .iter()
            .map(|s| s.instantiate(&IndexSet::from([0]), &registry).map_err(err))
            .collect::<Result<_, _>>()?;
        let (c, d) = cohenmv_core::surgery::build_immune_pair(&family, 3, &mut rng).map_err(err)?;
        let at = d.ones_positions();
        let mut gs = vec![BitString::zeros(at.len()), BitString::ones(at.len())];
        gs.extend((0..4).map(|_| gen::random_bits(&mut rng, at.len())));
        for g in gs {
            let mut x = c.clone();
            for (j, &i) in at.iter().enumerate() {
                x.set(i, g.get(j).expect("sized to the ones of d"));
            }
            let m = MatrixCondition::single(x);
            for (req, spec) in family.iter().zip(&specs) {
                ensure(req.contains(&m).map_err(err)?, || format!("seed {seed}: graft misses {}", spec.label()))?;
            }
            grafts += 1;
        }
    }
    Ok(format!("{grafts} grafts against 20 requirements"))
}

fn mutable_blockchain() -> Outcome {
    let mut runs = 0;
    for n in 1..=3usize {
        for (j, members) in downset_families(n).iter().enumerate() {
            let family = family_of(n, members)?;
            for z in BitString::all_up_to(8) {
                let seed = (n * 1000 + j) as u64 * 1024 + z.len() as u64;
                let rows = gen::random_mutable_rows(&mut gen::rng(seed), n, z.len());
                let mb = build_mutable_blockchain(n, &rows, &family, &z).map_err(err)?;
                let report = verify_mutable(&mb, &family, &z);
                ensure(report.passed(), || format!("n={n} family {j} z={z}: {}", failed_checks(&report)))?;
                let at = mb.y.ones_positions();
                let operated: Vec<BitString> = mb
                    .c
                    .iter()
                    .map(|c| {
                        let mut x = c.clone();
                        for (j, &i) in at.iter().enumerate() {
                            x.set(i, mb.z_family.get(j).expect("one bit per 1 of y"));
                        }
                        x
                    })
                    .collect();
                for (j, row) in mb.rows.iter().enumerate() {
                    let a = &row.set;
                    ensure(!cohenmv_core::surgery::has_consecutive_all_one_rows(&row.primed.primed), || {
                        format!("n={n} {a}: consecutive all-one rows")
                    })?;
                    let picked: Vec<BitString> =
                        a.iter().map(|k| stride_extract(&operated[k], mb.rows.len(), j)).collect();
                    if family.is_member(a) {
                        ensure(picked == row.primed.primed, || format!("n={n} z={z}: member {a} was altered"))?;
                    } else {
                        let got = decode_surgery(&picked, &IndexSet::range(a.len())).map_err(err)?;
                        ensure(got.z == z && !got.incomplete, || format!("n={n} {a}: decoded {}, payload {z}", got.z))?;
                    }
                }
                runs += 1;
            }
        }
    }
    Ok(format!("{runs} builds"))
}

fn forcing_engine() -> Outcome {
    let single = |b: &BitString| MatrixCondition::single(b.clone());
    let strings: Vec<BitString> = BitString::all_up_to(3).collect();
    let pool: Vec<(MatrixCondition, usize)> = strings.iter().flat_map(|s| [(single(s), 0), (single(s), 1)]).collect();
    let mut names = vec![Vec::new()];
    let mut frontier: Vec<(Vec<usize>, usize)> = vec![(Vec::new(), 0)];
    for _ in 0..3 {
        let mut next = Vec::new();
        for (chosen, from) in &frontier {
            for j in *from..pool.len() {
                let mut c = chosen.clone();
                c.push(j);
                names.push(c.clone());
                next.push((c, j + 1));
            }
        }
        frontier = next;
    }
    let mut checked = 0;
    for chosen in &names {
        let sigma = FiniteName::new(IndexSet::from([0]), chosen.iter().map(|&j| pool[j].clone())).map_err(err)?;
        let mut decided: BTreeMap<(usize, usize), _> = BTreeMap::new();
        for (pi, p) in strings.iter().enumerate() {
            for k in 0..2 {
                let got = forces_in(&single(p), k, &sigma).map_err(err)?;
                let want = oracles::filter_decision(&single(p), k, &sigma, 4);
                ensure(got == want, || format!("{sigma:?} at {p} for {k}: {got:?}, oracle {want:?}"))?;
                decided.insert((pi, k), got);
                checked += 1;
            }
        }
        for (pi, p) in strings.iter().enumerate() {
            for (qi, q) in strings.iter().enumerate().filter(|(_, q)| q.extends(p)) {
                for k in 0..2 {
                    let d = decided[&(pi, k)];
                    ensure(!d.is_decided() || decided[&(qi, k)] == d, || format!("{sigma:?}: {p} to {q} not monotone"))?;
                }
            }
        }
    }
    Ok(format!("{} names, {checked} decisions", names.len()))
}

fn exact_pair() -> Outcome {
    let registry = Registry::default();
    let horizon = 8;
    let mut runs = 0;
    let (mut diagonalized, mut skipped) = (0, 0);
    for columns in 1..=4usize {
        for seed in 0..5u64 {
            let inst = gen::random_exact_instance(&mut gen::rng(seed * 10 + columns as u64), columns, 20, 10, horizon)
                .map_err(err)?;
            let family = gen::instantiate_all(&inst.dense, &registry).map_err(err)?;
            let both = build_exact_pair(&inst.tower, &family, &inst.pairs, horizon).map_err(err)?;
            let partner =
                build_exact_partner(&inst.tower, &inst.tower.as_matrix(), &family, &inst.pairs, horizon).map_err(err)?;
            for (label, result) in [("pair", &both), ("partner", &partner)] {
                let at = format!("{label}, {columns} columns, seed {seed}");
                let report = verify_exact_pair(result, &inst.tower, &family, &inst.pairs, horizon);
                ensure(report.passed(), || format!("{at}: {}", failed_checks(&report)))?;
                for entry in &result.diag_log {
                    let (sigma, tau) = &inst.pairs[entry.pair()];
                    let es = evaluate(&result.d0, sigma, horizon).map_err(err)?;
                    let et = evaluate(&result.d1, tau, horizon).map_err(err)?;
                    match entry {
                        DiagEntry::Diagonalized { k, .. } => {
                            ensure(es.members.contains(k) != et.members.contains(k), || {
                                format!("{at}: pair {} agrees at {k}", entry.pair())
                            })?;
                            diagonalized += 1;
                        }
                        DiagEntry::Skipped { columns: n, value, .. } => {
                            let frozen = IndexSet::range(*n);
                            let rederive = |m: &MatrixCondition, name: &FiniteName| -> Result<Vec<usize>, String> {
                                let part = m.restrict(&frozen.intersection(m.index_set())).map_err(err)?;
                                let part = part.lift(m.index_set()).map_err(err)?;
                                Ok((0..horizon)
                                    .filter(|&k| forces_in(&part, k, name).is_ok_and(|d| d == cohenmv_core::Decision::ForcedIn))
                                    .collect())
                            };
                            ensure(
                                &rederive(&result.d0, sigma)? == value && &rederive(&result.d1, tau)? == value,
                                || format!("{at}: skipped pair {} does not re-derive {value:?}", entry.pair()),
                            )?;
                            skipped += 1;
                        }
                    }
                }
            }
            runs += 2;
        }
    }
    Ok(format!("{runs} runs, {diagonalized} diagonalized, {skipped} skipped"))
}

fn decision_procedure() -> Outcome {
    let v = 3;
    let oracle = oracles::TheoryOracle::new(v, 4);
    let lits = oracle.literals.clone();
    let mut checked = 0;
    let mut stack: Vec<(Vec<usize>, usize)> = vec![(Vec::new(), 0)];
    while let Some((chosen, from)) = stack.pop() {
        if !chosen.is_empty() {
            let mask = chosen.iter().fold(0u64, |a, &j| a | 1 << j);
            let s = Sentence::with_numbered_variables(v, chosen.iter().map(|&j| lits[j].clone()).collect()).map_err(err)?;
            let verdict = decide_sentence(&s).map_err(err)?;
            ensure(verdict.is_sat() == oracle.sat(mask), || format!("{s}: solver and oracle disagree"))?;
            if let Verdict::Sat { witness } = &verdict {
                ensure(check_witness(&s, witness), || format!("{s}: witness fails"))?;
            }
            checked += 1;
        }
        if chosen.len() < 4 {
            for j in from..lits.len() {
                let mut next = chosen.clone();
                next.push(j);
                stack.push((next, j + 1));
            }
        }
    }
    for (text, sat) in [
        ("EXISTS x0,x1 : NOT A(x0,x1)", true),
        ("EXISTS x0,x1 : x0 <= x1 AND NOT A(x0,x1)", false),
        ("EXISTS x0,x1,x2 : A(x0,x1) AND A(x1,x2) AND A(x0,x2) AND NOT A(x0,x1,x2)", true),
    ] {
        let s = parse_sentence(text).map_err(err)?;
        match decide_sentence(&s).map_err(err)? {
            Verdict::Sat { witness } => ensure(sat && check_witness(&s, &witness), || format!("{text}: unexpected SAT"))?,
            Verdict::Unsat => ensure(!sat, || format!("{text}: unexpected UNSAT"))?,
        }
    }
    Ok(format!("{checked} sentences"))
}

fn embeddings() -> Outcome {
    let (mut posets, mut semilattices) = (0, 0);
    for n in 1..=5 {
        for leq in oracles::bottomed_posets(n) {
            let names = (0..n).map(|i| format!("p{i}")).collect();
            let p = FinitePoset::new(names, leq).map_err(err)?;
            let e = downset_embedding(&p).map_err(err)?;
            let (q, _, f) = e.target().map_err(err)?;
            let report = check_star_embedding(&f, &p, &q).map_err(err)?;
            ensure(report.passed(), || format!("{p:?}: {:?}", report.violations))?;
            if p.is_meet_semilattice() {
                for a in 0..n {
                    for b in 0..n {
                        let m = p.meet(a, b).ok_or("semilattice without a meet")?;
                        ensure(e.images[m] == e.images[a].intersection(&e.images[b]), || {
                            format!("{p:?}: meet of {a},{b} not preserved")
                        })?;
                    }
                }
                semilattices += 1;
            }
            posets += 1;
        }
    }
    Ok(format!("{posets} posets, {semilattices} meet-semilattices"))
}

/// Run the CLI pipeline in `dir` and return every output, stdout included.
fn pipeline(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let bin = env!("CARGO_BIN_EXE_cohenmv");
    let runs: &[&[&str]] = &[
        &["build", "general", "--seed", "11", "--columns", "5", "--payload", "10110", "--out", "general.json"],
        &["build", "general", "--obstacles", r#"{"I":[0,1,2],"B":[[0,1]]}"#, "--payload", "1", "--out", "m.json"],
        &["decode", "--matrix", "m.json", "--columns", "0,1"],
        &["build", "pair", "--seed", "4", "--payload", "0110", "--out", "pair.json"],
        &["build", "mostowski", "--seed", "4", "--obstacles", r#"{"I":[0,1,2],"B":[[0,1,2]]}"#, "--payload", "011", "--out", "mostowski.json"],
        &["verify", "--matrix", "general.json"],
        &["render", "--input", "general.json", "--format", "ascii", "--out", "general.txt"],
        &["render", "--input", "pair.json", "--format", "svg", "--out", "pair.svg"],
        &["surgery", "prime", "--xs", "0110101,1011001,1110000", "--y", "0110100", "--out", "primed.json"],
        &["render", "--input", "primed.json", "--out", "primed.txt"],
        &["surgery", "mutable", "--n", "3", "--payload", "1011", "--seed", "9", "--out", "mutable.json"],
        &["surgery", "verify", "--input", "mutable.json"],
        &["exactpair", "build", "--seed", "2", "--columns", "3", "-K", "8", "--out", "exact.json"],
        &["exactpair", "partner", "--seed", "2", "--columns", "3", "-K", "8", "--out", "partner.json"],
        &["exactpair", "verify", "--input", "exact.json"],
        &["theory", "decide", "EXISTS x0,x1 : NOT A(x0,x1)"],
    ];
    let mut outputs = Vec::new();
    for (i, args) in runs.iter().enumerate() {
        let out = Command::new(bin).args(*args).current_dir(dir).output().map_err(|e| e.to_string())?;
        ensure(out.status.success(), || {
            format!("`{}` exited {:?}: {}", args.join(" "), out.status.code(), String::from_utf8_lossy(&out.stderr))
        })?;
        outputs.push((format!("stdout {i}"), out.stdout));
    }
    let mut files: Vec<_> = std::fs::read_dir(dir).map_err(|e| e.to_string())?.collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    files.sort_by_key(|f| f.file_name());
    for f in files {
        outputs.push((f.file_name().to_string_lossy().into_owned(), std::fs::read(f.path()).map_err(|e| e.to_string())?));
    }
    Ok(outputs)
}

fn determinism() -> Outcome {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let first = pipeline(a.path())?;
    let second = pipeline(b.path())?;
    ensure(first.len() == second.len(), || "different sets of outputs".into())?;
    for ((name, x), (_, y)) in first.iter().zip(&second) {
        ensure(x == y, || format!("{name} differs between runs"))?;
    }
    Ok(format!("{} outputs identical", first.len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("blockchain soundness", Some(10), blockchain_soundness),
        ("Mostowski pattern", Some(5), mostowski_pattern),
        ("immunization", Some(5), immunization),
        ("covert graft", Some(10), covert_graft),
        ("priming and mutable blockchain", Some(10), mutable_blockchain),
        ("forcing engine against oracle", Some(5), forcing_engine),
        ("exact pair", Some(10), exact_pair),
        ("decision procedure", Some(30), decision_procedure),
        ("embeddings", Some(30), embeddings),
        ("CLI determinism", None, determinism),
    ];
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        let within = limit.is_none_or(|s| took < Duration::from_secs(s));
        let budget = limit.map_or("no limit".to_string(), |s| format!("limit {s}s"));
        let verdict = match (&outcome, within) {
            (Ok(_), true) => "PASS",
            _ => "FAIL",
        };
        let detail = match &outcome {
            Ok(d) if within => d.clone(),
            Ok(d) => format!("{d}; over time"),
            Err(e) => e.clone(),
        };
        println!("criterion {:>2}: {verdict} {name} ({:.2}s, {budget}) {detail}", i + 1, took.as_secs_f64());
        if verdict == "FAIL" {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} of 10 criteria failed");
        std::process::exit(1);
    }
    println!("all 10 criteria passed");
}
