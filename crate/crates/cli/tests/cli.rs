use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cohenmv"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn build_decode_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("s.json"), r#"{"steps":[{"step":"obstacle","columns":[0,1]}]}"#).unwrap();
    let built = run(
        dir.path(),
        &["build", "general", "--obstacles", r#"{"I":[0,1,2],"B":[[0,1]]}"#, "--payload", "1", "--schedule", "s.json", "--out", "m.json"],
    );
    assert_eq!(built.status.code(), Some(0), "{}", String::from_utf8_lossy(&built.stderr));
    assert!(dir.path().join("m.json").exists());

    let decoded = run(dir.path(), &["decode", "--matrix", "m.json", "--columns", "0,1"]);
    assert_eq!(decoded.status.code(), Some(0));
    assert_eq!(stdout(&decoded).trim(), "1");

    let verified = run(dir.path(), &["verify", "--result", "m.json"]);
    assert_eq!(verified.status.code(), Some(0), "{}", stdout(&verified));
}

#[test]
fn decoding_a_member_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    run(dir.path(), &["build", "general", "--obstacles", r#"{"I":[0,1,2],"B":[[0,1]]}"#, "--payload", "1", "--out", "m.json"]);
    let o = run(dir.path(), &["decode", "--matrix", "m.json", "--columns", "0,2"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn tampered_results_fail_verification() {
    let dir = tempfile::tempdir().unwrap();
    run(dir.path(), &["build", "pair", "--payload", "0110", "--seed", "3", "--out", "p.json"]);
    let text = std::fs::read_to_string(dir.path().join("p.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["payload"] = serde_json::json!("1001");
    std::fs::write(dir.path().join("bad.json"), v.to_string()).unwrap();
    assert_eq!(run(dir.path(), &["verify", "--matrix", "bad.json"]).status.code(), Some(1));
}

#[test]
fn theory_decisions() {
    let dir = tempfile::tempdir().unwrap();
    let unsat = run(dir.path(), &["theory", "decide", "EXISTS x0,x1 : x0 <= x1 AND NOT A(x0,x1)"]);
    assert_eq!(unsat.status.code(), Some(0));
    assert_eq!(stdout(&unsat).trim(), "UNSAT");

    let sat = run(dir.path(), &["theory", "decide", "EXISTS x0,x1 : NOT A(x0,x1)"]);
    let out = stdout(&sat);
    assert!(out.starts_with("SAT\n"));
    let witness: serde_json::Value = serde_json::from_str(&out[4..]).unwrap();
    assert_eq!(witness["family"]["B"], serde_json::json!([[0, 1]]));

    let undeclared = run(dir.path(), &["theory", "decide", "EXISTS x0 : x0 <= x1"]);
    assert_eq!(undeclared.status.code(), Some(2));
}

#[test]
fn embeddings_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let chain2 = r#"{"elements":["0","a"],"order":[["0","a"]]}"#;
    let chain3 = r#"{"elements":["0","m","t"],"order":[["0","m"],["m","t"]]}"#;
    std::fs::write(dir.path().join("p.json"), chain2).unwrap();
    let embed = run(dir.path(), &["theory", "embed", "--poset", "p.json"]);
    assert_eq!(embed.status.code(), Some(0), "{}", String::from_utf8_lossy(&embed.stderr));
    let good = run(dir.path(), &["theory", "check-embedding", "--poset", chain2, "--target", chain3, "--map", r#"{"0":"0","a":"m"}"#]);
    assert_eq!(good.status.code(), Some(0), "{}", String::from_utf8_lossy(&good.stderr));
}

#[test]
fn surgery_commands() {
    let dir = tempfile::tempdir().unwrap();
    let g = run(dir.path(), &["surgery", "graft", "--f", "0000", "--g", "11", "--positions", "1,3"]);
    assert_eq!(stdout(&g).trim(), "0101");
    let s = run(dir.path(), &["surgery", "substitute", "--x", "10101", "--z", "1", "--y", "10100"]);
    assert_eq!(stdout(&s).trim(), "11101");
    let i = run(dir.path(), &["surgery", "immunize", "--p", "01", "--requirement", r#"{"kind":"MinLength","n":4}"#]);
    assert_eq!(i.status.code(), Some(0), "{}", String::from_utf8_lossy(&i.stderr));
    assert_eq!(stdout(&i).trim().len(), 4);
    run(dir.path(), &["surgery", "mutable", "--n", "3", "--payload", "101", "--out", "mb.json"]);
    assert_eq!(run(dir.path(), &["surgery", "verify", "--input", "mb.json"]).status.code(), Some(0));
}

#[test]
fn exact_pairs_verify() {
    let dir = tempfile::tempdir().unwrap();
    let b = run(dir.path(), &["exactpair", "build", "--seed", "5", "--out", "e.json"]);
    assert_eq!(b.status.code(), Some(0), "{}", String::from_utf8_lossy(&b.stderr));
    assert_eq!(run(dir.path(), &["exactpair", "verify", "--input", "e.json"]).status.code(), Some(0));
    let half = run(dir.path(), &["exactpair", "build", "--tower", "e.json"]);
    assert_eq!(half.status.code(), Some(2));
}

#[test]
fn render_is_deterministic_and_handles_empty_input() {
    let dir = tempfile::tempdir().unwrap();
    let empty = r#"{"index_set":[],"columns":{}}"#;
    let o = run(dir.path(), &["render", "--matrix", empty]);
    assert_eq!(o.status.code(), Some(0));
    run(dir.path(), &["build", "pair", "--payload", "01", "--seed", "1", "--out", "p.json"]);
    let a = run(dir.path(), &["render", "--input", "p.json", "--format", "svg"]);
    let b = run(dir.path(), &["render", "--input", "p.json", "--format", "svg"]);
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).starts_with("<svg"));
}

#[test]
fn malformed_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["decode", "--matrix", "missing.json", "--columns", "0"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["verify", "--matrix", "{not json"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["render", "--matrix", r#"{"index_set":[0,1],"columns":{"0":"1","1":"10"}}"#]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["build", "nonsense"]).status.code(), Some(2));
}
