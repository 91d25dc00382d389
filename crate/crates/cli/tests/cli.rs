use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_construct"))
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn check_valid_graph_exits_zero() {
    let out = run(&["check", fixture("valid_succ_chain.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    assert!(stdout(&out).contains("RESULT: PASS"));
}

#[test]
fn check_violating_graph_exits_one_with_violations() {
    let out = run(&["check", fixture("bad_missing_copy.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("violation[0]"), "{text}");
    assert!(text.contains("RESULT: FAIL"));
}

#[test]
fn malformed_file_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{ not json").unwrap();
    let out = run(&["check", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["check", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn eval_prints_value_literals() {
    let dir = tempfile::tempdir().unwrap();
    let inputs = dir.path().join("inputs.txt");
    std::fs::write(&inputs, "5\n2\n").unwrap();
    let out = run(&[
        "eval",
        fixture("valid_iter_adder.json").to_str().unwrap(),
        inputs.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("out[0]: 7"));
}

#[test]
fn eval_reports_inactive_branch() {
    let dir = tempfile::tempdir().unwrap();
    let inputs = dir.path().join("inputs.txt");
    std::fs::write(&inputs, "left(4 : N)\n").unwrap();
    let out = run(&[
        "eval",
        fixture("valid_get_branch.json").to_str().unwrap(),
        inputs.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("out[0]: 4"), "{text}");
    assert!(text.contains("out[1]: inactive"), "{text}");
}

#[test]
fn eval_graph_reference_input() {
    // An operation value supplied as a graph reference, applied by the
    // evaluated graph.
    let dir = tempfile::tempdir().unwrap();
    let applier = dir.path().join("applier.json");
    std::fs::write(
        &applier,
        r#"{
  "name": "apply_at_3",
  "nodes": [
    {"id": 0, "kind": "input", "params": {"index": 0, "ty": "(N -> N)"}},
    {"id": 1, "kind": "value", "params": {"value": 3}},
    {"id": 2, "kind": "apply", "params": {"sig": {"inputs": ["N"], "outputs": ["N"]}, "provided": [0]}},
    {"id": 3, "kind": "output", "params": {"index": 0, "ty": "N"}}
  ],
  "wires": [
    {"from": [0, 0], "to": [2, 0]},
    {"from": [1, 0], "to": [2, 1]},
    {"from": [2, 0], "to": [3, 0]}
  ],
  "inputs": [0],
  "outputs": [3]
}"#,
    )
    .unwrap();
    std::fs::copy(fixture("valid_succ_chain.json"), dir.path().join("succ2.json")).unwrap();
    let inputs = dir.path().join("inputs.txt");
    std::fs::write(&inputs, "@succ2.json\n").unwrap();
    let out = run(&[
        "eval",
        applier.to_str().unwrap(),
        inputs.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    assert!(stdout(&out).contains("out[0]: 5"));
}

#[test]
fn eval_bound_decides_relational_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cond = dir.path().join("atom.json");
    std::fs::write(
        &cond,
        r#"{
  "name": "gt",
  "nodes": [
    {"id": 0, "kind": "input", "params": {"index": 0, "ty": "N"}},
    {"id": 1, "kind": "input", "params": {"index": 1, "ty": "N"}},
    {"id": 2, "kind": "rel_gt", "params": {}},
    {"id": 3, "kind": "output", "params": {"index": 0, "ty": "Types1"}}
  ],
  "wires": [
    {"from": [0, 0], "to": [2, 0]},
    {"from": [1, 0], "to": [2, 1]},
    {"from": [2, 0], "to": [3, 0]}
  ],
  "inputs": [0, 1],
  "outputs": [3]
}"#,
    )
    .unwrap();
    let inputs = dir.path().join("inputs.txt");
    std::fs::write(&inputs, "7\n2\n").unwrap();
    let out = run(&[
        "eval",
        cond.to_str().unwrap(),
        inputs.to_str().unwrap(),
        "--bound",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let text = stdout(&out);
    assert!(text.contains("out[0]: type:gt(7;2)"), "{text}");
    assert!(text.contains("rel[0]: inhabited"), "{text}");
}

#[test]
fn repro_reports_are_byte_identical() {
    let a = run(&["repro", "bounded-search"]);
    let b = run(&["repro", "bounded-search"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&b));
    let t1 = run(&["repro", "tree", "--seed", "5"]);
    let t2 = run(&["repro", "tree", "--seed", "5"]);
    assert_eq!(t1.status.code(), Some(0));
    assert_eq!(stdout(&t1), stdout(&t2));
}

#[test]
fn unknown_repro_is_a_usage_error() {
    let out = run(&["repro", "nonesuch"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn continuum_analyze_and_similar() {
    let dir = tempfile::tempdir().unwrap();
    let annulus = dir.path().join("annulus.grid");
    std::fs::write(&annulus, "####\n#.##\n####\n####\n").unwrap();
    let all = dir.path().join("all.grid");
    std::fs::write(&all, "####\n####\n####\n####\n").unwrap();
    let out = run(&["continuum", "analyze", annulus.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("white-components: 1"), "{text}");
    assert!(text.contains("black-components: 2"), "{text}");
    assert!(text.contains("tree: b(w(b()))"), "{text}");

    let out = run(&[
        "continuum",
        "similar",
        annulus.to_str().unwrap(),
        all.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("similar: false"));

    let doc = dir.path().join("cube.json");
    std::fs::write(&doc, r#"{"dim": 3, "resolution": 0, "active": [[1,1,1]]}"#).unwrap();
    let out = run(&["continuum", "analyze", doc.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("dim: 3"));
}

#[test]
fn enum_types_lists_the_canonical_prefix() {
    let out = run(&["enum-types", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("type[1]: N"));
    assert!(text.contains("type[2]: C"));
    assert!(text.contains("type[3]: (N x N)"));
    let json = run(&["enum-types", "3", "--json"]);
    assert!(stdout(&json).contains("\"type[1]\": \"N\""));
}
