use std::process::{Command, Output};

use serde_json::Value as Json;

fn lif(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lif")).args(args).output().unwrap()
}

fn json(out: &Output) -> Json {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn analyze_reports_sorted_sets() {
    let v = json(&lif(&["analyze", "--expr-str", "P1(x;x) ; P1(x;y)"]));
    assert_eq!(v["inputs"], serde_json::json!(["x"]));
    assert_eq!(v["outputs"], serde_json::json!(["x", "y"]));
    assert_eq!(v["fvars"], serde_json::json!(["x", "y"]));
}

#[test]
fn selection_expansion_is_equivalent() {
    let e = "sel_r{x=y}(M(x;y))";
    let r = json(&lif(&["rewrite", "--expand-redundant", "--expr-str", e]));
    let expanded = r["expr"].as_str().unwrap();
    assert!(!expanded.contains("sel_r") && !expanded.contains('&'));
    let v = json(&lif(&[
        "check-equiv",
        "--expr-str",
        e,
        "--other-str",
        expanded,
        "--universe",
        "x,y",
    ]));
    assert_eq!(v["equivalent"], Json::Bool(true));
    assert_eq!(v["family"]["exhaustive"], Json::Bool(true));
    assert!(v["interpretations_checked"].as_u64().unwrap() > 1);
}

#[test]
fn inequivalent_expressions_get_a_counterexample() {
    let v = json(&lif(&[
        "check-equiv",
        "--expr-str",
        "M(x;y)",
        "--other-str",
        "conv M(x;y)",
        "--universe",
        "x,y",
    ]));
    assert_eq!(v["equivalent"], Json::Bool(false));
    assert!(v["counterexample"]["interpretation"]["relations"]["M"].is_array());
}

#[test]
fn eval_lists_pairs_as_objects() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("d.json");
    std::fs::write(&p, r#"{"domain":[1,2,3],"relations":{"P1":[[1,2],[2,3]]}}"#).unwrap();
    let v = json(&lif(&[
        "eval",
        "--expr-str",
        "P1(x;x) ; P1(x;x)",
        "--interp",
        p.to_str().unwrap(),
    ]));
    assert_eq!(v["pairs"], serde_json::json!([{"left": {"x": 1}, "right": {"x": 3}}]));
}

#[test]
fn elimination_introduces_a_fresh_variable() {
    let v = json(&lif(&[
        "rewrite",
        "--eliminate-composition",
        "--expr-str",
        "P1(x;x) ; P1(x;x)",
    ]));
    let vocab = lif::syntax::Vocabulary::new().with("P1", 2, 1).unwrap();
    let r = lif::syntax::Parser::new(&vocab)
        .allow_fresh(true)
        .parse(v["expr"].as_str().unwrap())
        .unwrap();
    assert!(!r.contains_compose());
    assert_eq!(v["universe"], serde_json::json!(["x", "x#0"]));
}

#[test]
fn oracle_finds_every_syntactic_variable_for_an_atom() {
    let v = json(&lif(&["oracle", "--expr-str", "M(x,y;z)", "--universe", "x,y,z"]));
    assert_eq!(v["precise"], Json::Bool(true));
    assert_eq!(v["witness_outputs"]["variables"], serde_json::json!(["z"]));
    assert_eq!(v["witness_inputs"]["variables"], serde_json::json!(["x", "y"]));
    let w = &v["witness_inputs"]["witnesses"][0];
    assert!(w["left"].is_object() && w["right"].is_object());
}

#[test]
fn fo_round_trip_through_the_cli() {
    let v = json(&lif(&["to-fo", "--expr-str", "M(x;y) ; M(y;x)"]));
    assert_eq!(v["uses_third_copy"], Json::Bool(true));
    let v = json(&lif(&[
        "from-fo",
        "--vocab-str",
        "R/2 in 0",
        "--formula-str",
        "(exists z (and (R x z) (R z y)))",
    ]));
    assert!(v["expr"].as_str().unwrap().contains("R(;"));
}

#[test]
fn clique_on_a_triangle() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("g.json");
    std::fs::write(
        &p,
        r#"{"vertices":[1,2,3,4],"edges":[[1,2],[2,3],[3,1],[1,4],[2,4],[3,4]]}"#,
    )
    .unwrap();
    let v = json(&lif(&["clique", "--n", "2", "--graph", p.to_str().unwrap()]));
    assert_eq!(v["graph"]["count"], 24);
    let v = json(&lif(&[
        "clique",
        "--n",
        "2",
        "--emit",
        "exists3n",
        "--graph",
        p.to_str().unwrap(),
    ]));
    assert_eq!(v["graph"]["nonempty"], Json::Bool(false));
}

#[test]
fn property_suite_reports_zero_violations() {
    let v = json(&lif(&["property-suite", "--suite", "inertia", "--seed", "7"]));
    assert_eq!(v["seed"], 7);
    assert_eq!(v["reports"][0]["violations"], 0);
    assert_eq!(v["reports"][0]["parts"][0]["cases"], 1000);
}

#[test]
fn exit_codes() {
    let help = lif(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(!help.stdout.is_empty());
    assert_eq!(lif(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(lif(&["analyze"]).status.code(), Some(2));
    assert_eq!(lif(&["property-suite", "--suite", "nope"]).status.code(), Some(2));
    let bad = lif(&["analyze", "--expr-str", "M(x;"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(bad.stdout.is_empty());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("1:5"));
    assert_eq!(
        lif(&["eval", "--expr-str", "M(x;)", "--interp", "/nonexistent.json"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(lif(&["clique", "--n", "1"]).status.code(), Some(1));
}
