use std::path::PathBuf;
use std::process::{Command, Output};

fn graph(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("graphs").join(format!("{name}.graph"))
}

fn quivoa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quivoa"))
        .args(args)
        .env("QUIVOA_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> serde_json::Value {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let out = quivoa(&all);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn path(name: &str) -> String {
    graph(name).display().to_string()
}

#[test]
fn reduce_on_the_default_graph() {
    let v = json(&["reduce", "v1.t"]);
    assert_eq!(v["normal_form"], "t");
    let v = json(&["reduce", "t.v0"]);
    assert_eq!(v["normal_form"], "t");
    let out = quivoa(&["reduce", "v0.t"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "v0.t");
    let v = json(&["reduce", "--doubled", "t~.v1"]);
    assert_eq!(v["normal_form"], "t~");
}

#[test]
fn mispace_reproduces_the_example_graph() {
    let v = json(&["mispace", &path("loops_and_bridge")]);
    assert_eq!(v["n_q"], 7);
    assert_eq!(v["dims_sorted"], serde_json::json!([0, 0, 0, 2, 2, 3, 3]));
    assert_eq!(v["components"].as_array().unwrap().len(), 7);
}

#[test]
fn invariants_of_the_example_graph() {
    let v = json(&["invariants", &path("loops_and_bridge")]);
    for (key, want) in [("n_q", 7), ("vertex_count", 3), ("edge_count", 3), ("alpha", 2), ("beta", 1), ("k0_rank", 3)] {
        assert_eq!(v[key], want, "{key}");
    }
}

#[test]
fn iso_on_the_classification_pair() {
    let (a, b) = (path("parallel_pair"), path("opposing_pair"));
    let gcm = json(&["iso", "--model", "gcm", &a, &b]);
    assert_eq!(gcm["verdict"], true);
    assert!(gcm["mapping"]["vertices"].is_array());
    let oa = json(&["iso", "--model", "oa", &a, &b]);
    assert_eq!(oa["verdict"], false);
    assert_eq!(oa["refutation"], "degree_multiset");
    let cross = json(&["iso", "--model", "gcm", "--cross-check", "--seed", "9", &a, &b]);
    assert_eq!((cross["verdict"].clone(), cross["seed"].clone()), (true.into(), 9.into()));
}

#[test]
fn recover_shadow_reports_its_seed() {
    let v = json(&["recover-shadow", &path("loops_and_bridge"), "--blind-seed", "17"]);
    assert_eq!(v["blind_seed"], 17);
    assert_eq!(v["isomorphic_to_shadow"], true);
}

#[test]
fn eval_is_exact() {
    let v = json(&[
        "eval",
        "--subset",
        "v1,v2",
        "--lambda",
        "t1=0.5,t3=i",
        &path("loops_and_bridge"),
        "t1.t3 + 2 * t2 - v1",
    ]);
    assert_eq!(v["value"]["re"], "-1");
    assert_eq!(v["value"]["im"], "1/2");
    assert_eq!(v["lambda"]["t2"], "0 + 0i");
    let out = quivoa(&["eval", "--subset", "v1", "--lambda", "t1=2", &path("loops_and_bridge"), "t1"]);
    assert_eq!(out.status.code(), Some(1));
    let out = quivoa(&["eval", "--subset", "v1", "--lambda", "t3=1", &path("loops_and_bridge"), "t1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn norm_bounds_examples() {
    let v = json(&["norm-bounds", "--gcm", "--trials", "8", &path("single_edge"), "t + t~"]);
    assert!(v["lower"].as_f64().unwrap() >= 1.0);
    assert_eq!(v["upper"], 2.0);
    let v = json(&["norm-bounds", "--gcm", "--trials", "8", &path("single_edge"), "t~.t"]);
    assert_eq!((v["lower"].as_f64(), v["upper"].as_f64()), (Some(1.0), Some(1.0)));
    assert_eq!(v["config"]["seed"], 0);
}

#[test]
fn json_output_is_deterministic() {
    let args = ["--seed", "4", "norm-bounds", "--trials", "6", &path("loops_and_bridge"), "t1.t3 - 1/2 * t2"];
    let a = quivoa(&[&["--json"], &args[..]].concat());
    let b = quivoa(&[&["--json"], &args[..]].concat());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn text_and_json_agree() {
    let v = json(&["invariants", &path("loops_and_bridge")]);
    let text = String::from_utf8(quivoa(&["invariants", &path("loops_and_bridge")]).stdout).unwrap();
    assert!(text.contains(&format!("K0 rank = {}", v["k0_rank"])));
    assert!(text.contains(&format!("alpha (loops) = {}", v["alpha"])));
}

#[test]
fn lemmas_pass() {
    let v = json(&["lemmas", "--trials", "30", "--seed", "2"]);
    assert_eq!(v["all_passed"], true);
    assert_eq!(v["seed"], 2);
    assert_eq!(v["lemmas"].as_array().unwrap().len(), 7);
}

#[test]
fn semigroup_enumeration() {
    let v = json(&["semigroup", "--max-len", "2"]);
    assert_eq!(v["count"], 8);
    let out = quivoa(&["semigroup", "--max-len", "40"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn exit_codes() {
    assert_eq!(quivoa(&["iso", "--model", "nope", "a", "b"]).status.code(), Some(2));
    assert_eq!(quivoa(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(quivoa(&["mispace", "/definitely/missing.graph"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.graph");
    std::fs::write(&bad, "vertex a\nedge e a b\n").unwrap();
    let out = quivoa(&["mispace", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("2:"));
    let out = quivoa(&["norm-bounds", &path("single_edge"), "t~"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_documents_json_schemas() {
    let out = quivoa(&["--help"]);
    let text = String::from_utf8_lossy(&out.stdout);
    for cmd in ["reduce", "semigroup", "mispace", "invariants", "recover-shadow", "iso", "eval", "norm-bounds", "lemmas"] {
        assert!(text.contains(&format!("  {cmd} ")), "{cmd}");
    }
}
