use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use snfkn::io::{parse_instance, Instance};
use snfkn_core::gen::{gen_disjoint_family, gen_tightness, FamilyMode};
use snfkn_core::l2::disjointness_stats;
use snfkn_core::CellSet;

fn snfkn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_snfkn"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(dir: &tempfile::TempDir, name: &str) -> String {
    dir.path().join(name).to_string_lossy().into_owned()
}

fn json(p: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn write(p: &str, text: &str) {
    std::fs::write(Path::new(p), text).unwrap();
}

#[test]
fn dictator_file_analyzes_to_family_with_zero_closeness() {
    let dir = tempfile::tempdir().unwrap();
    let (d, r) = (path(&dir, "d.json"), path(&dir, "r.json"));
    let out = snfkn(&["generate", "dictator", "--n", "7", "--orientation", "col", "--index", "3", "--targets", "2,5", "--out", &d]);
    assert!(out.status.success());
    let out = snfkn(&["analyze", "--metric", "l2", "--input", &d, "--out", &r]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rep = json(&r);
    assert_eq!(rep["verdict"], "family");
    assert_eq!(rep["metrics"]["closeness"]["value"], 0.0);
    let cells: Vec<(u64, u64)> = rep["cells"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| (c["i"].as_u64().unwrap(), c["j"].as_u64().unwrap()))
        .collect();
    assert_eq!(cells, vec![(2, 3), (5, 3)]);
}

#[test]
fn linf_epsilon_above_eps0_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let d = path(&dir, "d.json");
    assert!(snfkn(&["generate", "dictator", "--n", "5", "--index", "1", "--targets", "1", "--out", &d]).status.success());
    let out = snfkn(&["analyze", "--metric", "linf", "--epsilon", "0.5", "--input", &d]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("eps0"));
}

#[test]
fn l0_on_tightness_reports_one_ninetieth() {
    let dir = tempfile::tempdir().unwrap();
    let (t, r) = (path(&dir, "t.json"), path(&dir, "r.json"));
    assert!(snfkn(&["generate", "tightness", "--n", "10", "--delta", "0.2", "--epsilon", "0.02", "--out", &t]).status.success());
    let out = snfkn(&["analyze", "--metric", "l0", "--input", &t, "--out", &r]);
    assert_eq!(out.status.code(), Some(0));
    let eps = json(&r)["metrics"]["epsilon"]["value"].as_f64().unwrap();
    assert_eq!(eps, 1.0 / 90.0);
    let Instance::Linear(f) = parse_instance(&std::fs::read_to_string(&t).unwrap()).unwrap() else {
        panic!("expected a linear function")
    };
    assert_eq!(f, gen_tightness(10, 0.2, 0.02).unwrap());
}

#[test]
fn generation_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.json", "b.json"] {
        let p = path(&dir, name);
        assert!(snfkn(&["generate", "family", "--n", "12", "--m", "12", "--seed", "5", "--out", &p]).status.success());
    }
    let a = std::fs::read(path(&dir, "a.json")).unwrap();
    assert_eq!(a, std::fs::read(path(&dir, "b.json")).unwrap());
}

#[test]
fn heavy_line_family_matches_pair_formula() {
    let dir = tempfile::tempdir().unwrap();
    let p = path(&dir, "f.json");
    let out = snfkn(&["generate", "family", "--n", "16", "--m", "10", "--mode", "heavy-line", "--k-off", "3", "--seed", "2", "--out", &p]);
    assert!(out.status.success());
    let Instance::Linear(f) = parse_instance(&std::fs::read_to_string(&p).unwrap()).unwrap() else {
        panic!("expected a linear function")
    };
    let fam = gen_disjoint_family(16, 10, FamilyMode::HeavyLine { k_off: 3 }, 2).unwrap();
    assert_eq!(f, fam.sum_function());
    let cells = &fam.cells;
    let line = (0..16).max_by_key(|&i| cells.iter().filter(|c| c.0 == i).count()).unwrap();
    let off = CellSet::new(16, cells.iter().copied().filter(|c| c.0 != line)).unwrap();
    let (m, p_total) = disjointness_stats(cells);
    assert_eq!(m, 10);
    assert_eq!(p_total, 7 * 3 + disjointness_stats(&off).1);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains(&format!("{p_total} non-disjoint pairs")), "{stderr}");
}

#[test]
fn noisy_generation_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let (d, n1, n2) = (path(&dir, "d.json"), path(&dir, "n1.json"), path(&dir, "n2.json"));
    assert!(snfkn(&["generate", "dictator", "--n", "6", "--index", "2", "--targets", "1,4", "--flipped", "--out", &d]).status.success());
    assert!(snfkn(&["generate", "noisy", "--input", &d, "--noise", "gaussian", "--amplitude", "0.01", "--seed", "3", "--out", &n1]).status.success());
    let text = std::fs::read_to_string(&n1).unwrap();
    let inst = parse_instance(&text).unwrap();
    write(&n2, &snfkn::io::instance_to_string(&inst));
    assert_eq!(text, std::fs::read_to_string(&n2).unwrap());
    let out = snfkn(&["analyze", "--metric", "l2", "--input", &n1]);
    assert_eq!(out.status.code(), Some(0));
    let rep: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rep["flipped"], true);
}

#[test]
fn malformed_json_exits_with_one_and_a_position() {
    let dir = tempfile::tempdir().unwrap();
    let p = path(&dir, "bad.json");
    write(&p, "{\"n\": 3,\n \"constant\": 0.0,\n \"coeffs\": [ {\"i\": 1 ]\n}");
    let out = snfkn(&["analyze", "--metric", "l2", "--input", &p]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    let missing = snfkn(&["analyze", "--metric", "l2", "--input", &path(&dir, "missing.json")]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn premise_violation_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let p = path(&dir, "far.json");
    write(&p, r#"{"n": 4, "constant": 0.5, "coeffs": [{"i": 1, "j": 1, "c": 0.5}]}"#);
    let out = snfkn(&["analyze", "--metric", "linf", "--epsilon", "0.02", "--input", &p]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn verify_covariance_passes() {
    let out = snfkn(&["verify", "--suite", "covariance"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8_lossy(&out.stdout);
    assert!(csv.starts_with("n,pairs,max_abs_error"));
    assert!(csv.lines().last().unwrap().starts_with("summary,passed=true"));
}

#[test]
fn verify_output_is_independent_of_worker_count() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_snfkn"))
            .args(["verify", "--suite", "pair-overlap", "--n", "6", "--trials", "12", "--seed", "9"])
            .env("SNFKN_THREADS", threads)
            .output()
            .unwrap()
    };
    let (a, b) = (run("1"), run("3"));
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout.iter().filter(|&&c| c == b'\n').count(), 14);
}

#[test]
fn too_few_samples_are_rejected_for_sampled_sizes() {
    let out = snfkn(&["verify", "--suite", "converse-family", "--n", "16", "--trials", "1", "--samples", "10"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_suite_is_a_usage_error() {
    let out = snfkn(&["verify", "--suite", "nonsense"]);
    assert!(!out.status.success());
}
