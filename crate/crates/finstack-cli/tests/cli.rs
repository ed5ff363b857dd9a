use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::Arc;

use finstack::em::{coboundary, GroupCocycle};
use finstack::fixtures::cech_nerve;
use finstack::group::FinGroup;
use finstack::json::{load_simplicial_group, load_smap, load_sset, to_pretty, ActionDoc, CocycleDoc, SMapDoc, TwoGroupDoc};
use finstack::simp_group::{GroupAction, SimplicialGroup};
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn finstack(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_finstack")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = vec!["--format", "json"];
    all.extend_from_slice(args);
    let out = finstack(&all);
    let v = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    });
    (code(&out), v)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn nerve_z2(dir: &Path, levels: usize) -> PathBuf {
    let out = dir.join("nerve_z2.json");
    let lv = levels.to_string();
    let o = finstack(&["nerve", "--group", s(&fixture("z2.json")), "--levels", &lv, "-o", s(&out)]);
    assert_eq!(code(&o), 0);
    out
}

#[test]
fn nerve_of_z2_is_a_one_groupoid() {
    let dir = tempfile::tempdir().unwrap();
    let x = nerve_z2(dir.path(), 3);
    assert_eq!(load_sset(&x).unwrap().sizes(), &[1, 2, 4, 8]);
    let (c, v) = json(&["check", "--kind", "groupoid", "--n", "1", "--input", s(&x)]);
    assert_eq!(c, 0);
    assert_eq!(v["verdict"], "pass");
    let (c, v) = json(&["check", "--kind", "groupoid", "--n", "0", "--input", s(&x)]);
    assert_eq!(c, 1);
    assert_eq!(v["classification"]["verdict"], "fail");
    assert_eq!(v["classification"]["witness"]["k"], 1);
}

#[test]
fn horn_of_a_point_edge() {
    let dir = tempfile::tempdir().unwrap();
    let x = nerve_z2(dir.path(), 3);
    let (c, v) = json(&["horn", "--input", s(&x), "--k", "1", "--i", "0"]);
    assert_eq!(c, 0);
    assert_eq!(v["carrier_size"], 1);
    let (_, v) = json(&["horn", "--input", s(&x), "--k", "3", "--i", "2"]);
    assert_eq!(v["carrier_size"], 8);
    assert_eq!(v["bijective"], true);
    let (_, v) = json(&["match", "--input", s(&x), "--k", "2"]);
    assert_eq!(v["carrier_size"], 8);
    assert_eq!(v["bijective"], false);
}

#[test]
fn descend_output_is_a_two_groupoid() {
    let dir = tempfile::tempdir().unwrap();
    let x = dir.path().join("x.json");
    let (z2, abc) = (fixture("z2.json"), fixture("abc.json"));
    let args = [
        "descend",
        "--group",
        s(&z2),
        "--abelian",
        s(&z2),
        "--cocycle",
        s(&abc),
        "--levels",
        "4",
        "-o",
        s(&x),
    ];
    let first = finstack(&args);
    assert_eq!(code(&first), 0, "{}", String::from_utf8_lossy(&first.stderr));
    let bytes = std::fs::read(&x).unwrap();
    let second = finstack(&args);
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(bytes, std::fs::read(&x).unwrap());
    let loaded = load_sset(&x).unwrap();
    assert_eq!(loaded.size(0), 1);
    assert_eq!(&loaded.sizes()[..3], &[1, 2, 8]);
    let (c, v) = json(&["check", "--kind", "groupoid", "--n", "2", "--input", s(&x)]);
    assert_eq!(c, 0, "{v}");
}

#[test]
fn extract_writes_valid_two_group_data() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("t.json");
    let (c, v) = json(&["extract", "--cocycle", s(&fixture("abc.json")), "-o", s(&t)]);
    assert_eq!(c, 0);
    assert_eq!(v["associator_matches_input"], "pass");
    let doc: TwoGroupDoc = serde_json::from_str(&std::fs::read_to_string(&t).unwrap()).unwrap();
    let assoc = doc.validate().unwrap();
    assert_eq!(assoc.n, 3);
    let mut broken = doc.clone();
    broken.coordinate[1] = broken.coordinate[0];
    assert!(broken.validate().is_err());
}

#[test]
fn cocycle_classes() {
    let dir = tempfile::tempdir().unwrap();
    let (c, v) = json(&["cocycle-check", "--cocycle", s(&fixture("abc.json"))]);
    assert_eq!(c, 0);
    assert_eq!(v["class"], "nontrivial");
    let z4 = FinGroup::cyclic(4);
    let mut b = vec![0; 16];
    b[5] = 3;
    b[6] = 1;
    b[15] = 2;
    let exact = GroupCocycle::new(z4.clone(), z4.clone(), 3, coboundary(&z4, &z4, 2, &b)).unwrap();
    let p = dir.path().join("exact.json");
    std::fs::write(&p, to_pretty(&CocycleDoc::from_cocycle(&exact))).unwrap();
    let (c, v) = json(&["cocycle-check", "--cocycle", s(&p)]);
    assert_eq!(c, 0);
    assert_eq!(v["class"], "trivial");
    let o = finstack(&["descend", "--group", s(&fixture("z2.json")), "--cocycle", s(&p)]);
    assert_eq!(code(&o), 2);
}

#[test]
fn verify_suites() {
    for (suite, seed) in [("grothendieck", "0"), ("moore", "7"), ("descent", "0"), ("join", "3")] {
        let (c, v) = json(&["verify", "--suite", suite, "--seed", seed]);
        assert_eq!(c, 0, "{v}");
        assert_eq!(v["all_passed"], true);
    }
    let o = finstack(&["verify", "--suite", "nonsense"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn exit_codes_for_bad_input_and_budget() {
    let dir = tempfile::tempdir().unwrap();
    let o = finstack(&["check", "--kind", "stack", "--n", "1", "--input", "/nonexistent.json"]);
    assert_eq!(code(&o), 2);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"order": 2, "mul": [[0, 1], [1, 1]], "inv": [0, 1], "e": 0, "abelian": true}"#).unwrap();
    assert_eq!(code(&finstack(&["group-check", "--group", s(&bad)])), 2);
    let o = finstack(&["--budget", "10", "kspace", "--abelian", s(&fixture("z2.json")), "--n", "2", "--levels", "4"]);
    assert_eq!(code(&o), 3);
    assert_eq!(code(&finstack(&["horn", "--k"])), 2);
}

#[test]
fn constructions_report_levels() {
    let dir = tempfile::tempdir().unwrap();
    let x = nerve_z2(dir.path(), 4);
    let z2 = fixture("z2.json");
    let (_, v) = json(&["group-check", "--group", s(&z2)]);
    assert_eq!(v["element_orders"], serde_json::json!([1, 2]));
    let (_, v) = json(&["wbar", "--group", s(&z2), "--levels", "3"]);
    assert_eq!(v["levels"], serde_json::json!([1, 2, 4, 8]));
    let (_, v) = json(&["w", "--group", s(&z2), "--levels", "2"]);
    assert_eq!(v["levels"], serde_json::json!([2, 4, 8]));
    let (_, v) = json(&["coskeleton", "--input", s(&x), "--n", "1", "--levels", "3"]);
    assert_eq!(v["levels"], serde_json::json!([1, 2, 8, 64]));
    let (c, v) = json(&["dec", "--input", s(&x), "--n", "1", "--levels", "2"]);
    assert_eq!(c, 0, "{v}");
    assert_eq!(v["levels"], serde_json::json!([2, 4, 8]));
    let (c, _) = json(&["join", "--left", s(&x), "--right", s(&x), "--levels", "2"]);
    assert_eq!(c, 0);
    let (c, v) = json(&["pathspace", "--input", s(&x), "--k", "1", "--levels", "2"]);
    assert_eq!(c, 0, "{v}");
    let (c, v) = json(&["hom", "--shape", s(&x), "--target", s(&x)]);
    assert_eq!(c, 0, "{v}");
    assert_eq!(v["maps"], 2);
}

#[test]
fn kspace_output_is_a_simplicial_group() {
    let dir = tempfile::tempdir().unwrap();
    let k = dir.path().join("k.json");
    let (c, v) = json(&["kspace", "--abelian", s(&fixture("z2.json")), "--n", "2", "--levels", "4", "-o", s(&k)]);
    assert_eq!(c, 0);
    assert_eq!(v["levels"], serde_json::json!([1, 1, 2, 8, 64]));
    let g = load_simplicial_group(&k).unwrap();
    let faces: Vec<String> = (0..=3).map(|j| if j == 1 { "_".into() } else { g.sset.face(3, j, 5).to_string() }).collect();
    let (c, v) = json(&["moore-fill", "--group", s(&k), "--k", "3", "--i", "1", "--faces", &faces.join(","), "--strict", "3"]);
    assert_eq!(c, 0, "{v}");
    assert_eq!(v["filler"], 5);
    assert_eq!(v["strict"]["verdict"], "pass");
    let (c, _) = json(&["moore-fill", "--group", s(&k), "--k", "3", "--i", "1", "--faces", "0,0,0"]);
    assert_eq!(c, 2);
}

#[test]
fn strictify_a_cech_nerve() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("cech.json");
    let f = cech_nerve(&[0, 0, 1], 2, 3).unwrap();
    std::fs::write(&p, to_pretty(&SMapDoc::from_smap(&f))).unwrap();
    let (c, v) = json(&["check", "--kind", "hypercover", "--n", "1", "--input", s(&p)]);
    assert_eq!(c, 0, "{v}");
    let out = dir.path().join("tau.json");
    let (c, v) = json(&["strictify", "--input", s(&p), "--n", "1", "-o", s(&out)]);
    assert_eq!(c, 0, "{v}");
    assert_eq!(v["input_is_stack"], "pass");
    let tau = load_smap(&out).unwrap();
    assert_eq!(tau.source().sizes(), f.source().sizes());
    let (c, v) = json(&["strictify", "--input", s(&p), "--n", "0"]);
    assert_eq!(c, 0, "{v}");
    assert_eq!(v["input_is_stack"], "fail");
}

#[test]
fn homotopy_quotient_of_translation() {
    let dir = tempfile::tempdir().unwrap();
    let g = Arc::new(SimplicialGroup::constant(&FinGroup::cyclic(3), 2));
    let a = GroupAction::left_translation(g).unwrap();
    let p = dir.path().join("action.json");
    std::fs::write(&p, to_pretty(&ActionDoc::from_action(&a))).unwrap();
    let out = dir.path().join("q.json");
    let (c, v) = json(&["quotient", "--action", s(&p), "--levels", "2", "-o", s(&out)]);
    assert_eq!(c, 0, "{v}");
    assert_eq!(v["levels"], serde_json::json!([3, 9, 27]));
    assert_eq!(v["base_levels"], serde_json::json!([1, 3, 9]));
    assert_eq!(load_smap(&out).unwrap().target().sizes(), &[1, 3, 9]);
}
