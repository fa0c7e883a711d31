use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn sdex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sdex")).args(args).output().expect("the binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn make_sd_writes_thirty_six_triangles() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let out = sdex(&["make", "sd", "-n", "2", "--of", "simplex:2", "--json", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let x = sdex::SimplicialSet::from_json(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(x.counts(), vec![25, 60, 36]);
    assert!(stdout(&out).contains("25 60 36"));
}

#[test]
fn tower_certificate_reports_no_lift() {
    let out = sdex(&["tower", "-n", "0", "-j", "2", "-k", "2", "--certify", "--json", "-"]);
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    let cert: Value = serde_json::from_str(&text[text.find('{').unwrap()..]).unwrap();
    let distances: Vec<u64> = cert["stages"].as_array().unwrap().iter().map(|s| s["distance"].as_u64().unwrap()).collect();
    assert_eq!(distances, vec![2, 2, 2]);
    assert!(cert["stages"].as_array().unwrap().iter().all(|s| s["lift_exists"] == false));
}

#[test]
fn interval_is_not_kan() {
    let out = sdex(&["kan", "--of", "simplex:1", "-K", "2"]);
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    assert!(text.contains("Λ^0_2"));
    assert!(text.contains("\"top\""));
    assert_eq!(code(&sdex(&["kan", "--of", "nerve:cyclic-2", "-K", "3"])), 0);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&sdex(&["frobnicate"])), 2);
    assert_eq!(code(&sdex(&["make", "sd", "--of", "cube:3"])), 2);
    assert_eq!(code(&sdex(&["validate", "--in", "/nonexistent/file.json"])), 2);
    assert_eq!(code(&sdex(&["rays", "-n", "7"])), 3);
    assert_eq!(code(&sdex(&["cat-check", "groupoid", "--of", "cyclic-3"])), 0);
    assert_eq!(code(&sdex(&["cat-check", "groupoid", "--of", "idempotent"])), 1);
}

#[test]
fn malformed_input_file_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, "{ not json").unwrap();
    let p = path.to_str().unwrap();
    assert_eq!(code(&sdex(&["validate", "--in", p])), 2);
    assert_eq!(code(&sdex(&["cat-check", "fractions", "--in", p])), 2);
}

#[test]
fn category_checks() {
    let out = sdex(&["cat-check", "fractions", "--of", "v-poset", "--json", "-"]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("\"span\""));
    let out = sdex(&["cat-check", "injectivity", "--of", "right-zero", "-K", "2", "--json", "-"]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("\"functor\""));
    assert_eq!(code(&sdex(&["cat-check", "injectivity", "--of", "semilattice"])), 0);
}

#[test]
fn category_round_trips_through_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    let (_, c) = sdex::category::curated_family().into_iter().find(|(n, _)| *n == "v-poset").unwrap();
    fs::write(&path, c.to_json()).unwrap();
    assert_eq!(code(&sdex(&["cat-check", "fractions", "--in", path.to_str().unwrap()])), 1);
}

#[test]
fn distances_maps_and_validation() {
    let out = sdex(&["dist", "--of", "simplex:2", "-n", "3", "-a", "0", "-b", "1"]);
    assert_eq!((code(&out), stdout(&out).trim().to_string()), (0, "8".to_string()));
    let out = sdex(&["maps", "--from", "simplex:1", "--to", "horn:2:0", "--adjunction"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("maps into Ex: 9"));
    assert_eq!(code(&sdex(&["fib", "--of", "nerve:idempotent", "-n", "1", "-K", "2"])), 0);
    assert_eq!(code(&sdex(&["fib", "--of", "nerve:idempotent", "-n", "0", "-K", "2"])), 1);
    assert_eq!(code(&sdex(&["validate", "--of", "boundary:3"])), 0);
}

#[test]
fn rays_write_svg() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rays.svg");
    let out = sdex(&["rays", "-n", "2", "--svg", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let svg = fs::read_to_string(&path).unwrap();
    assert_eq!(svg.matches("<polygon").count(), 36);
}

#[test]
fn output_is_byte_identical_across_runs() {
    for args in [
        &["make", "sd", "-n", "2", "--of", "horn:2:1", "--json", "-", "--dot", "-"][..],
        &["rays", "-n", "3", "--svg", "-", "--json", "-"][..],
        &["kan", "--of", "horn:2:0", "-K", "2", "--json", "-"][..],
        &["tower", "-n", "0", "-j", "1", "--json", "-"][..],
    ] {
        let a = sdex(args);
        let b = sdex(args);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert_eq!(a.status, b.status);
    }
}

#[test]
fn help_lists_every_verb() {
    let out = sdex(&["--help"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    for verb in ["make", "maps", "kan", "fib", "dist", "rays", "tower", "cat-check", "validate"] {
        assert!(text.contains(verb), "{verb}");
    }
    assert!(text.contains("Exit status"));
    assert_eq!(code(&sdex(&["tower", "--help"])), 0);
}
