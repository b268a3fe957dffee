use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use anchored_core::fixtures;
use anchored_core::io::{header_lines, read_wg, write_wg};
use serde_json::Value;

fn anchored(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_anchored"))
        .args(args)
        .current_dir(dir)
        .env_remove("ANCHORED_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn write_fixture(dir: &Path, name: &str, g: &anchored_core::WeightedGraph) {
    fs::write(dir.join(name), write_wg(g, &[])).unwrap();
}

fn stderr_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).expect("error JSON on stderr")
}

#[test]
fn decompose_kite() {
    let dir = tempfile::tempdir().unwrap();
    write_fixture(dir.path(), "kite.wg", &fixtures::kite());
    let out = anchored(
        dir.path(),
        &[
            "decompose",
            "--input",
            "kite.wg",
            "--i",
            "0.6",
            "--out",
            "dec.json",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("dec.json")).unwrap()).unwrap();
    assert_eq!(v["islands"], serde_json::json!([["a", "b", "c"]]));
    assert_eq!(v["i"], 0.6);
    let manifest: Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("dec.json.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["digest"], v["manifest_digest"]);
    assert_eq!(manifest["command"], "decompose");
}

#[test]
fn heat_with_no_steps_is_a_point_mass() {
    let dir = tempfile::tempdir().unwrap();
    write_fixture(dir.path(), "c4.wg", &fixtures::c4());
    let out = anchored(
        dir.path(),
        &[
            "heat", "--input", "c4.wg", "--source", "v0", "--n-max", "0", "--i", "0.5",
        ],
    );
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows, ["n,sup,p_nn,killed,reference", "0,1,1,0,1"]);
    assert!(header_lines(&text)
        .iter()
        .any(|l| l.starts_with("manifest sha256=")));
}

#[test]
fn gen_is_reproducible_and_readable() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "gen",
        "--family",
        "galton-watson",
        "--offspring",
        "0.1,0.3,0.6",
        "--radius",
        "5",
        "--seed",
        "9",
    ];
    let a = anchored(dir.path(), &args);
    let b = anchored(dir.path(), &args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let g = read_wg(&text).unwrap();
    assert_eq!(g.id(0), "o");
    assert!(header_lines(&text).iter().any(|l| l == "seed=9"));

    let missing = anchored(
        dir.path(),
        &[
            "gen",
            "--family",
            "galton-watson",
            "--offspring",
            "0.5,0.5",
            "--radius",
            "3",
        ],
    );
    assert_eq!(missing.status.code(), Some(1));
    assert_eq!(stderr_json(&missing)["error"], "usage");
}

#[test]
fn walk_needs_a_seed_and_reproduces_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = anchored(
        dir.path(),
        &["walk", "--family", "binary-tree", "--steps", "100"],
    );
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["error"], "usage");

    let run = |prefix: &str, jobs: &str| {
        let out = anchored(
            dir.path(),
            &[
                "walk",
                "--family",
                "binary-tree",
                "--steps",
                "2000",
                "--trials",
                "6",
                "--seed",
                "5",
                "--i",
                "0.3333333333333333",
                "--sample-every",
                "10",
                "--out-prefix",
                prefix,
                "--jobs",
                jobs,
            ],
        );
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        fs::read_to_string(dir.path().join(format!("{prefix}.csv"))).unwrap()
    };
    assert_eq!(run("a", "1"), run("b", "2"));
    let summary: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("a.summary.json")).unwrap())
            .unwrap();
    for key in ["speed_mean", "ci95", "bound_speedi", "bound_shape_thm1"] {
        assert!(!summary[key].is_null(), "{key} missing");
    }
    assert!((summary["bound_speedi"].as_f64().unwrap() - 0.10719).abs() < 1e-4);
}

#[test]
fn out_dir_from_environment_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    write_fixture(dir.path(), "two.wg", &fixtures::two_islands());
    let out = Command::new(env!("CARGO_BIN_EXE_anchored"))
        .args([
            "countries",
            "--input",
            "two.wg",
            "--i",
            "0.5",
            "--w0",
            "0.05",
        ])
        .current_dir(dir.path())
        .env("ANCHORED_OUT_DIR", "env-out")
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("env-out/countries.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(v.as_array().unwrap().len(), 1);
    assert_eq!(v[0]["level"], 4);
    assert!(dir
        .path()
        .join("env-out/countries.json.manifest.json")
        .exists());

    let out = Command::new(env!("CARGO_BIN_EXE_anchored"))
        .args([
            "countries",
            "--input",
            "two.wg",
            "--i",
            "0.5",
            "--w0",
            "0.05",
            "--out-dir",
            "flag-out",
        ])
        .current_dir(dir.path())
        .env("ANCHORED_OUT_DIR", "env-out2")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("flag-out/countries.json").exists());
    assert!(!dir.path().join("env-out2").exists());
}

#[test]
fn chain_writes_an_induced_header() {
    let dir = tempfile::tempdir().unwrap();
    write_fixture(dir.path(), "trap.wg", &fixtures::trap());
    let out = anchored(dir.path(), &["chain", "--input", "trap.wg", "--i", "0.25"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(header_lines(&text)[0], "induced i=0.25");
    let g = read_wg(&text).unwrap();
    let x1 = g.index_of("x1").unwrap();
    assert!((g.loop_weight(x1) - 1.0).abs() < 1e-12);
}

#[test]
fn cheeger_reports_tree3() {
    let dir = tempfile::tempdir().unwrap();
    write_fixture(dir.path(), "tree3.wg", &fixtures::tree3());
    let out = anchored(dir.path(), &["cheeger", "--input", "tree3.wg"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["value"].as_f64().unwrap() - 0.4).abs() < 1e-12);
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = anchored(dir.path(), &["verify", "ocean"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8(ok.stdout)
        .unwrap()
        .starts_with("[PASS] ocean"));
    let bad = anchored(dir.path(), &["verify", "nope"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn bad_input_reports_json() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.wg"), "v a\ne a b -1\n").unwrap();
    let out = anchored(
        dir.path(),
        &["decompose", "--input", "bad.wg", "--i", "0.5"],
    );
    assert_eq!(out.status.code(), Some(1));
    let v = stderr_json(&out);
    assert_eq!(v["error"], "Parse");
    assert!(v["message"].as_str().unwrap().starts_with("line 2"));
}
