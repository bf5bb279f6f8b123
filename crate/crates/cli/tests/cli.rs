use std::path::PathBuf;
use std::process::{Command, Output};

use folia_core::models::builtin_model;

fn folia(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_folia")).args(args).env_remove("FOLIA_THREADS").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("folia-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn validate_builtin_models() {
    for model in ["hopf_s3", "heisenberg3"] {
        let out = folia(&["validate", "--model", model]);
        assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
        assert!(stdout(&out).contains(&format!("{model}: PASS")));
    }
}

#[test]
fn validate_reports_broken_antisymmetry() {
    let mut doc = builtin_model("hopf_s3").unwrap().to_json();
    doc["gamma"][1][0][0] = doc["gamma"][0][1][0].clone();
    let path = scratch("broken.json");
    std::fs::write(&path, doc.to_string()).unwrap();
    let out = folia(&["validate", "--file", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.lines().any(|l| l.starts_with("FAIL") && l.contains("antisymmetry")), "{text}");
}

#[test]
fn unknown_model_is_an_input_error() {
    let out = folia(&["verify", "--model", "no_such_model"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    assert_eq!(folia(&["verify", "--model", "hopf_s3", "--checks", "nope"]).status.code(), Some(2));
    assert_eq!(folia(&["verify", "--model", "hopf_s3", "--eps=-1"]).status.code(), Some(2));
}

#[test]
fn verify_passes_and_negative_control_fails() {
    let out = folia(&["verify", "--model", "hopf_s3", "--eps", "1,4,inf", "--trials", "5", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let out = folia(&["verify", "--model", "hopf_s3", "--exact", "--trials", "3", "--checks", "weitzenbock,bianchi"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let out = folia(&["verify", "--model", "hopf_s3", "--no-commutator-constraints", "--checks", "d-squared"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_json_is_byte_identical_across_thread_counts() {
    let run = |threads: &str, file: &str| {
        let path = scratch(file);
        let out = Command::new(env!("CARGO_BIN_EXE_folia"))
            .args(["verify", "--model", "heisenberg3", "--trials", "4", "--seed", "3", "--json", path.to_str().unwrap()])
            .env("FOLIA_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
        std::fs::read(path).unwrap()
    };
    let one = run("1", "t1.json");
    let eight = run("8", "t8.json");
    assert_eq!(one, eight);
    let doc: serde_json::Value = serde_json::from_slice(&one).unwrap();
    assert_eq!(doc["schema"], 1);
    assert_eq!(doc["passed"], true);
}

#[test]
fn verdicts_for_hopf_and_nilmanifold() {
    let out = folia(&["verdict", "--model", "hopf_s3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.lines().any(|l| l.contains("H^1") && l.contains("VANISHES")), "{text}");
    assert!(text.lines().any(|l| l.contains("H^2") && l.contains("VANISHES")), "{text}");
    let text = stdout(&folia(&["verdict", "--model", "heisenberg3_nilmanifold"]));
    assert!(!text.contains("VANISHES"), "{text}");
}

#[test]
fn heat_curve_is_monotone_and_bounded() {
    let out = folia(&["heat", "--model", "hopf_s3", "--t", "0:5:0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    assert_eq!(lines.next(), Some("t,norm,bound"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 11);
    assert!((rows[0][1] - 1.0).abs() < 1e-12);
    for w in rows.windows(2) {
        assert!(w[1][1] <= w[0][1]);
    }
    assert!(rows.iter().all(|r| r[1] <= r[2] + 1e-9));
}

#[test]
fn list_names_models_and_checks() {
    let text = stdout(&folia(&["list"]));
    for name in ["hopf_s3", "hopf_s5", "heisenberg5", "weitzenbock", "d-squared"] {
        assert!(text.contains(name), "{name}");
    }
}
