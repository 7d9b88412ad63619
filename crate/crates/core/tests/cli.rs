mod common;

use std::path::Path;

use synchrony::cli::dispatch;

fn corpus_path(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name).display().to_string()
}

fn sh(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("synchrony").chain(args.iter().copied());
    let code = dispatch(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn check_accepts_corpus_and_rejects_weak_cycle() {
    assert_eq!(sh(&["check", &corpus_path("cruise.syn")]).0, 0);
    let (code, _, err) = sh(&["check", &corpus_path("fixtures/weak_cycle.syn")]);
    assert_eq!(code, 1);
    assert!(err.contains("WeaklyCausalCycle"), "{err}");
    assert_eq!(sh(&["check", &corpus_path("fixtures/delayed_cycle.syn")]).0, 0);
}

#[test]
fn simulate_prints_the_trace() {
    let (code, out, _) = sh(&["simulate", &corpus_path("cruise.syn"), "--stimulus", &corpus_path("cruise.stim")]);
    assert_eq!(code, 0);
    let stim = common::corpus("cruise.stim");
    assert_eq!(out.lines().count(), stim.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#')).count());
    let (code, _, _) = sh(&["simulate", &corpus_path("cruise.syn"), "--stimulus", &corpus_path("cruise.stim"), "--ticks", "100000"]);
    assert_eq!(code, 2);
}

#[test]
fn generate_writes_units_under_gen() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, err) = sh(&["generate", &corpus_path("cruise.syn"), "-o", dir.path().to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    assert!(out.lines().any(|l| l.ends_with("harness.c")));
    assert!(dir.path().join("gen/Cruise/harness.c").exists());
}

#[test]
fn verify_reports_agreement_and_counterexamples() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().to_str().unwrap();
    let (req, gls) = (corpus_path("cruise.req"), corpus_path("cruise.gls"));
    let (code, out, err) = sh(&["verify", &corpus_path("cruise.syn"), "--reqs", &req, "--glossary", &gls, "--bound", "6", "-o", o]);
    assert_eq!(code, 0, "{err}");
    assert!(out.lines().all(|l| l.ends_with("AGREE")), "{out}");
    assert!(dir.path().join("obl/Cruise/r1_k6.smt2").exists());

    let (code, out, _) =
        sh(&["verify", &corpus_path("cruise_mutant.syn"), "--reqs", &req, "--glossary", &gls, "--bound", "6", "-o", o]);
    assert_eq!(code, 1);
    assert!(out.contains("r2\tviolated@"), "{out}");
    assert!(dir.path().join("obl/CruiseMutant/r2_k6.cex.stim").exists());

    let (code, _, err) = sh(&[
        "verify",
        &corpus_path("cruise_mutant.syn"),
        "--reqs",
        &req,
        "--glossary",
        &gls,
        "--bound",
        "3",
        "-o",
        o,
        "--inject-unrolling-fault",
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("disagree"), "{err}");
}

#[test]
fn export_theories_and_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, _) = sh(&["export-theories", &corpus_path("cruise.syn"), "-o", dir.path().to_str().unwrap()]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(dir.path().join("obl/Cruise/theories.txt")).unwrap();
    assert!(!text.is_empty());
    assert_eq!(sh(&["frobnicate"]).0, 2);
    assert_eq!(sh(&["check", "/nonexistent.syn"]).0, 2);
}
