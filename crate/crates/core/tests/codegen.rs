mod common;

use common::*;
use synchrony::codegen::{generate_code, lint_subset};
use synchrony::sim::{random_stimulus, run, ChoicePolicy};
use synchrony::syntax::parse_stimulus;

#[test]
fn corpus_compiles_under_gcc_and_clang() {
    let p = load(&corpus("cruise.syn"));
    for cc in ["gcc", "clang"] {
        if !has_compiler(cc) {
            eprintln!("skipping {cc}: not installed");
            continue;
        }
        let dir = tempfile::tempdir().unwrap();
        if let Err(diag) = build_harness(&p, dir.path(), cc) {
            panic!("{cc} rejected the generated code:\n{diag}");
        }
    }
}

#[test]
fn corpus_harness_matches_simulator() {
    let p = load(&corpus("cruise.syn"));
    let text = corpus("cruise.stim");
    let stim = parse_stimulus(&text, &p).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let exe = build_harness(&p, dir.path(), "gcc").unwrap();
    let path = dir.path().join("cruise.stim");
    std::fs::write(&path, &text).unwrap();
    let got = run_harness(&exe, &path, stim.len());
    let want = run(&p, &stim, ChoicePolicy::First, stim.len()).render(&p);
    assert_eq!(got.code, 0, "{}", got.stderr);
    assert_eq!(got.stdout, want);
}

#[test]
fn corpus_output_is_lint_clean() {
    let p = load(&corpus("cruise.syn"));
    let units = all_units(&p).unwrap();
    let report = lint_subset(&units);
    assert!(report.findings.is_empty(), "{}", report.render());
}

#[test]
fn generation_is_idempotent() {
    let p = load(&corpus("cruise.syn"));
    let a = generate_code(&p).unwrap();
    let b = generate_code(&load(&corpus("cruise.syn"))).unwrap();
    assert_eq!(a.units, b.units);
}

fn write_stim(dir: &std::path::Path, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn shapes_fixture_matches_simulator_including_errors() {
    let p = load(&corpus("fixtures/shapes.syn"));
    let dir = tempfile::tempdir().unwrap();
    let exe = build_harness(&p, dir.path(), "gcc").unwrap();
    let mut errors = 0;
    for seed in 0..300 {
        let stim = random_stimulus(&p, 60, 0.3, seed);
        let path = write_stim(dir.path(), "s.stim", &stim.render(&p));
        let got = run_harness(&exe, &path, stim.len());
        let trace = run(&p, &stim, ChoicePolicy::First, stim.len());
        assert_eq!(got.stdout, trace.render(&p), "seed {seed}");
        assert_eq!(got.code, if trace.error.is_some() { 1 } else { 0 }, "seed {seed}");
        errors += usize::from(trace.error.is_some());
    }
    // Both outcomes must be exercised for the comparison to mean anything.
    assert!(errors > 0 && errors < 300, "{errors} runs ended in an error");
}

#[test]
fn harness_input_handling() {
    let p = load(&corpus("cruise.syn"));
    let dir = tempfile::tempdir().unwrap();
    let exe = build_harness(&p, dir.path(), "gcc").unwrap();

    let empty = write_stim(dir.path(), "empty.stim", "");
    let r = run_harness(&exe, &empty, 0);
    assert_eq!((r.code, r.stdout.as_str()), (0, ""));

    let short = write_stim(dir.path(), "short.stim", "0;button=-;voltage=-;pedal_fault=-;speed=-\n");
    let r = run_harness(&exe, &short, 2);
    assert_eq!(r.code, 2);
    assert!(r.stdout.is_empty() && !r.stderr.is_empty());

    for bad in [
        "0;button=Main;voltage=12;pedal_fault=false\n",
        "0;button=Main;voltage=12;pedal_fault=false;speed=0;speed=0\n",
        "0;button=Main;voltage=99;pedal_fault=false;speed=0\n",
        "1;button=Main;voltage=12;pedal_fault=false;speed=0\n",
        "0;button=Mian;voltage=12;pedal_fault=false;speed=0\n",
        "0;button=-;voltage=-;pedal_fault=-;speed=-\nx\n",
    ] {
        assert!(parse_stimulus(bad, &p).is_err());
        let path = write_stim(dir.path(), "bad.stim", bad);
        let r = run_harness(&exe, &path, 1);
        assert_eq!(r.code, 2, "{bad}");
        assert!(r.stdout.is_empty(), "{bad}");
        assert!(r.stderr.contains("malformed"), "{bad}: {}", r.stderr);
    }
}

#[test]
fn each_lint_fixture_gives_one_error() {
    let p = load(&corpus("cruise.syn"));
    let results = lint_fixture_errors(&p);
    assert_eq!(results.len(), 11);
    for (name, codes) in results {
        assert_eq!(codes.len(), 1, "{name}: {codes:?}");
        let want = if name.contains("recursion") { "RecursionDetected" } else { "ForbiddenConstruct" };
        assert_eq!(codes[0], want, "{name}");
    }
}

#[test]
fn corpus_differential_sample() {
    let p = load(&corpus("cruise.syn"));
    let dir = tempfile::tempdir().unwrap();
    let exe = build_harness(&p, dir.path(), "gcc").unwrap();
    assert_eq!(differential(&p, &exe, dir.path(), 100, 100), Ok(100));
}
