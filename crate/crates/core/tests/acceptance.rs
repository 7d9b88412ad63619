//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails.

mod common;

use std::path::Path;
use std::time::{Duration, Instant};

use common::fuzz::engine_agreement;
use common::{build_harness, corpus, differential, has_compiler, lint_fixture_errors, load, props, STRICT};
use synchrony::cli::dispatch;
use synchrony::codegen::lint_subset;
use synchrony::model::ir::{Behavior, CompId, Program};

fn corpus_path(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name).display().to_string()
}

fn cli(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = dispatch(std::iter::once("synchrony").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8_lossy(&out).into_owned(), String::from_utf8_lossy(&err).into_owned())
}

fn depth(p: &Program, c: CompId) -> usize {
    match &p.components[c as usize].behavior {
        Behavior::Composite(k) => 1 + k.subs.iter().map(|s| depth(p, s.comp)).max().unwrap_or(0),
        _ => 0,
    }
}

fn within(start: Instant, limit: Duration) -> Result<String, String> {
    let took = start.elapsed();
    if took < limit {
        Ok(format!("{:.2}s", took.as_secs_f64()))
    } else {
        Err(format!("took {:.2}s, limit {}s", took.as_secs_f64(), limit.as_secs()))
    }
}

fn corpus_model() -> Result<String, String> {
    let start = Instant::now();
    let (code, _, err) = cli(&["check", &corpus_path("cruise.syn")]);
    let time = within(start, Duration::from_secs(1))?;
    if code != 0 {
        return Err(format!("check exited {code}: {err}"));
    }
    let p = load(&corpus("cruise.syn"));
    let levels = depth(&p, p.root);
    let comps = p.components.len();
    if comps < 6 || levels != 2 {
        return Err(format!("{comps} components, {levels} levels"));
    }
    Ok(format!("{comps} components, {levels} levels, check exit 0 in {time}"))
}

fn sample_property() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let start = Instant::now();
    let (code, out, err) = cli(&[
        "verify",
        &corpus_path("cruise.syn"),
        "--reqs",
        &corpus_path("cruise.req"),
        "--glossary",
        &corpus_path("cruise.gls"),
        "--bound",
        "20",
        "--engine",
        "cross",
        "-o",
        dir.path().to_str().unwrap(),
    ]);
    let time = within(start, Duration::from_secs(60))?;
    let line = out.lines().find(|l| l.starts_with("r1\t")).ok_or(format!("no r1 row: {out}{err}"))?;
    if code != 0 || line != "r1\tholds(20)\tholds(20)\tAGREE" {
        return Err(format!("exit {code}, `{line}`"));
    }
    Ok(format!("`{}` in {time}", line.replace('\t', " ")))
}

fn mutation() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let o = dir.path().to_str().unwrap();
    let model = corpus_path("cruise_mutant.syn");
    let (code, out, err) = cli(&[
        "verify",
        &model,
        "--reqs",
        &corpus_path("cruise.req"),
        "--glossary",
        &corpus_path("cruise.gls"),
        "--bound",
        "20",
        "-o",
        o,
    ]);
    if code != 1 {
        return Err(format!("verify exited {code}: {err}"));
    }
    let row: Vec<&str> = out.lines().find(|l| l.starts_with("r2\t")).ok_or("no r2 row")?.split('\t').collect();
    let tick: usize = row[1].strip_prefix("violated@").and_then(|t| t.parse().ok()).ok_or(format!("explicit: {}", row[1]))?;
    if row[2] != row[1] || row[3] != "AGREE" || tick > 20 {
        return Err(format!("{row:?}"));
    }
    let obl = dir.path().join("obl/CruiseMutant");
    let stim = obl.join("r2_k20.cex.stim");
    let (code, trace, err) = cli(&["simulate", &model, "--stimulus", stim.to_str().unwrap()]);
    if code != 0 {
        return Err(format!("simulate exited {code}: {err}"));
    }
    let saved = std::fs::read_to_string(obl.join("r2_k20.cex.trace")).map_err(|e| e.to_string())?;
    let line = trace.lines().nth(tick).unwrap_or("");
    let prev = trace.lines().nth(tick.wrapping_sub(1)).unwrap_or("");
    if trace != saved || !prev.contains("button=Accel") || line.contains("throttle=-") {
        return Err(format!("replay does not show the violation:\n{trace}"));
    }
    Ok(format!("r2 violated@{tick} on both engines, AGREE; replay shows `{line}`"))
}

fn differential_equivalence() -> Result<String, String> {
    let start = Instant::now();
    let p = load(&corpus("cruise.syn"));
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let exe = build_harness(&p, dir.path(), "gcc")?;
    let n = differential(&p, &exe, dir.path(), 1000, 100)?;
    let time = within(start, Duration::from_secs(300))?;
    Ok(format!("{n}/1000 traces of 100 ticks byte-identical in {time}"))
}

fn subset_lint() -> Result<String, String> {
    let p = load(&corpus("cruise.syn"));
    let units = common::all_units(&p)?;
    let report = lint_subset(&units);
    if !report.findings.is_empty() {
        return Err(report.render());
    }
    let mut compilers = Vec::new();
    for cc in ["gcc", "clang"] {
        if has_compiler(cc) {
            let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
            build_harness(&p, dir.path(), cc).map_err(|d| format!("{cc}: {d}"))?;
            compilers.push(cc);
        }
    }
    if compilers.is_empty() {
        return Err("no C compiler".into());
    }
    let fixtures = lint_fixture_errors(&p);
    for (name, codes) in &fixtures {
        if codes.len() != 1 {
            return Err(format!("{name}: {codes:?}"));
        }
    }
    Ok(format!(
        "0 findings; {} clean with {}; {} fixtures with one Error each",
        compilers.join(", "),
        STRICT.join(" "),
        fixtures.len()
    ))
}

fn causality_gate() -> Result<String, String> {
    let (code, _, err) = cli(&["check", &corpus_path("fixtures/weak_cycle.syn")]);
    if code != 1 || !err.contains("WeaklyCausalCycle") {
        return Err(format!("weak cycle: exit {code}: {err}"));
    }
    let (code, _, err) = cli(&["check", &corpus_path("fixtures/delayed_cycle.syn")]);
    if code != 0 {
        return Err(format!("delayed cycle: exit {code}: {err}"));
    }
    Ok("weak cycle rejected with WeaklyCausalCycle, cycle through a strong delay accepted".into())
}

fn property_suites() -> Result<String, String> {
    let start = Instant::now();
    let suites: [(&str, fn(u32) -> Result<String, String>); 5] = [
        ("prefix", props::strong_prefix),
        ("determinism", props::seeded_determinism),
        ("stutter", props::stutter),
        ("table", props::table_equivalence),
        ("fixpoint", props::pretty_fixpoint),
    ];
    let mut done = Vec::new();
    for (name, suite) in suites {
        suite(200).map_err(|e| format!("{name}: {e}"))?;
        done.push(name);
    }
    let time = within(start, Duration::from_secs(120))?;
    Ok(format!("{} suites x 200 cases in {time}", done.len()))
}

fn engine_fuzz() -> Result<String, String> {
    let start = Instant::now();
    let s = engine_agreement(100, 3, 8);
    if let Some(f) = s.failures.first() {
        return Err(format!("{}/{} agree; first:\n{f}", s.agreed, s.compared));
    }
    Ok(format!(
        "{}/{} agree ({} violated) in {:.1}s",
        s.agreed,
        s.compared,
        s.violated,
        start.elapsed().as_secs_f64()
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Result<String, String>); 8] = [
        ("corpus model", corpus_model),
        ("sample property", sample_property),
        ("mutation sensitivity", mutation),
        ("differential code equivalence", differential_equivalence),
        ("subset lint", subset_lint),
        ("causality gate", causality_gate),
        ("semantics property suites", property_suites),
        ("engine agreement fuzz", engine_fuzz),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("{} of 8 criteria passed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
