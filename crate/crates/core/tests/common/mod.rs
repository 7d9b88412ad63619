#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

use synchrony::check::load_model;
use synchrony::check::Severity;
use synchrony::codegen::{generate_code, generate_harness, lint_subset, write_units, GeneratedUnit, UnitKind};
use synchrony::model::ir::Program;
use synchrony::sim::{random_stimulus, run, ChoicePolicy};

pub const STRICT: [&str; 9] = [
    "-std=c99",
    "-pedantic",
    "-Wall",
    "-Wextra",
    "-Werror",
    "-Wshadow",
    "-Wstrict-prototypes",
    "-Wmissing-prototypes",
    "-O1",
];

pub fn corpus(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn load(text: &str) -> Program {
    load_model(text).unwrap_or_else(|e| panic!("model does not load: {e}"))
}

pub fn has_compiler(cc: &str) -> bool {
    Command::new(cc).arg("--version").output().is_ok_and(|o| o.status.success())
}

/// Generates `p` into `dir` and builds the harness with `cc` under the
/// strict profile. Returns the executable, or the compiler diagnostics.
pub fn build_harness(p: &Program, dir: &Path, cc: &str) -> Result<PathBuf, String> {
    let units = all_units(p)?;
    write_units(dir, &units).map_err(|e| e.to_string())?;
    let exe = dir.join(format!("harness-{cc}"));
    let mut cmd = Command::new(cc);
    cmd.args(STRICT).arg("-I").arg(dir).arg("-o").arg(&exe);
    for u in &units {
        if u.file_name.ends_with(".c") {
            cmd.arg(dir.join(&u.file_name));
        }
    }
    let out = cmd.output().map_err(|e| e.to_string())?;
    if !out.status.success() || !out.stderr.is_empty() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    Ok(exe)
}

pub fn all_units(p: &Program) -> Result<Vec<GeneratedUnit>, String> {
    let mut units = generate_code(p).map_err(|e| e.to_string())?.units;
    units.push(generate_harness(p));
    Ok(units)
}

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run_harness(exe: &Path, stimulus: &Path, ticks: usize) -> Run {
    let out = Command::new(exe).arg(stimulus).arg(ticks.to_string()).output().expect("harness runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

/// Appends each forbidden-construct fixture to the first component unit of
/// `p` and lints. Returns the fixture name with the error codes found.
pub fn lint_fixture_errors(p: &Program) -> Vec<(String, Vec<&'static str>)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus/fixtures/lint");
    let mut names: Vec<_> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".c"))
        .collect();
    names.sort();
    let clean = all_units(p).unwrap();
    names
        .into_iter()
        .map(|name| {
            let snippet = std::fs::read_to_string(dir.join(&name)).unwrap();
            let mut units = clean.clone();
            let u = units
                .iter_mut()
                .find(|u| u.kind == UnitKind::ComponentStep && u.file_name.ends_with(".c"))
                .unwrap();
            u.contents.push('\n');
            u.contents.push_str(&snippet);
            let report = lint_subset(&units);
            let codes = report.findings.iter().filter(|f| f.severity == Severity::Error).map(|f| f.code).collect();
            (name, codes)
        })
        .collect()
}

/// Runs `count` seeded random stimuli of `ticks` ticks through the
/// simulator and the compiled harness `exe`. Returns how many traces were
/// byte-identical, or the first mismatch.
pub fn differential(p: &Program, exe: &Path, dir: &Path, count: u64, ticks: usize) -> Result<u64, String> {
    let path = dir.join("stimulus.stim");
    for seed in 0..count {
        let stim = random_stimulus(p, ticks, 0.3, seed);
        std::fs::write(&path, stim.render(p)).map_err(|e| e.to_string())?;
        let got = run_harness(exe, &path, ticks);
        let trace = run(p, &stim, ChoicePolicy::First, ticks);
        let want = trace.render(p);
        let code = if trace.error.is_some() { 1 } else { 0 };
        if got.stdout != want || got.code != code {
            return Err(format!("seed {seed}: harness exit {} vs {code}\n{}", got.code, got.stderr));
        }
    }
    Ok(count)
}

pub mod fuzz;
pub mod gen;
pub mod props;
