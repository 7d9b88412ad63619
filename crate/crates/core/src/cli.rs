//! Command-line front end: `check`, `simulate`, `generate`, `verify` and
//! `export-theories`.
//!
//! Machine-readable results go to standard output, diagnostics to standard
//! error. Exit status 0 means success (model passes, properties hold,
//! engines agree), 1 means findings, violations or disagreement, 2 means a
//! usage or I/O error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::check::{bind_glossary, check_model, load_model, LoadError};
use crate::codegen::{first_policy_components, generate_code, generate_harness, lint_subset, write_units};
use crate::model::ir::Program;
use crate::sim::{run, ChoicePolicy};
use crate::syntax::{parse_glossary, parse_model, parse_requirements, parse_stimulus};
use crate::verify::{
    bmc_explicit_with, bmc_smt, cross_check, export_theories, formulas, render_report, SmtEngine, TemporalFormula,
    Verdict, DEFAULT_CONFIG_CAP,
};

#[derive(Parser, Debug)]
#[command(name = "synchrony", version, about = "Time-synchronous component models: check, simulate, generate C, verify")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and statically check a model.
    Check { model: PathBuf },
    /// Run the reference simulator on a stimulus file and print the trace.
    Simulate {
        model: PathBuf,
        #[arg(long)]
        stimulus: PathBuf,
        /// Number of ticks; defaults to the stimulus length.
        #[arg(long)]
        ticks: Option<usize>,
        #[arg(long, value_enum, default_value_t = Policy::First)]
        policy: Policy,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Generate C code and the test harness into DIR/gen/<model>/.
    Generate {
        model: PathBuf,
        #[arg(short, long, default_value = ".")]
        output: PathBuf,
    },
    /// Check requirements against the model up to a bound.
    Verify {
        model: PathBuf,
        #[arg(long)]
        reqs: PathBuf,
        #[arg(long)]
        glossary: PathBuf,
        #[arg(long)]
        bound: usize,
        #[arg(long, value_enum, default_value_t = Engine::Cross)]
        engine: Engine,
        /// SMT scripts and counterexamples go to DIR/obl/<model>/.
        #[arg(short, long, default_value = ".")]
        output: PathBuf,
        /// Visited-configuration cap of the explicit engine.
        #[arg(long, default_value_t = DEFAULT_CONFIG_CAP)]
        cap: usize,
        /// Drop the last unrolling in the SMT engine (toolchain fault injection).
        #[arg(long, hide = true)]
        inject_unrolling_fault: bool,
    },
    /// Write the theory document to DIR/obl/<model>/theories.txt.
    ExportTheories {
        model: PathBuf,
        #[arg(short, long, default_value = ".")]
        output: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Policy {
    First,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Engine {
    Explicit,
    Smt,
    Cross,
}

/// Why a command stopped: findings (exit 1) or a usage/I-O problem (exit 2).
enum Failure {
    Findings(String),
    Usage(String),
}

type Outcome = Result<i32, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Failure::Usage(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Program, Failure> {
    let text = read(path)?;
    load_model(&text).map_err(|e| match e {
        LoadError::Parse(p) => Failure::Findings(p.to_string()),
        LoadError::Check(r) => Failure::Findings(r.render().trim_end().to_string()),
    })
}

/// Runs the command line `args` (program name first) and returns the exit
/// status.
pub fn dispatch<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(err, "{e}");
                2
            } else {
                let _ = write!(out, "{e}");
                0
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Check { model } => check(&model, err),
        Command::Simulate {
            model,
            stimulus,
            ticks,
            policy,
            seed,
        } => simulate(&model, &stimulus, ticks, policy, seed, out, err),
        Command::Generate { model, output } => generate(&model, &output, out, err),
        Command::Verify {
            model,
            reqs,
            glossary,
            bound,
            engine,
            output,
            cap,
            inject_unrolling_fault,
        } => {
            let opts = VerifyOptions {
                bound,
                engine,
                output,
                cap,
                fault: inject_unrolling_fault,
            };
            verify(&model, &reqs, &glossary, &opts, out, err)
        }
        Command::ExportTheories { model, output } => theories(&model, &output, out),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Findings(m)) => {
            let _ = writeln!(err, "{m}");
            1
        }
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            2
        }
    }
}

fn check(path: &Path, err: &mut dyn Write) -> Outcome {
    let text = read(path)?;
    let model = parse_model(&text).map_err(|es| {
        Failure::Findings(es.iter().map(|e| format!("Error Syntax {}: {e}", path.display())).collect::<Vec<_>>().join("\n"))
    })?;
    let checked = check_model(&model);
    let _ = write!(err, "{}", checked.report.render());
    Ok(if checked.report.passes() { 0 } else { 1 })
}

fn simulate(
    path: &Path,
    stimulus: &Path,
    ticks: Option<usize>,
    policy: Policy,
    seed: u64,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Outcome {
    let p = load(path)?;
    let text = read(stimulus)?;
    let stim = parse_stimulus(&text, &p).map_err(|e| Failure::Usage(format!("{}: {e}", stimulus.display())))?;
    let ticks = ticks.unwrap_or(stim.len());
    if ticks > stim.len() {
        return Err(Failure::Usage(format!("the stimulus has {} ticks, {ticks} requested", stim.len())));
    }
    let policy = match policy {
        Policy::First => ChoicePolicy::First,
        Policy::Random => ChoicePolicy::UniformRandom(seed),
    };
    let trace = run(&p, &stim, policy, ticks);
    let _ = write!(out, "{}", trace.render(&p));
    match trace.error {
        Some(e) => {
            let _ = writeln!(err, "{e}");
            Ok(1)
        }
        None => Ok(0),
    }
}

fn generate(path: &Path, output: &Path, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let p = load(path)?;
    let generated = generate_code(&p).map_err(|e| Failure::Findings(e.to_string()))?;
    let mut units = generated.units;
    units.push(generate_harness(&p));
    for c in first_policy_components(&p) {
        let _ = writeln!(err, "warning: {c}: overlapping transitions, generated code takes the first enabled one");
    }
    let lint = lint_subset(&units);
    if !lint.passes() {
        return Err(Failure::Findings(lint.render().trim_end().to_string()));
    }
    let dir = output.join("gen").join(&p.name);
    write_units(&dir, &units).map_err(|e| Failure::Usage(format!("{}: {e}", dir.display())))?;
    for u in &units {
        let _ = writeln!(out, "{}", dir.join(&u.file_name).display());
    }
    Ok(0)
}

struct VerifyOptions {
    bound: usize,
    engine: Engine,
    output: PathBuf,
    cap: usize,
    fault: bool,
}

fn save_counterexample(p: &Program, dir: &Path, f: &TemporalFormula, bound: usize, v: &Verdict, err: &mut dyn Write) -> Result<(), Failure> {
    let Some(c) = v.counterexample() else { return Ok(()) };
    let base = dir.join(format!("{}_k{bound}", f.id));
    let stim = base.with_extension("cex.stim");
    write_file(&stim, &c.stimulus.render(p))?;
    write_file(&base.with_extension("cex.trace"), &c.trace.render(p))?;
    let _ = writeln!(err, "{}: violated at tick {}, stimulus in {}", f.id, c.tick, stim.display());
    Ok(())
}

fn verify(model: &Path, reqs: &Path, glossary: &Path, o: &VerifyOptions, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let p = load(model)?;
    let req_text = read(reqs)?;
    let gls_text = read(glossary)?;
    let reqs = parse_requirements(&req_text).map_err(|e| Failure::Findings(format!("{}: {e}", reqs.display())))?;
    let gls = parse_glossary(&gls_text).map_err(|e| Failure::Findings(format!("{}: {e}", glossary.display())))?;
    let bindings = bind_glossary(&p, &gls, &reqs)
        .map_err(|es| Failure::Findings(es.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("\n")))?;
    let fs = formulas(&bindings);
    let dir = o.output.join("obl").join(&p.name);
    let mut engine = SmtEngine::from_env();
    engine.drop_last_unrolling = o.fault;
    let script_path = |f: &TemporalFormula| dir.join(format!("{}_k{}.smt2", f.id, o.bound));

    let mut ok = true;
    match o.engine {
        Engine::Explicit => {
            for f in &fs {
                let r = bmc_explicit_with(&p, f, o.bound, o.cap);
                let _ = writeln!(out, "{}\t{}", f.id, r.verdict);
                save_counterexample(&p, &dir, f, o.bound, &r.verdict, err)?;
                ok &= r.verdict.holds();
                if r.verdict.holds() {
                    for (c, seen) in r.antecedent_seen.iter().enumerate() {
                        if !seen {
                            let _ = writeln!(err, "warning: {}: Vacuity: antecedent of conjunct {} is never satisfied", f.id, c + 1);
                        }
                    }
                }
            }
        }
        Engine::Smt => {
            for f in &fs {
                let (script, v) = bmc_smt(&p, f, o.bound, &engine);
                write_file(&script_path(f), &script.render())?;
                let _ = writeln!(out, "{}\t{v}", f.id);
                save_counterexample(&p, &dir, f, o.bound, &v, err)?;
                ok &= v.holds();
            }
        }
        Engine::Cross => {
            let rows = cross_check(&p, &fs, o.bound, &engine);
            for (f, r) in fs.iter().zip(&rows) {
                write_file(&script_path(f), &r.script.render())?;
                let cex = if r.explicit.counterexample().is_some() { &r.explicit } else { &r.smt };
                save_counterexample(&p, &dir, f, o.bound, cex, err)?;
                for w in r.warnings() {
                    let _ = writeln!(err, "{w}");
                }
                if !r.agree {
                    let _ = writeln!(err, "{}: engines disagree, the toolchain is faulty", r.id);
                }
                ok &= r.agree && r.explicit.holds();
            }
            let _ = write!(out, "{}", render_report(&rows));
        }
    }
    Ok(if ok { 0 } else { 1 })
}

fn theories(path: &Path, output: &Path, out: &mut dyn Write) -> Outcome {
    let p = load(path)?;
    let file = output.join("obl").join(&p.name).join("theories.txt");
    write_file(&file, &export_theories(&p).to_string())?;
    let _ = writeln!(out, "{}", file.display());
    Ok(0)
}
