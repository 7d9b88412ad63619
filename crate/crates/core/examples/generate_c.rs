//! Generates C for the corpus model, compiles it with the system C
//! compiler and compares the harness against the simulator.

use std::process::Command;

use synchrony::check::load_model;
use synchrony::codegen::{generate_code, generate_harness, write_units};
use synchrony::sim::{random_stimulus, run, ChoicePolicy};

const CRUISE: &str = include_str!("../../../corpus/cruise.syn");

fn main() {
    let p = load_model(CRUISE).unwrap();
    let mut units = generate_code(&p).unwrap().units;
    units.push(generate_harness(&p));
    let dir = tempfile::tempdir().unwrap();
    write_units(dir.path(), &units).unwrap();
    for u in &units {
        println!("{:<20} {:>6} bytes", u.file_name, u.contents.len());
    }

    let exe = dir.path().join("harness");
    let status = Command::new("cc")
        .args(["-std=c99", "-pedantic", "-Wall", "-Wextra", "-Werror", "-O1", "-o"])
        .arg(&exe)
        .args(units.iter().filter(|u| u.file_name.ends_with(".c")).map(|u| dir.path().join(&u.file_name)))
        .status();
    if !status.is_ok_and(|s| s.success()) {
        println!("no working C compiler, stopping after generation");
        return;
    }

    let stim = random_stimulus(&p, 12, 0.3, 42);
    let stim_path = dir.path().join("random.stim");
    std::fs::write(&stim_path, stim.render(&p)).unwrap();
    let out = Command::new(&exe).arg(&stim_path).arg("12").output().unwrap();
    let compiled = String::from_utf8(out.stdout).unwrap();
    let simulated = run(&p, &stim, ChoicePolicy::First, 12).render(&p);
    print!("\n{compiled}");
    println!("identical to the simulator: {}", compiled == simulated);
}
