//! Lints the generated units against the embedded C subset, then shows the
//! findings for a unit with a loop and a recursive helper added.

use synchrony::check::load_model;
use synchrony::codegen::{generate_code, lint_subset};

const CRUISE: &str = include_str!("../../../corpus/cruise.syn");

const EXTRA: &str = "
static int32_t spin(int32_t n)
{
    while (n > 0) n--;
    return n;
}

static int32_t fact(int32_t n)
{
    return n <= 1 ? 1 : n * fact(n - 1);
}
";

fn main() {
    let p = load_model(CRUISE).unwrap();
    let mut units = generate_code(&p).unwrap().units;
    let clean = lint_subset(&units);
    println!("generated units: {} findings", clean.findings.len());

    let unit = units.iter_mut().find(|u| u.file_name.ends_with(".c")).unwrap();
    unit.contents.push_str(EXTRA);
    println!("after editing {}:", unit.file_name);
    print!("{}", lint_subset(&units).render());
}
