//! Prints the theory document of the corpus model: type definitions,
//! functions and one transition-relation section per component.

use synchrony::check::load_model;
use synchrony::verify::export_theories;

const CRUISE: &str = include_str!("../../../corpus/cruise.syn");

fn main() {
    let p = load_model(CRUISE).unwrap();
    print!("{}", export_theories(&p));
}
