//! Parses and checks the cruise-control model, then shows the causality
//! gate rejecting an instantaneous cycle.

use synchrony::check::{check_model, load_model};
use synchrony::syntax::parse_model;

const CRUISE: &str = include_str!("../../../corpus/cruise.syn");
const WEAK_CYCLE: &str = include_str!("../../../corpus/fixtures/weak_cycle.syn");

fn main() {
    let program = load_model(CRUISE).expect("the corpus model checks");
    println!("model {}: {} components", program.name, program.components.len());
    for c in &program.components {
        let kind = if c.is_atomic() { "atomic" } else { "composite" };
        println!("  {:<17} {kind:<9} {:?}, {} in, {} out", c.name, c.causality, c.inputs.len(), c.outputs.len());
    }
    let order: Vec<_> = program
        .network
        .schedule
        .iter()
        .map(|&i| program.network.instances[i as usize].path.clone())
        .collect();
    println!("evaluation order: {}", order.join(", "));

    let ast = parse_model(WEAK_CYCLE).expect("the fixture parses");
    let checked = check_model(&ast);
    println!("\nweak cycle fixture, passes = {}", checked.report.passes());
    print!("{}", checked.report.render());
}
