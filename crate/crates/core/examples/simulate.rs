//! Runs the reference simulator on the corpus stimulus, then on random
//! stimuli under both choice policies.

use synchrony::check::load_model;
use synchrony::sim::{random_stimulus, run, ChoicePolicy};
use synchrony::syntax::parse_stimulus;

const CRUISE: &str = include_str!("../../../corpus/cruise.syn");
const STIMULUS: &str = include_str!("../../../corpus/cruise.stim");
const SHAPES: &str = include_str!("../../../corpus/fixtures/shapes.syn");

fn main() {
    let cruise = load_model(CRUISE).unwrap();
    let stim = parse_stimulus(STIMULUS, &cruise).unwrap();
    let trace = run(&cruise, &stim, ChoicePolicy::First, stim.len());
    println!("corpus stimulus, {} ticks:", stim.len());
    print!("{}", trace.render(&cruise));

    // Overlapping transitions: the policy decides which one fires.
    let shapes = load_model(SHAPES).unwrap();
    let stim = random_stimulus(&shapes, 8, 0.3, 7);
    for policy in [ChoicePolicy::First, ChoicePolicy::UniformRandom(1), ChoicePolicy::UniformRandom(2)] {
        println!("\nshapes under {policy:?}:");
        let trace = run(&shapes, &stim, policy, stim.len());
        print!("{}", trace.render(&shapes));
        if let Some(e) = trace.error {
            println!("stopped: {e}");
        }
    }
}
