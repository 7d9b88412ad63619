mod common;

use common::gen::{load_generated, random_model, random_requirements};
use common::props;
use synchrony::check::bind_glossary;
use synchrony::syntax::{parse_glossary, parse_requirements};

const CASES: u32 = 200;

fn ok(r: Result<String, String>) {
    match r {
        Ok(summary) => eprintln!("{summary}"),
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn generated_models_load_and_bind() {
    for seed in 0..300 {
        let g = random_model(seed);
        let p = load_generated(&g.text);
        load_generated(&g.automaton_text);
        let (reqs, gls) = random_requirements(&g, seed, 3);
        let reqs = parse_requirements(&reqs).unwrap_or_else(|e| panic!("{e}\n{reqs}"));
        let gls = parse_glossary(&gls).unwrap_or_else(|e| panic!("{e}\n{gls}"));
        if let Err(es) = bind_glossary(&p, &gls, &reqs) {
            panic!("{es:?}\n{}", g.text);
        }
    }
}

#[test]
fn strong_causality_prefix() {
    ok(props::strong_prefix(CASES));
}

#[test]
fn determinism_under_fixed_seed() {
    ok(props::seeded_determinism(CASES));
}

#[test]
fn stutter_preservation() {
    ok(props::stutter(CASES));
}

#[test]
fn function_table_automaton_equivalence() {
    ok(props::table_equivalence(CASES));
}

#[test]
fn parse_pretty_fixpoint() {
    ok(props::pretty_fixpoint(CASES));
}
