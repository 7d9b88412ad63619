//! Binds the cruise-control requirements through the glossary and checks
//! them with both engines, on the model and on a mutant that lost the
//! switch-off check.

use synchrony::check::{bind_glossary, load_model};
use synchrony::syntax::{parse_glossary, parse_requirements};
use synchrony::verify::{cross_check, formulas, render_report, SmtEngine};

const CRUISE: &str = include_str!("../../../corpus/cruise.syn");
const MUTANT: &str = include_str!("../../../corpus/cruise_mutant.syn");
const REQS: &str = include_str!("../../../corpus/cruise.req");
const GLOSSARY: &str = include_str!("../../../corpus/cruise.gls");

fn main() {
    let reqs = parse_requirements(REQS).unwrap();
    let glossary = parse_glossary(GLOSSARY).unwrap();
    let engine = SmtEngine::from_env();
    for text in [CRUISE, MUTANT] {
        let p = load_model(text).unwrap();
        let fs = formulas(&bind_glossary(&p, &glossary, &reqs).unwrap());
        println!("== {}", p.name);
        for f in &fs {
            println!("{}", f.display(&p));
        }
        let rows = cross_check(&p, &fs, 10, &engine);
        print!("{}", render_report(&rows));
        for r in &rows {
            if let Some(c) = r.explicit.counterexample() {
                println!("{} counterexample, violated at tick {}:", r.id, c.tick);
                print!("{}", c.trace.render(&p));
            }
        }
    }
}
