//! Engine agreement over random models and requirements.

use synchrony::check::bind_glossary;
use synchrony::syntax::{parse_glossary, parse_requirements};
use synchrony::verify::{cross_check, formulas, SmtEngine, Verdict};

use super::gen::{load_generated, random_model, random_requirements};

pub struct FuzzSummary {
    pub compared: usize,
    pub agreed: usize,
    pub violated: usize,
    pub failures: Vec<String>,
}

/// Checks `per_model` random formulas on each of `models` random models at
/// `bound` with both engines.
pub fn engine_agreement(models: u64, per_model: usize, bound: usize) -> FuzzSummary {
    let engine = SmtEngine::from_env();
    let mut s = FuzzSummary {
        compared: 0,
        agreed: 0,
        violated: 0,
        failures: Vec::new(),
    };
    for seed in 0..models {
        let g = random_model(seed);
        let p = load_generated(&g.text);
        let (req_text, gls_text) = random_requirements(&g, seed, per_model);
        let reqs = parse_requirements(&req_text).unwrap_or_else(|e| panic!("{e}\n{req_text}"));
        let gls = parse_glossary(&gls_text).unwrap_or_else(|e| panic!("{e}\n{gls_text}"));
        let bindings = bind_glossary(&p, &gls, &reqs).unwrap_or_else(|e| panic!("{e:?}\n{gls_text}\n{}", g.text));
        for row in cross_check(&p, &formulas(&bindings), bound, &engine) {
            s.compared += 1;
            if matches!(row.explicit, Verdict::Counterexample(_)) {
                s.violated += 1;
            }
            if row.agree {
                s.agreed += 1;
            } else {
                s.failures.push(format!(
                    "model seed {seed}, {}: explicit {} smt {}\n{}\n{req_text}{gls_text}",
                    row.id, row.explicit, row.smt, g.text
                ));
            }
        }
    }
    s
}
