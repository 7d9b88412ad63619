//! Bounded verification of requirement formulas with two independent
//! engines, their cross-check, and the theory export.

mod cross;
mod explicit;
mod formula;
mod sexpr;
mod smt;
mod theory;

use std::fmt;

use crate::sim::Trace;
use crate::syntax::Stimulus;

pub use cross::{cross_check, render_report, CrossRow};
pub use explicit::{bmc_explicit, bmc_explicit_with, ExplicitOutcome, DEFAULT_CONFIG_CAP};
pub use formula::{formulas, monitor, replay, requirement_to_formula, Conjunct, MonitorStep, Replay, ReplayError, TemporalFormula};
pub use smt::{bmc_smt, encode, SmtEngine, SmtScript, Solver, SOLVER_ENV};
pub use theory::export_theories;

/// A concrete run violating the formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    /// Root inputs of ticks `0..=tick`.
    pub stimulus: Stimulus,
    /// Fired transition per tick and instance; replay with
    /// [`crate::sim::ChoicePolicy::Scripted`].
    pub choices: Vec<Vec<Option<usize>>>,
    pub trace: Trace,
    /// Tick at which the violated consequent (or invariant) is observed.
    pub tick: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    HoldsUpTo(usize),
    Counterexample(Box<Counterexample>),
    EngineError(String),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::HoldsUpTo(_))
    }

    pub fn counterexample(&self) -> Option<&Counterexample> {
        match self {
            Verdict::Counterexample(c) => Some(c),
            _ => None,
        }
    }

    /// Same outcome; counterexamples must be found at the same tick.
    pub fn agrees_with(&self, other: &Verdict) -> bool {
        match (self, other) {
            (Verdict::HoldsUpTo(a), Verdict::HoldsUpTo(b)) => a == b,
            (Verdict::Counterexample(a), Verdict::Counterexample(b)) => a.tick == b.tick,
            _ => false,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::HoldsUpTo(k) => write!(f, "holds({k})"),
            Verdict::Counterexample(c) => write!(f, "violated@{}", c.tick),
            Verdict::EngineError(m) => write!(f, "error({m})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::check::{bind_glossary, load_model, Prop};
    use crate::model::ir::Program;
    use crate::sim::ChoicePolicy;
    use crate::syntax::{parse_glossary, parse_requirements};

    fn corpus(model: &str) -> (Program, Vec<TemporalFormula>) {
        let p = load_model(model).unwrap();
        let reqs = parse_requirements(include_str!("../../../../corpus/cruise.req")).unwrap();
        let gls = parse_glossary(include_str!("../../../../corpus/cruise.gls")).unwrap();
        let b = bind_glossary(&p, &gls, &reqs).unwrap();
        (p, formulas(&b))
    }

    fn cruise() -> (Program, Vec<TemporalFormula>) {
        corpus(include_str!("../../../../corpus/cruise.syn"))
    }

    fn mutant() -> (Program, Vec<TemporalFormula>) {
        corpus(include_str!("../../../../corpus/cruise_mutant.syn"))
    }

    fn engine() -> Option<SmtEngine> {
        let e = SmtEngine::from_env();
        if e.solver.is_none() {
            eprintln!("no solver on this machine, skipping the SMT half");
            return None;
        }
        Some(e)
    }

    #[test]
    fn r1_reads_as_next_tick_response() {
        let (p, fs) = cruise();
        assert_eq!(
            fs[0].display(&p).to_string(),
            "G((@logic.ctrl.On and ([button = Accel] and ([voltage >= 11] and [pedal_fault = false]))) -> X throttle?)"
        );
    }

    #[test]
    fn explicit_engine_holds_on_the_corpus() {
        let (p, fs) = cruise();
        for f in &fs {
            assert_eq!(bmc_explicit(&p, f, 12), Verdict::HoldsUpTo(12), "{}", f.id);
        }
    }

    #[test]
    fn mutant_violates_r2_at_tick_two() {
        let (p, fs) = mutant();
        assert!(bmc_explicit(&p, &fs[0], 10).holds());
        let v = bmc_explicit(&p, &fs[1], 10);
        let c = v.counterexample().expect("counterexample");
        assert_eq!(c.tick, 2);
        let r = replay(&p, &fs[1], &c.stimulus, ChoicePolicy::Scripted(c.choices.clone())).unwrap();
        assert_eq!(r.violation, Some(2));
        // throttle is the first root output
        assert!(c.trace.rows[2].outputs[0].is_present());
    }

    #[test]
    fn smt_engine_matches_on_corpus_and_mutant() {
        let Some(e) = engine() else { return };
        let (p, fs) = cruise();
        for f in &fs {
            assert_eq!(bmc_smt(&p, f, 8, &e).1, Verdict::HoldsUpTo(8), "{}", f.id);
        }
        let (p, fs) = mutant();
        let (_, v) = bmc_smt(&p, &fs[1], 8, &e);
        let c = v.counterexample().unwrap_or_else(|| panic!("{v}"));
        assert_eq!(c.tick, 2);
        let r = replay(&p, &fs[1], &c.stimulus, ChoicePolicy::Scripted(c.choices.clone())).unwrap();
        assert_eq!(r.violation, Some(2));
    }

    #[test]
    fn bound_zero_script_has_only_the_initial_state() {
        let (p, fs) = cruise();
        let s = encode(&p, &fs[0], 0);
        assert!(s.ticks.is_empty());
        let text = s.render();
        assert!(text.contains("(define-fun s0_t0 () Int 0)"));
        assert!(!text.contains("check-sat"));
        assert!(!text.contains("declare-const"));
    }

    #[test]
    fn dropped_unrolling_is_flagged() {
        let Some(mut e) = engine() else { return };
        e.drop_last_unrolling = true;
        let (p, fs) = mutant();
        let rows = cross_check(&p, &fs[1..], 3, &e);
        assert!(!rows[0].agree);
        assert!(render_report(&rows).ends_with("\tDISAGREE\n"));
    }

    #[test]
    fn unsatisfiable_antecedent_is_vacuous() {
        let (p, fs) = cruise();
        let f = TemporalFormula {
            id: "never".into(),
            conjuncts: vec![Conjunct {
                antecedent: Prop::Const(false),
                consequent: Prop::Const(false),
                next: false,
            }],
            atoms: fs[0].atoms.clone(),
        };
        let e = SmtEngine::from_env();
        let rows = cross_check(&p, &[f], 4, &e);
        assert_eq!(rows[0].explicit, Verdict::HoldsUpTo(4));
        assert_eq!(rows[0].vacuous, vec![0]);
        assert_eq!(rows[0].warnings().len(), 1);
        if e.solver.is_some() {
            assert!(rows[0].agree);
        }
    }

    #[test]
    fn corpus_theory_has_a_section_per_component() {
        let (p, _) = cruise();
        let doc = export_theories(&p);
        assert_eq!(doc.sections.len(), p.components.len() + 1);
        let pos = |n: &str| doc.sections.iter().position(|s| s.name == n).unwrap();
        assert!(pos("Controller") < pos("Logic") && pos("Logic") < pos("CruiseControl"));
        assert!(pos("Sensing") < pos("CruiseControl"));
    }

    #[test]
    fn unrolling_follows_the_schedule() {
        // The strong reader is declared before the weak writer it reads.
        let src = "model O {
          component R { in i: Bool init false out o: Bool init false causality strong
            automaton { states S init transition S -> S when i?x then o = not x } }
          component W { in a: Bool init false out b: Bool init false causality weak
            automaton { states S init transition S -> S when a?x then b = x } }
          component Top { in a: Bool init false out o: Bool init false causality strong
            sub r: R sub w: W
            channel w.b -> r.i delegate a -> w.a delegate r.o -> o } }";
        let p = load_model(src).unwrap();
        let reqs = parse_requirements("REQ f WHILE always IF a set THEN NEXT o cleared\n").unwrap();
        let gls = parse_glossary("\"always\" := true\n\"a set\" := a = true\n\"o cleared\" := o = false\n").unwrap();
        let fs = formulas(&bind_glossary(&p, &gls, &reqs).unwrap());
        let script = encode(&p, &fs[0], 2).render();
        let decl = script.find("(declare-const o1_0_t0").unwrap();
        let first_use = script.find("o1_0_t0").unwrap();
        assert_eq!(decl, first_use - "(declare-const ".len());
        let Some(e) = engine() else { return };
        let rows = cross_check(&p, &fs, 4, &e);
        assert!(rows[0].agree && rows[0].explicit.holds(), "{}", render_report(&rows));
    }
}
