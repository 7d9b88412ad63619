//! Semantic property suites over random models. Each suite runs `cases`
//! accepted cases and returns a short summary, or the failing case.

use std::cell::Cell;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use synchrony::model::ast::Causality;
use synchrony::model::value::Message;
use synchrony::sim::{init_state, random_stimulus, run, step_system, ChoicePolicy, Chooser};
use synchrony::syntax::{parse_model, pretty_model};

use super::gen::{load_generated, random_model};

fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config {
        cases,
        failure_persistence: None,
        max_global_rejects: 100_000,
        ..Config::default()
    })
}

fn finish(r: Result<(), proptest::test_runner::TestError<impl std::fmt::Debug>>, summary: String) -> Result<String, String> {
    r.map(|_| summary).map_err(|e| e.to_string())
}

/// Outputs of a strongly causal root up to tick `t` do not depend on the
/// inputs from tick `t` on.
pub fn strong_prefix(cases: u32) -> Result<String, String> {
    let r = runner(cases).run(&(any::<u64>(), any::<u64>(), any::<u64>(), 0usize..16), |(m, s1, s2, cut)| {
        let g = random_model(m);
        let p = load_generated(&g.text);
        prop_assume!(p.root().causality == Causality::Strong);
        let a = random_stimulus(&p, 16, 0.3, s1);
        let mut b = a.clone();
        b.rows.splice(cut.., random_stimulus(&p, 16 - cut, 0.3, s2).rows);
        let ta = run(&p, &a, ChoicePolicy::First, 16);
        let tb = run(&p, &b, ChoicePolicy::First, 16);
        prop_assert!(ta.error.is_none() && tb.error.is_none());
        for t in 0..=cut {
            prop_assert_eq!(&ta.rows[t].outputs, &tb.rows[t].outputs, "tick {} of\n{}", t, g.text);
        }
        Ok(())
    });
    finish(r, format!("{cases} strongly causal roots"))
}

/// The same seed gives the same run, down to every random choice.
pub fn seeded_determinism(cases: u32) -> Result<String, String> {
    let r = runner(cases).run(&(any::<u64>(), any::<u64>(), any::<u64>()), |(m, s, seed)| {
        let g = random_model(m);
        let p = load_generated(&g.text);
        let stim = random_stimulus(&p, 20, 0.3, s);
        let a = run(&p, &stim, ChoicePolicy::UniformRandom(seed), 20);
        let b = run(&load_generated(&g.text), &stim, ChoicePolicy::UniformRandom(seed), 20);
        prop_assert_eq!(a.render(&p), b.render(&p));
        Ok(())
    });
    finish(r, format!("{cases} seeded runs repeated"))
}

/// A tick with all inputs absent in which nothing fires leaves control
/// states and variables alone and empties the strong buffers.
pub fn stutter(cases: u32) -> Result<String, String> {
    let hits = Cell::new(0u32);
    let r = runner(cases).run(&(any::<u64>(), any::<u64>(), 0usize..8), |(m, s, prefix)| {
        let g = random_model(m);
        let p = load_generated(&g.text);
        let stim = random_stimulus(&p, prefix, 0.3, s);
        let mut chooser = Chooser::new(ChoicePolicy::First);
        let mut st = init_state(&p);
        for (t, row) in stim.rows.iter().enumerate() {
            st = step_system(&p, &st, row, t, &mut chooser).map_err(|e| TestCaseError::fail(e.to_string()))?.state;
        }
        let idle = vec![Message::Absent; p.root().inputs.len()];
        let step = step_system(&p, &st, &idle, prefix, &mut chooser).map_err(|e| TestCaseError::fail(e.to_string()))?;
        if step.fired.iter().all(Option::is_none) {
            hits.set(hits.get() + 1);
            for (before, after) in st.instances.iter().zip(&step.state.instances) {
                prop_assert_eq!(before.control, after.control);
                prop_assert_eq!(&before.vars, &after.vars);
                if let Some(buf) = &after.buffer {
                    prop_assert!(buf.iter().all(|m| !m.is_present()));
                }
            }
            if st.instances.iter().all(|i| i.buffer.as_ref().is_none_or(|b| b.iter().all(|m| !m.is_present()))) {
                prop_assert_eq!(&st, &step.state);
                prop_assert!(step.outputs.iter().all(|m| !m.is_present()));
            }
        }
        Ok(())
    });
    let hits = hits.get();
    if r.is_ok() && hits * 10 < cases {
        return Err(format!("only {hits} of {cases} cases reached a stuttering tick"));
    }
    finish(r, format!("{cases} idle ticks, {hits} with every instance stuttering"))
}

/// A function table and the single-state automaton with one self-loop per
/// row produce the same traces under every policy.
pub fn table_equivalence(cases: u32) -> Result<String, String> {
    let r = runner(cases).run(&(any::<u64>(), any::<u64>(), any::<u64>()), |(m, s, seed)| {
        let g = random_model(m);
        prop_assume!(g.atomics.iter().any(|a| a.table));
        let table = load_generated(&g.text);
        let auto = load_generated(&g.automaton_text);
        let stim = random_stimulus(&table, 20, 0.3, s);
        for policy in [ChoicePolicy::First, ChoicePolicy::UniformRandom(seed)] {
            let a = run(&table, &stim, policy.clone(), 20).render(&table);
            let b = run(&auto, &stim, policy, 20).render(&auto);
            prop_assert_eq!(a, b);
        }
        Ok(())
    });
    finish(r, format!("{cases} models with tables"))
}

/// Printing a parsed model and parsing it again gives the same syntax
/// tree, and printing is then stable.
pub fn pretty_fixpoint(cases: u32) -> Result<String, String> {
    let r = runner(cases).run(&any::<u64>(), |m| {
        let g = random_model(m);
        for text in [&g.text, &g.automaton_text] {
            let ast = parse_model(text).map_err(|e| TestCaseError::fail(format!("{e:?}")))?;
            let printed = pretty_model(&ast);
            let again = parse_model(&printed).map_err(|e| TestCaseError::fail(format!("{e:?}\n{printed}")))?;
            prop_assert_eq!(&ast, &again);
            prop_assert_eq!(&printed, &pretty_model(&again));
        }
        Ok(())
    });
    finish(r, format!("{cases} models printed and reparsed"))
}
