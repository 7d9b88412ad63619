//! Safety formulas `G(A -> [X] C)` built from bound requirements, and their
//! evaluation along a run.

use std::fmt;

use crate::check::{Atom, Bindings, BoundRequirement, Prop, TickView};
use crate::model::eval::EvalError;
use crate::model::ir::{Func, Program};
use crate::sim::{init_state, step_system, ChoicePolicy, Chooser, SimError, Trace, TraceRow};
use crate::syntax::{Stimulus, Timing};

/// `G(antecedent -> consequent)`, or `G(antecedent -> X consequent)`
/// when `next` is set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Conjunct {
    pub antecedent: Prop,
    pub consequent: Prop,
    pub next: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TemporalFormula {
    /// Requirement id, or any label for hand-built formulas.
    pub id: String,
    pub conjuncts: Vec<Conjunct>,
    /// Atom table the propositions index into.
    pub atoms: Vec<Atom>,
}

/// THEN gives `G(W and I -> [X] T)`; ELSE adds `G(W and not I -> [X] E)`.
pub fn requirement_to_formula(req: &BoundRequirement, atoms: &[Atom]) -> TemporalFormula {
    let mut conjuncts = vec![Conjunct {
        antecedent: Prop::And(vec![req.while_cond.clone(), req.if_cond.clone()]),
        consequent: req.then_resp.clone(),
        next: req.timing == Timing::NextTick,
    }];
    if let Some(e) = &req.else_resp {
        conjuncts.push(Conjunct {
            antecedent: Prop::And(vec![req.while_cond.clone(), Prop::not(req.if_cond.clone())]),
            consequent: e.clone(),
            next: req.else_timing == Timing::NextTick,
        });
    }
    TemporalFormula {
        id: req.id.clone(),
        conjuncts,
        atoms: atoms.to_vec(),
    }
}

/// One formula per bound requirement, in file order.
pub fn formulas(bindings: &Bindings) -> Vec<TemporalFormula> {
    bindings
        .requirements
        .iter()
        .map(|r| requirement_to_formula(r, &bindings.atoms))
        .collect()
}

impl TemporalFormula {
    pub fn display<'a>(&'a self, program: &'a Program) -> FormulaDisplay<'a> {
        FormulaDisplay { f: self, program }
    }
}

pub struct FormulaDisplay<'a> {
    f: &'a TemporalFormula,
    program: &'a Program,
}

impl fmt::Display for FormulaDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.f.conjuncts.iter().enumerate() {
            if i > 0 {
                f.write_str(" and ")?;
            }
            write!(
                f,
                "G({} -> {}{})",
                c.antecedent.display(self.program, &self.f.atoms),
                if c.next { "X " } else { "" },
                c.consequent.display(self.program, &self.f.atoms)
            )?;
        }
        Ok(())
    }
}

/// Outcome of one monitored tick.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct MonitorStep {
    pub violated: bool,
    /// Antecedents of `next` conjuncts that held this tick, one bit per
    /// conjunct index.
    pub pending: u64,
    /// Antecedents that held this tick, one bit per conjunct index.
    pub antecedents: u64,
}

/// Evaluate the formula at one tick given the antecedents of `next`
/// conjuncts that held at the previous tick.
pub fn monitor(formula: &TemporalFormula, funcs: &[Func], view: &TickView, pending: u64) -> Result<MonitorStep, EvalError> {
    let mut out = MonitorStep::default();
    for (i, c) in formula.conjuncts.iter().enumerate() {
        let bit = 1u64 << i;
        let a = c.antecedent.eval(&formula.atoms, funcs, view)?;
        if a {
            out.antecedents |= bit;
        }
        if c.next {
            if pending & bit != 0 && !c.consequent.eval(&formula.atoms, funcs, view)? {
                out.violated = true;
            }
            if a {
                out.pending |= bit;
            }
        } else if a && !c.consequent.eval(&formula.atoms, funcs, view)? {
            out.violated = true;
        }
    }
    Ok(out)
}

/// A simulated run with the formula monitored along it.
#[derive(Clone, Debug)]
pub struct Replay {
    pub trace: Trace,
    /// First tick at which the formula is violated.
    pub violation: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ReplayError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("tick {tick}: evaluating the formula: {error}")]
    Formula { tick: usize, error: EvalError },
}

/// Run the simulator over the whole stimulus and monitor the formula,
/// stopping at the first violation.
pub fn replay(program: &Program, formula: &TemporalFormula, stimulus: &Stimulus, policy: ChoicePolicy) -> Result<Replay, ReplayError> {
    assert!(formula.conjuncts.len() <= 64, "at most 64 conjuncts");
    let mut chooser = Chooser::new(policy);
    let mut st = init_state(program);
    let mut trace = Trace::default();
    let mut pending = 0;
    for (t, inputs) in stimulus.rows.iter().enumerate() {
        let step = step_system(program, &st, inputs, t, &mut chooser)?;
        let states = st.controls();
        let vars = st.vars();
        let view = TickView {
            inputs,
            outputs: &step.outputs,
            states: &states,
            vars: &vars,
        };
        let m = monitor(formula, &program.funcs, &view, pending).map_err(|error| ReplayError::Formula { tick: t, error })?;
        trace.rows.push(TraceRow {
            inputs: inputs.clone(),
            outputs: step.outputs,
        });
        if m.violated {
            return Ok(Replay {
                trace,
                violation: Some(t),
            });
        }
        pending = m.pending;
        st = step.state;
        chooser.advance();
    }
    Ok(Replay { trace, violation: None })
}
