//! Detection of transitions that may be enabled together.

use crate::model::eval::{eval_expr, Frame};
use crate::model::ir::{Automaton, ExprKind, Func, Pattern, Slot, TExpr, Transition};
use crate::model::types::TypeTable;
use crate::model::value::Value;

/// Largest number of guard valuations enumerated per transition pair.
const ENUMERATION_LIMIT: u64 = 1 << 16;

fn present(p: &Pattern) -> bool {
    matches!(p, Pattern::Wildcard | Pattern::Literal(_) | Pattern::Bind(_))
}

fn patterns_disjoint(a: &Transition, b: &Transition) -> bool {
    a.patterns.iter().zip(&b.patterns).any(|(p, q)| match (p, q) {
        (Pattern::Absent, x) | (x, Pattern::Absent) => present(x),
        (Pattern::Literal(x), Pattern::Literal(y)) => x != y,
        _ => false,
    })
}

fn vars_of(e: &TExpr, out: &mut Vec<Slot>) {
    e.walk(&mut |n| {
        if let ExprKind::Var(s) = n.kind {
            if !out.contains(&s) {
                out.push(s);
            }
        }
    });
}

/// Whether both transitions can be enabled by one state and input.
/// Answers `true` when the guards are too large to decide by enumeration.
fn may_overlap(types: &TypeTable, funcs: &[Func], a: &Automaton, t1: &Transition, t2: &Transition, inputs: &[crate::model::ir::Port]) -> bool {
    if t1.source != t2.source || patterns_disjoint(t1, t2) {
        return false;
    }
    if t1.guard.is_none() && t2.guard.is_none() {
        return true;
    }
    let mut read = Vec::new();
    for g in [&t1.guard, &t2.guard].into_iter().flatten() {
        vars_of(g, &mut read);
    }
    // Dimensions: state variables read by a guard, and input ports whose
    // value is bound by either transition.
    enum Dim {
        Var(Slot),
        Port(usize),
    }
    let mut dims: Vec<(Dim, Vec<Value>)> = Vec::new();
    let mut budget: u64 = 1;
    let nvars = a.vars.len() as Slot;
    for &s in &read {
        if s < nvars {
            let Some(vals) = Value::enumerate(types, a.vars[s as usize].ty, ENUMERATION_LIMIT) else {
                return true;
            };
            budget = budget.saturating_mul(vals.len() as u64);
            dims.push((Dim::Var(s), vals));
        }
    }
    for (i, (p, q)) in t1.patterns.iter().zip(&t2.patterns).enumerate() {
        let binds = matches!(p, Pattern::Bind(s) if read.contains(s)) || matches!(q, Pattern::Bind(s) if read.contains(s));
        if !binds {
            continue;
        }
        let vals = match (p, q) {
            (Pattern::Literal(v), _) | (_, Pattern::Literal(v)) => vec![v.clone()],
            _ => match Value::enumerate(types, inputs[i].ty, ENUMERATION_LIMIT) {
                Some(v) => v,
                None => return true,
            },
        };
        budget = budget.saturating_mul(vals.len() as u64);
        dims.push((Dim::Port(i), vals));
    }
    if budget > ENUMERATION_LIMIT {
        return true;
    }
    let mut idx = vec![0usize; dims.len()];
    loop {
        let mut frame = Frame::new(a.slots.len());
        for (d, (dim, vals)) in dims.iter().enumerate() {
            let v = &vals[idx[d]];
            match dim {
                Dim::Var(s) => frame.set(*s, v.clone()),
                Dim::Port(i) => {
                    for t in [t1, t2] {
                        if let Pattern::Bind(s) = t.patterns[*i] {
                            frame.set(s, v.clone());
                        }
                    }
                }
            }
        }
        let holds = |g: &Option<TExpr>, frame: &mut Frame| match g {
            None => true,
            Some(g) => matches!(eval_expr(frame, funcs, g), Ok(Value::Bool(true))),
        };
        if holds(&t1.guard, &mut frame) && holds(&t2.guard, &mut frame) {
            return true;
        }
        // odometer increment
        let mut d = 0;
        loop {
            if d == dims.len() {
                return false;
            }
            idx[d] += 1;
            if idx[d] < dims[d].1.len() {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

/// Pairs `(i, j)`, `i < j`, of transitions that may fire in the same
/// situation; the simulator's First policy and the generated code pick `i`.
pub fn overlapping_transitions(types: &TypeTable, funcs: &[Func], a: &Automaton, inputs: &[crate::model::ir::Port]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..a.transitions.len() {
        for j in i + 1..a.transitions.len() {
            if may_overlap(types, funcs, a, &a.transitions[i], &a.transitions[j], inputs) {
                out.push((i, j));
            }
        }
    }
    out
}
