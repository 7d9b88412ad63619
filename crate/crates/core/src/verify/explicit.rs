//! Explicit-state bounded model checking.
//!
//! Breadth-first search over (system state, pending obligations), branching
//! on every root-input combination (each port: absent or any value of its
//! type) and on every enabled transition of every instance. A configuration
//! is expanded only the first time it is reached; being breadth-first, that
//! is with the most remaining ticks, so later visits cannot find anything
//! new within the bound.

use std::collections::HashMap;

use crate::check::TickView;
use crate::model::ir::Program;
use crate::model::value::{Message, Value};
use crate::sim::{init_state, step_system_with, ChoicePolicy, SystemState};
use crate::syntax::Stimulus;

use super::formula::{monitor, replay, TemporalFormula};
use super::{Counterexample, Verdict};

/// Default cap on stored configurations.
pub const DEFAULT_CONFIG_CAP: usize = 10_000_000;

/// Largest value set enumerated for one input port.
const PORT_DOMAIN_LIMIT: u64 = 1 << 12;

/// Verdict plus search statistics.
#[derive(Clone, Debug)]
pub struct ExplicitOutcome {
    pub verdict: Verdict,
    pub configurations: usize,
    /// Per conjunct, whether its antecedent held somewhere in the explored
    /// space.
    pub antecedent_seen: Vec<bool>,
}

pub fn bmc_explicit(program: &Program, formula: &TemporalFormula, bound: usize) -> Verdict {
    bmc_explicit_with(program, formula, bound, DEFAULT_CONFIG_CAP).verdict
}

type Key = (SystemState, u64);

struct Node {
    parent: Option<u32>,
    /// Inputs and choices of the tick leading here.
    inputs: Vec<Message>,
    fired: Vec<Option<usize>>,
}

fn input_universe(program: &Program) -> Result<Vec<Vec<Message>>, String> {
    let mut out = Vec::new();
    for p in &program.root().inputs {
        let vals = Value::enumerate(&program.types, p.ty, PORT_DOMAIN_LIMIT)
            .ok_or_else(|| format!("input `{}` has too many values to enumerate", p.name))?;
        let mut msgs = vec![Message::Absent];
        msgs.extend(vals.into_iter().map(Message::Present));
        out.push(msgs);
    }
    Ok(out)
}

/// All choice vectors of one tick: calls `visit` once per combination of
/// enabled transitions.
fn for_each_choice<E>(
    mut step: impl FnMut(&mut dyn FnMut(u32, &[usize]) -> usize) -> Result<(), E>,
) -> Result<(), E> {
    let mut prefix: Vec<usize> = Vec::new();
    loop {
        let mut counts: Vec<usize> = Vec::new();
        step(&mut |_, enabled| {
            let d = counts.len();
            counts.push(enabled.len());
            enabled[prefix.get(d).copied().unwrap_or(0)]
        })?;
        let mut full: Vec<usize> = (0..counts.len()).map(|d| prefix.get(d).copied().unwrap_or(0)).collect();
        loop {
            match full.pop() {
                None => return Ok(()),
                Some(last) if last + 1 < counts[full.len()] => {
                    full.push(last + 1);
                    break;
                }
                Some(_) => {}
            }
        }
        prefix = full;
    }
}

enum Stop {
    Violation { node: Option<u32>, inputs: Vec<Message>, fired: Vec<Option<usize>>, tick: usize },
    Error(String),
}

pub fn bmc_explicit_with(program: &Program, formula: &TemporalFormula, bound: usize, cap: usize) -> ExplicitOutcome {
    let nconj = formula.conjuncts.len();
    let mut seen = vec![false; nconj];
    let fail = |m: String, configurations: usize, seen: Vec<bool>| ExplicitOutcome {
        verdict: Verdict::EngineError(m),
        configurations,
        antecedent_seen: seen,
    };
    if nconj > 64 {
        return fail("more than 64 conjuncts".into(), 0, seen);
    }
    let universe = match input_universe(program) {
        Ok(u) => u,
        Err(m) => return fail(m, 0, seen),
    };
    let mut keys: Vec<Key> = vec![(init_state(program), 0)];
    let mut nodes = vec![Node {
        parent: None,
        inputs: Vec::new(),
        fired: Vec::new(),
    }];
    let mut index: HashMap<Key, u32> = HashMap::from([(keys[0].clone(), 0)]);
    let mut frontier: Vec<u32> = vec![0];
    let mut stop = None;
    'search: for tick in 0..bound {
        let mut next_frontier = Vec::new();
        for &id in &frontier {
            let (st, pending) = keys[id as usize].clone();
            let states = st.controls();
            let vars = st.vars();
            let mut idx = vec![0usize; universe.len()];
            loop {
                let inputs: Vec<Message> = idx.iter().zip(&universe).map(|(i, u)| u[*i].clone()).collect();
                let r = for_each_choice(|choose| {
                    let step = step_system_with(program, &st, &inputs, tick, choose).map_err(|e| Stop::Error(e.to_string()))?;
                    let view = TickView {
                        inputs: &inputs,
                        outputs: &step.outputs,
                        states: &states,
                        vars: &vars,
                    };
                    let m = monitor(formula, &program.funcs, &view, pending)
                        .map_err(|e| Stop::Error(format!("tick {tick}: evaluating the formula: {e}")))?;
                    for (c, s) in seen.iter_mut().enumerate() {
                        *s |= m.antecedents & (1 << c) != 0;
                    }
                    if m.violated {
                        return Err(Stop::Violation {
                            node: Some(id),
                            inputs: inputs.clone(),
                            fired: step.fired,
                            tick,
                        });
                    }
                    let key = (step.state, m.pending);
                    if !index.contains_key(&key) {
                        if keys.len() >= cap {
                            return Err(Stop::Error(format!("state space exceeds {cap} configurations")));
                        }
                        let nid = keys.len() as u32;
                        index.insert(key.clone(), nid);
                        keys.push(key);
                        nodes.push(Node {
                            parent: Some(id),
                            inputs: inputs.clone(),
                            fired: step.fired,
                        });
                        next_frontier.push(nid);
                    }
                    Ok(())
                });
                if let Err(s) = r {
                    stop = Some(s);
                    break 'search;
                }
                // odometer over the input universe
                let mut d = 0;
                loop {
                    if d == idx.len() {
                        break;
                    }
                    idx[d] += 1;
                    if idx[d] < universe[d].len() {
                        break;
                    }
                    idx[d] = 0;
                    d += 1;
                }
                if d == idx.len() {
                    break;
                }
            }
        }
        frontier = next_frontier;
    }
    let configurations = keys.len();
    let verdict = match stop {
        None => Verdict::HoldsUpTo(bound),
        Some(Stop::Error(m)) => Verdict::EngineError(m),
        Some(Stop::Violation { node, inputs, fired, tick }) => {
            let mut rows = vec![(inputs, fired)];
            let mut cur = node;
            while let Some(n) = cur {
                let node = &nodes[n as usize];
                if node.parent.is_some() {
                    rows.push((node.inputs.clone(), node.fired.clone()));
                }
                cur = node.parent;
            }
            rows.reverse();
            let (inputs, choices): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
            let stimulus = Stimulus { rows: inputs };
            match replay(program, formula, &stimulus, ChoicePolicy::Scripted(choices.clone())) {
                Ok(r) if r.violation == Some(tick) => Verdict::Counterexample(Box::new(Counterexample {
                    stimulus,
                    choices,
                    trace: r.trace,
                    tick,
                })),
                Ok(r) => Verdict::EngineError(format!(
                    "counterexample at tick {tick} does not replay (replay violation: {:?})",
                    r.violation
                )),
                Err(e) => Verdict::EngineError(e.to_string()),
            }
        }
    };
    ExplicitOutcome {
        verdict,
        configurations,
        antecedent_seen: seen,
    }
}
