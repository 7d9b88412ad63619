//! Reference simulator for the time-synchronous semantics.
//!
//! Every tick the atomic instances are stepped in the network's schedule
//! order. A strongly causal instance emits the outputs it computed in the
//! previous tick (initially the port initial values); a weakly causal one
//! emits what it computes now.

mod random;

pub use random::{random_stimulus, random_value};

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::model::ast::Causality;
use crate::model::eval::{check_store, eval_expr, match_pattern, EvalError, Frame};
use crate::model::ir::{Automaton, Component, Effect, Func, InstId, Program, Source};
use crate::model::value::{Message, Value};
use crate::syntax::{render_row, Stimulus};

/// Configuration of one atomic instance.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AtomicState {
    pub control: u32,
    pub vars: Vec<Value>,
    /// Outputs to emit next tick; strongly causal instances only.
    pub buffer: Option<Vec<Message>>,
}

/// One [`AtomicState`] per flattened instance, indexed by [`InstId`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SystemState {
    pub instances: Vec<AtomicState>,
}

impl SystemState {
    pub fn controls(&self) -> Vec<u32> {
        self.instances.iter().map(|s| s.control).collect()
    }

    pub fn vars(&self) -> Vec<Vec<Value>> {
        self.instances.iter().map(|s| s.vars.clone()).collect()
    }
}

/// How an instance picks among several enabled transitions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ChoicePolicy {
    /// The enabled transition declared first.
    First,
    /// Uniform choice driven by a Xoshiro256++ generator seeded from the
    /// given value with SplitMix64.
    UniformRandom(u64),
    /// Forced choices `[tick][instance]`, as recorded in a counterexample.
    /// A missing or disabled entry falls back to the first enabled
    /// transition.
    Scripted(Vec<Vec<Option<usize>>>),
}

/// Running state of a [`ChoicePolicy`].
pub struct Chooser {
    policy: ChoicePolicy,
    rng: Option<Xoshiro256PlusPlus>,
    tick: usize,
}

impl Chooser {
    pub fn new(policy: ChoicePolicy) -> Chooser {
        let rng = match policy {
            ChoicePolicy::UniformRandom(seed) => Some(Xoshiro256PlusPlus::seed_from_u64(seed)),
            _ => None,
        };
        Chooser { policy, rng, tick: 0 }
    }

    /// Pick one of `enabled` (transition indices in declaration order,
    /// never empty) for instance `inst`.
    pub fn choose(&mut self, inst: InstId, enabled: &[usize]) -> usize {
        match &self.policy {
            ChoicePolicy::First => enabled[0],
            ChoicePolicy::UniformRandom(_) => {
                let rng = self.rng.as_mut().expect("seeded");
                enabled[rng.random_range(0..enabled.len())]
            }
            ChoicePolicy::Scripted(script) => script
                .get(self.tick)
                .and_then(|row| row.get(inst as usize).copied().flatten())
                .filter(|t| enabled.contains(t))
                .unwrap_or(enabled[0]),
        }
    }

    /// Move on to the next tick of a scripted policy.
    pub fn advance(&mut self) {
        self.tick += 1;
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("tick {tick}: {path}: transition at line {line}: {error}")]
    Eval {
        tick: usize,
        path: String,
        line: u32,
        error: EvalError,
    },
    #[error("tick {tick}: {path} read the output of {producer} before it was computed")]
    Schedule {
        tick: usize,
        path: String,
        producer: String,
    },
    #[error("stimulus has {available} ticks, {requested} requested")]
    StimulusTooShort { available: usize, requested: usize },
}

/// Root inputs and outputs of every simulated tick.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
    /// Set when the run stopped early; `rows` holds the completed ticks.
    pub error: Option<SimError>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceRow {
    pub inputs: Vec<Message>,
    pub outputs: Vec<Message>,
}

impl Trace {
    /// Trace file text: per tick the inputs, then the outputs, each in
    /// declaration order. A run stopped by an evaluation error ends with
    /// `<tick>;error=<kind>`.
    pub fn render(&self, program: &Program) -> String {
        let root = program.root();
        let mut out = String::new();
        for (t, row) in self.rows.iter().enumerate() {
            let cells = root.inputs.iter().zip(&row.inputs).chain(root.outputs.iter().zip(&row.outputs));
            out.push_str(&render_row(t, &program.types, cells));
            out.push('\n');
        }
        if let Some(SimError::Eval { tick, error, .. }) = &self.error {
            out.push_str(&format!("{tick};error={}\n", error.kind()));
        }
        out
    }
}

fn atomic_init(comp: &Component) -> AtomicState {
    let a = comp.automaton().expect("atomic component");
    AtomicState {
        control: a.initial,
        vars: a.vars.iter().map(|v| v.init.clone()).collect(),
        buffer: (comp.causality == Causality::Strong)
            .then(|| comp.outputs.iter().map(|p| Message::Present(p.init.clone())).collect()),
    }
}

pub fn init_state(program: &Program) -> SystemState {
    SystemState {
        instances: (0..program.network.instances.len() as InstId)
            .map(|i| atomic_init(program.component_of(i)))
            .collect(),
    }
}

/// An enabled transition and the frame its guard was evaluated in
/// (state variables plus pattern bindings).
pub struct Enabled {
    pub transition: usize,
    pub frame: Frame,
}

/// Failure while stepping one automaton: the transition line and cause.
pub type StepError = (u32, EvalError);

/// Every transition whose source is the current control state, whose
/// patterns match `inputs` and whose guard holds, in declaration order.
pub fn enabled_transitions(
    funcs: &[Func],
    a: &Automaton,
    st: &AtomicState,
    inputs: &[Message],
) -> Result<Vec<Enabled>, StepError> {
    let mut out = Vec::new();
    'next: for (ti, t) in a.transitions.iter().enumerate() {
        if t.source != st.control {
            continue;
        }
        let mut frame = Frame::new(a.slots.len());
        for (i, v) in st.vars.iter().enumerate() {
            frame.set(i as u32, v.clone());
        }
        for (p, m) in t.patterns.iter().zip(inputs) {
            match match_pattern(p, m) {
                Some(binding) => {
                    for (s, v) in binding {
                        frame.set(s, v);
                    }
                }
                None => continue 'next,
            }
        }
        if let Some(g) = &t.guard {
            match eval_expr(&mut frame, funcs, g) {
                Ok(Value::Bool(true)) => {}
                Ok(_) => continue,
                Err(e) => return Err((t.line, e)),
            }
        }
        out.push(Enabled { transition: ti, frame });
    }
    Ok(out)
}

/// Fire transition `e` of component `comp`: the computed outputs and the
/// next control state and variables. The buffer is left untouched.
pub fn fire(funcs: &[Func], comp: &Component, st: &AtomicState, e: Enabled) -> Result<(Vec<Message>, AtomicState), StepError> {
    let a = comp.automaton().expect("atomic component");
    let t = &a.transitions[e.transition];
    let mut frame = e.frame;
    let mut outputs = vec![Message::Absent; comp.outputs.len()];
    let mut next = st.clone();
    next.control = t.target;
    for eff in &t.effects {
        match eff {
            Effect::Emit { port, value } => {
                if let Some(x) = value {
                    let v = eval_expr(&mut frame, funcs, x).map_err(|err| (t.line, err))?;
                    let v = check_store(v, comp.outputs[*port as usize].ty).map_err(|err| (t.line, err))?;
                    outputs[*port as usize] = Message::Present(v);
                }
            }
            Effect::Assign { var, value } => {
                let v = eval_expr(&mut frame, funcs, value).map_err(|err| (t.line, err))?;
                next.vars[*var as usize] = check_store(v, a.vars[*var as usize].ty).map_err(|err| (t.line, err))?;
            }
        }
    }
    Ok((outputs, next))
}

/// One tick of one atomic instance. Returns the emitted outputs, the next
/// state and the fired transition (`None` when the instance stutters).
pub fn step_atomic(
    funcs: &[Func],
    comp: &Component,
    st: &AtomicState,
    inputs: &[Message],
    choose: impl FnOnce(&[usize]) -> usize,
) -> Result<(Vec<Message>, AtomicState, Option<usize>), StepError> {
    let a = comp.automaton().expect("atomic component");
    let mut enabled = enabled_transitions(funcs, a, st, inputs)?;
    let (computed, mut next, fired) = if enabled.is_empty() {
        (vec![Message::Absent; comp.outputs.len()], st.clone(), None)
    } else {
        let ids: Vec<usize> = enabled.iter().map(|e| e.transition).collect();
        let pick = choose(&ids);
        let k = ids.iter().position(|t| *t == pick).expect("chosen transition is enabled");
        let e = enabled.swap_remove(k);
        let (out, next) = fire(funcs, comp, st, e)?;
        (out, next, Some(pick))
    };
    let emitted = match next.buffer.as_mut() {
        Some(buf) => std::mem::replace(buf, computed),
        None => computed,
    };
    Ok((emitted, next, fired))
}

/// Result of [`step_system`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub outputs: Vec<Message>,
    pub state: SystemState,
    /// Fired transition per instance.
    pub fired: Vec<Option<usize>>,
}

/// Message arriving at an input with the given source, given what has
/// been emitted so far this tick.
pub fn read_source(src: Source, inputs: &[Message], emitted: &[Option<Vec<Message>>]) -> Result<Message, InstId> {
    match src {
        Source::RootInput(i) => Ok(inputs[i as usize].clone()),
        Source::Unconnected => Ok(Message::Absent),
        Source::Output { inst, port } => match &emitted[inst as usize] {
            Some(out) => Ok(out[port as usize].clone()),
            None => Err(inst),
        },
    }
}

/// One tick of the whole network, choosing with `choose(inst, enabled)`.
pub fn step_system_with(
    program: &Program,
    st: &SystemState,
    inputs: &[Message],
    tick: usize,
    choose: &mut dyn FnMut(InstId, &[usize]) -> usize,
) -> Result<Step, SimError> {
    let net = &program.network;
    let n = net.instances.len();
    // Strongly causal instances emit their buffer, known from the start.
    let mut emitted: Vec<Option<Vec<Message>>> = st.instances.iter().map(|s| s.buffer.clone()).collect();
    let mut next = st.clone();
    let mut fired = vec![None; n];
    for &i in &net.schedule {
        let inst = &net.instances[i as usize];
        let comp = &program.components[inst.comp as usize];
        let mut ins = Vec::with_capacity(inst.inputs.len());
        for src in &inst.inputs {
            let m = read_source(*src, inputs, &emitted).map_err(|producer| SimError::Schedule {
                tick,
                path: inst.path.clone(),
                producer: net.instances[producer as usize].path.clone(),
            })?;
            ins.push(m);
        }
        let (out, s, f) = step_atomic(&program.funcs, comp, &st.instances[i as usize], &ins, |en| choose(i, en))
            .map_err(|(line, error)| SimError::Eval {
                tick,
                path: inst.path.clone(),
                line,
                error,
            })?;
        if s.buffer.is_none() {
            emitted[i as usize] = Some(out);
        }
        next.instances[i as usize] = s;
        fired[i as usize] = f;
    }
    let outputs = net
        .root_outputs
        .iter()
        .map(|src| read_source(*src, inputs, &emitted).expect("all instances stepped"))
        .collect();
    Ok(Step {
        outputs,
        state: next,
        fired,
    })
}

pub fn step_system(
    program: &Program,
    st: &SystemState,
    inputs: &[Message],
    tick: usize,
    chooser: &mut Chooser,
) -> Result<Step, SimError> {
    step_system_with(program, st, inputs, tick, &mut |i, en| chooser.choose(i, en))
}

/// Simulate the first `ticks` rows of `stimulus`.
pub fn run(program: &Program, stimulus: &Stimulus, policy: ChoicePolicy, ticks: usize) -> Trace {
    let mut trace = Trace::default();
    if ticks > stimulus.len() {
        trace.error = Some(SimError::StimulusTooShort {
            available: stimulus.len(),
            requested: ticks,
        });
        return trace;
    }
    let mut chooser = Chooser::new(policy);
    let mut st = init_state(program);
    for (t, inputs) in stimulus.rows.iter().take(ticks).enumerate() {
        match step_system(program, &st, inputs, t, &mut chooser) {
            Ok(step) => {
                trace.rows.push(TraceRow {
                    inputs: inputs.clone(),
                    outputs: step.outputs,
                });
                st = step.state;
            }
            Err(e) => {
                trace.error = Some(e);
                break;
            }
        }
        chooser.advance();
    }
    trace
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::check::load_model;
    use crate::syntax::parse_stimulus;

    const UNIT_DELAY: &str = "model D { component Delay { in x: Int[0..9] init 0 out y: Int[0..9] init 0 causality strong
        automaton { states S init transition S -> S when x?v then y = v } } }";

    fn int(v: i64) -> Message {
        Message::Present(Value::Int(v))
    }

    fn trace_of(src: &str, stim: &str) -> (Program, Trace) {
        let p = load_model(src).unwrap();
        let s = parse_stimulus(stim, &p).unwrap();
        let t = run(&p, &s, ChoicePolicy::First, s.len());
        (p, t)
    }

    #[test]
    fn unit_delay_shifts_by_one_tick() {
        let (_, t) = trace_of(UNIT_DELAY, "0;x=1\n1;x=2\n2;x=3\n");
        let outs: Vec<_> = t.rows.iter().map(|r| r.outputs[0].clone()).collect();
        assert_eq!(outs, vec![int(0), int(1), int(2)]);
    }

    #[test]
    fn zero_ticks_is_empty() {
        let (p, _) = trace_of(UNIT_DELAY, "0;x=1\n");
        let t = run(&p, &Stimulus::default(), ChoicePolicy::First, 0);
        assert!(t.rows.is_empty() && t.error.is_none());
    }

    #[test]
    fn stutter_keeps_state_and_emits_absent() {
        let src = "model S { component C { in x: Int[0..9] init 0 out y: Int[0..9] init 0 causality weak
            automaton { states A init, B var n: Int[0..9] init 3
              transition A -> B when x?v then y = v, n := v } } }";
        let p = load_model(src).unwrap();
        let st = init_state(&p);
        let step = step_system(&p, &st, &[Message::Absent], 0, &mut Chooser::new(ChoicePolicy::First)).unwrap();
        assert_eq!(step.state, st);
        assert_eq!(step.outputs, vec![Message::Absent]);
        assert_eq!(step.fired, vec![None]);
    }

    #[test]
    fn enabled_transitions_bind_and_filter() {
        let src = "model E { component C { in speed: Int[0..20] init 0 out y: Bool init false causality weak
            automaton { states Off init, On
              transition Off -> On when speed?v with v > 10 then y = true
              transition Off -> Off when speed? then y = false } } }";
        let p = load_model(src).unwrap();
        let a = p.root().automaton().unwrap();
        let st = init_state(&p).instances[0].clone();
        let en = enabled_transitions(&p.funcs, a, &st, &[int(12)]).unwrap();
        assert_eq!(en.iter().map(|e| e.transition).collect::<Vec<_>>(), vec![0, 1]);
        assert_eq!(en[0].frame.get(0), Some(&Value::Int(12)));
        let en = enabled_transitions(&p.funcs, a, &st, &[int(5)]).unwrap();
        assert_eq!(en.iter().map(|e| e.transition).collect::<Vec<_>>(), vec![1]);
        // First picks the declaration-first transition.
        let (out, next, fired) = step_atomic(&p.funcs, p.root(), &st, &[int(12)], |e| e[0]).unwrap();
        assert_eq!((out, next.control, fired), (vec![Message::Present(Value::Bool(true))], 1, Some(0)));
    }

    #[test]
    fn postconditions_read_the_pre_state() {
        let src = "model P { component C { in go: Bool init false out y: Int[0..9] init 0 causality weak
            automaton { states S init var a: Int[0..9] init 1 var b: Int[0..9] init 2
              transition S -> S when go? then a := b, b := a, y = a } } }";
        let (_, t) = trace_of(src, "0;go=true\n1;go=true\n");
        assert_eq!(t.rows[0].outputs, vec![int(1)]);
        assert_eq!(t.rows[1].outputs, vec![int(2)]);
    }

    #[test]
    fn weak_then_strong_pipeline_composes_by_hand() {
        let src = "model W { component Inc { in x: Int[0..9] init 0 out y: Int[0..10] init 0 causality weak
              table { row when x?v then y = v + 1 row when x = - then y = - } }
            component Hold { in x: Int[0..10] init 0 out y: Int[0..10] init 7 causality strong
              automaton { states S init transition S -> S when x?v then y = v } }
            component Top { in x: Int[0..9] init 0 out y: Int[0..10] init 0 causality strong
              sub a: Inc sub b: Hold delegate x -> a.x channel a.y -> b.x delegate b.y -> y } }";
        let stim = "0;x=4\n1;x=-\n2;x=8\n";
        let (p, t) = trace_of(src, stim);
        // Composition by hand: Inc maps 4, -, 8 to 5, -, 9; Hold emits its
        // initial 7 first, then the previous input, stuttering on absence.
        let inc = |m: &Message| match m {
            Message::Present(Value::Int(v)) => int(v + 1),
            _ => Message::Absent,
        };
        let s = parse_stimulus(stim, &p).unwrap();
        let mut expected = vec![int(7)];
        for row in &s.rows[..2] {
            expected.push(inc(&row[0]));
        }
        let got: Vec<_> = t.rows.iter().map(|r| r.outputs[0].clone()).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn fan_out_delivers_the_same_message() {
        let src = "model F { component Src { in x: Int[0..9] init 0 out y: Int[0..9] init 0 causality weak
              table { row when x?v then y = v } }
            component Sink { in x: Int[0..9] init 0 out y: Int[0..9] init 0 causality weak
              table { row when x?v then y = v } }
            component Top { in x: Int[0..9] init 0 out p: Int[0..9] init 0 out q: Int[0..9] init 0 causality weak
              sub s: Src sub a: Sink sub b: Sink delegate x -> s.x channel s.y -> a.x channel s.y -> b.x
              delegate a.y -> p delegate b.y -> q } }";
        let (_, t) = trace_of(src, "0;x=3\n");
        assert_eq!(t.rows[0].outputs, vec![int(3), int(3)]);
    }

    #[test]
    fn cruise_accelerates_one_tick_after_the_button() {
        let p = load_model(include_str!("../../../../corpus/cruise.syn")).unwrap();
        let s = parse_stimulus(include_str!("../../../../corpus/cruise.stim"), &p).unwrap();
        let t = run(&p, &s, ChoicePolicy::First, s.len());
        assert!(t.error.is_none());
        let throttle = p.root().output_index("throttle").unwrap() as usize;
        assert!(t.rows[4].outputs[throttle].is_present());
        assert!(!t.rows[3].outputs[throttle].is_present());
        // low battery at tick 5 switches the controller off
        assert!(!t.rows[6].outputs[throttle].is_present());
    }

    #[test]
    fn same_seed_same_trace() {
        let src = "model R { component C { in x: Bool init false out y: Int[0..3] init 0 causality weak
            automaton { states S init
              transition S -> S when x? then y = 1
              transition S -> S when x? then y = 2
              transition S -> S when x? then y = 3 } } }";
        let p = load_model(src).unwrap();
        let stim: String = (0..50).map(|t| format!("{t};x=true\n")).collect();
        let s = parse_stimulus(&stim, &p).unwrap();
        let a = run(&p, &s, ChoicePolicy::UniformRandom(7), 50);
        let b = run(&p, &s, ChoicePolicy::UniformRandom(7), 50);
        assert_eq!(a.render(&p), b.render(&p));
        let distinct: std::collections::HashSet<_> = a.rows.iter().map(|r| r.outputs[0].clone()).collect();
        assert_eq!(distinct.len(), 3);
    }

    #[test]
    fn range_violation_stops_the_run() {
        let src = "model V { component C { in x: Int[0..9] init 0 out y: Int[0..3] init 0 causality weak
            automaton { states S init transition S -> S when x?v then y = v } } }";
        let (p, t) = trace_of(src, "0;x=2\n1;x=5\n2;x=1\n");
        assert_eq!(t.rows.len(), 1);
        assert!(matches!(t.error, Some(SimError::Eval { tick: 1, .. })));
        assert_eq!(t.render(&p), "0;x=2;y=2\n1;error=RangeViolation\n");
    }
}
