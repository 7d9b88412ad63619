//! SMT-LIB bounded model checking.
//!
//! The unrolling declares one copy of every state, port and choice
//! variable per tick. Finite types become datatypes, integers are `Int`
//! with range assertions, and every message is an option-style datatype
//! `Msg.<T>` with constructors `absent.<T>` and `present.<T>`. Each
//! instance's tick is a disjunction over its transitions plus the stutter
//! case, selected by a choice variable (`-1` for stutter). After tick `k`
//! is asserted, the script checks whether the formula can fail at `k`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::Command;

use crate::check::{AtomVar, Prop, RootPort};
use crate::model::ast::{BinOp, Causality, UnOp};
use crate::model::ir::{Automaton, Component, Effect, ExprKind, InstId, Pattern, Program, Source, TExpr};
use crate::model::types::{NominalKind, Ty};
use crate::model::value::{Message, Value};
use crate::sim::ChoicePolicy;
use crate::syntax::Stimulus;

use super::formula::{replay, TemporalFormula};
use super::sexpr::{parse_all, Sexpr};
use super::{Counterexample, Verdict};

/// Environment variable holding the solver command line.
pub const SOLVER_ENV: &str = "SYNCHRONY_SOLVER";

/// An external solver invoked as `<command...> <script-path>`; it prints
/// one `sat`/`unsat` line per `check-sat`, and a model after `get-model`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solver {
    pub command: Vec<String>,
}

impl Solver {
    pub fn new(command: &str) -> Solver {
        Solver {
            command: command.split_whitespace().map(str::to_string).collect(),
        }
    }

    /// The command in `SYNCHRONY_SOLVER`, else `z3` when it is on the path.
    pub fn from_env() -> Option<Solver> {
        if let Ok(cmd) = std::env::var(SOLVER_ENV) {
            if !cmd.trim().is_empty() {
                return Some(Solver::new(&cmd));
            }
        }
        let path = std::env::var_os("PATH")?;
        std::env::split_paths(&path)
            .map(|d| d.join("z3"))
            .find(|p| p.is_file())
            .map(|p| Solver {
                command: vec![p.to_string_lossy().into_owned()],
            })
    }

    pub fn run(&self, script: &str) -> Result<String, String> {
        let mut file = tempfile::Builder::new()
            .suffix(".smt2")
            .tempfile()
            .map_err(|e| format!("creating a script file: {e}"))?;
        file.write_all(script.as_bytes())
            .map_err(|e| format!("writing the script file: {e}"))?;
        let path: PathBuf = file.path().to_path_buf();
        let (prog, args) = self.command.split_first().ok_or("empty solver command")?;
        let out = Command::new(prog)
            .args(args)
            .arg(&path)
            .output()
            .map_err(|e| format!("SolverUnavailable: {prog}: {e}"))?;
        let stdout = String::from_utf8_lossy(&out.stdout).into_owned();
        if !out.status.success() && stdout.trim().is_empty() {
            return Err(format!(
                "solver failed ({}): {}",
                out.status,
                String::from_utf8_lossy(&out.stderr).trim()
            ));
        }
        Ok(stdout)
    }
}

/// Solver configuration of the SMT engine.
#[derive(Clone, Debug, Default)]
pub struct SmtEngine {
    pub solver: Option<Solver>,
    /// Test double: leave out the last unrolling.
    #[doc(hidden)]
    pub drop_last_unrolling: bool,
}

impl SmtEngine {
    pub fn from_env() -> SmtEngine {
        SmtEngine {
            solver: Solver::from_env(),
            drop_last_unrolling: false,
        }
    }
}

/// An unrolled encoding, kept in pieces so that witness queries can reuse
/// a prefix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmtScript {
    pub header: String,
    /// Declarations and constraints of tick `k`.
    pub ticks: Vec<String>,
    /// Term stating that the formula fails at tick `k`.
    pub checks: Vec<String>,
}

impl SmtScript {
    /// The full script: every unrolling followed by its satisfiability
    /// check.
    pub fn render(&self) -> String {
        let mut s = self.header.clone();
        for (k, (tick, check)) in self.ticks.iter().zip(&self.checks).enumerate() {
            let _ = writeln!(s, "; ---- tick {k}");
            s.push_str(tick);
            let _ = writeln!(s, "(push 1)\n(assert {check})\n(check-sat)\n(pop 1)");
        }
        s
    }

    /// Ticks `0..=k` and the failure at `k`, with a model request.
    pub fn witness(&self, k: usize) -> String {
        let mut s = self.header.clone();
        for tick in &self.ticks[..=k] {
            s.push_str(tick);
        }
        let _ = writeln!(s, "(assert {})\n(check-sat)\n(get-model)", self.checks[k]);
        s
    }
}

fn sort_key(p: &Program, ty: Ty) -> String {
    match ty {
        Ty::Bool => "Bool".into(),
        Ty::Int { .. } => "Int".into(),
        Ty::Named(id) => p.types.get(id).name.clone(),
    }
}

fn sort(p: &Program, ty: Ty) -> String {
    match ty {
        Ty::Named(id) => format!("T.{}", p.types.get(id).name),
        _ => sort_key(p, ty),
    }
}

fn int_lit(v: i64) -> String {
    if v < 0 {
        format!("(- {})", -(v as i128))
    } else {
        v.to_string()
    }
}

fn ctor_name(p: &Program, ty: u32, tag: u32) -> String {
    let t = p.types.get(ty);
    match &t.kind {
        NominalKind::Record(_) => format!("mk.{}", t.name),
        _ => format!("{}.{}", t.name, t.ctor_name(tag)),
    }
}

fn value_term(p: &Program, v: &Value) -> String {
    match v {
        Value::Bool(b) => b.to_string(),
        Value::Int(i) => int_lit(*i),
        Value::Ctor { ty, tag, args } if args.is_empty() => ctor_name(p, *ty, *tag),
        Value::Ctor { ty, tag, args } => {
            let parts: Vec<String> = args.iter().map(|a| value_term(p, a)).collect();
            format!("({} {})", ctor_name(p, *ty, *tag), parts.join(" "))
        }
        Value::Record { ty, fields } => {
            let parts: Vec<String> = fields.iter().map(|a| value_term(p, a)).collect();
            format!("({} {})", ctor_name(p, *ty, 0), parts.join(" "))
        }
    }
}

fn absent(p: &Program, ty: Ty) -> String {
    format!("absent.{}", sort_key(p, ty))
}

fn present(p: &Program, ty: Ty, term: &str) -> String {
    format!("(present.{} {term})", sort_key(p, ty))
}

fn val(p: &Program, ty: Ty, term: &str) -> String {
    format!("(val.{} {term})", sort_key(p, ty))
}

fn is_present(p: &Program, ty: Ty, term: &str) -> String {
    format!("((_ is present.{}) {term})", sort_key(p, ty))
}

fn conj(parts: Vec<String>) -> String {
    match parts.len() {
        0 => "true".into(),
        1 => parts.into_iter().next().unwrap(),
        _ => format!("(and {})", parts.join(" ")),
    }
}

fn disj(parts: Vec<String>) -> String {
    match parts.len() {
        0 => "false".into(),
        1 => parts.into_iter().next().unwrap(),
        _ => format!("(or {})", parts.join(" ")),
    }
}

/// Range constraint on a value of type `ty`, `None` when trivially true.
fn well_formed(p: &Program, term: &str, ty: Ty) -> Option<String> {
    match ty {
        Ty::Bool => None,
        Ty::Int { lo, hi } => Some(format!("(and (<= {} {term}) (<= {term} {}))", int_lit(lo), int_lit(hi))),
        Ty::Named(id) => {
            let t = p.types.get(id);
            match &t.kind {
                NominalKind::Enum(_) => None,
                NominalKind::Record(fs) => {
                    let parts: Vec<String> = fs
                        .iter()
                        .filter_map(|f| well_formed(p, &format!("({}.{} {term})", t.name, f.name), f.ty))
                        .collect();
                    (!parts.is_empty()).then(|| conj(parts))
                }
                NominalKind::Variant(cs) => {
                    let parts: Vec<String> = cs
                        .iter()
                        .filter_map(|c| {
                            let fields: Vec<String> = c
                                .fields
                                .iter()
                                .enumerate()
                                .filter_map(|(k, fty)| well_formed(p, &format!("({}.{}.{k} {term})", t.name, c.name), *fty))
                                .collect();
                            (!fields.is_empty()).then(|| format!("(=> ((_ is {}.{}) {term}) {})", t.name, c.name, conj(fields)))
                        })
                        .collect();
                    (!parts.is_empty()).then(|| conj(parts))
                }
            }
        }
    }
}

fn msg_well_formed(p: &Program, term: &str, ty: Ty) -> Option<String> {
    well_formed(p, &val(p, ty, term), ty).map(|w| format!("(=> {} {w})", is_present(p, ty, term)))
}

struct Enc<'p> {
    p: &'p Program,
    fresh: usize,
}

impl Enc<'_> {
    fn expr(&mut self, e: &TExpr, env: &mut Vec<Option<String>>) -> String {
        let p = self.p;
        match &e.kind {
            ExprKind::Lit(v) => value_term(p, v),
            ExprKind::Var(s) => env
                .get(*s as usize)
                .cloned()
                .flatten()
                .unwrap_or_else(|| panic!("slot {s} unbound in the encoding")),
            ExprKind::Call(f, args) => {
                let parts: Vec<String> = args.iter().map(|a| self.expr(a, env)).collect();
                let name = &p.funcs[*f as usize].name;
                if parts.is_empty() {
                    format!("f.{name}")
                } else {
                    format!("(f.{name} {})", parts.join(" "))
                }
            }
            ExprKind::Ctor { ty, tag, args } => {
                if args.is_empty() {
                    ctor_name(p, *ty, *tag)
                } else {
                    let parts: Vec<String> = args.iter().map(|a| self.expr(a, env)).collect();
                    format!("({} {})", ctor_name(p, *ty, *tag), parts.join(" "))
                }
            }
            ExprKind::Record { ty, fields } => {
                let parts: Vec<String> = fields.iter().map(|a| self.expr(a, env)).collect();
                format!("({} {})", ctor_name(p, *ty, 0), parts.join(" "))
            }
            ExprKind::Field(r, idx) => {
                let Ty::Named(id) = r.ty else { unreachable!("field of non-record") };
                let t = p.types.get(id);
                let NominalKind::Record(fs) = &t.kind else { unreachable!("field of non-record") };
                format!("({}.{} {})", t.name, fs[*idx as usize].name, self.expr(r, env))
            }
            ExprKind::Narrow(inner) => self.expr(inner, env),
            ExprKind::Match { scrut, arms } => {
                let Ty::Named(id) = scrut.ty else { unreachable!("match on non-nominal") };
                let t = p.types.get(id);
                let s = self.expr(scrut, env);
                self.fresh += 1;
                let m = format!("m!{}", self.fresh);
                let mut bodies = Vec::new();
                for arm in arms {
                    if let Some(tag) = arm.tag {
                        for (k, b) in arm.binds.iter().enumerate() {
                            if let Some(slot) = b {
                                let slot = *slot as usize;
                                if env.len() <= slot {
                                    env.resize(slot + 1, None);
                                }
                                env[slot] = Some(format!("({}.{}.{k} {m})", t.name, t.ctor_name(tag)));
                            }
                        }
                    }
                    let cond = arm.tag.map(|tag| format!("((_ is {}.{}) {m})", t.name, t.ctor_name(tag)));
                    bodies.push((cond, self.expr(&arm.body, env)));
                }
                // Exhaustive: the last arm needs no test.
                let mut acc = bodies.pop().expect("match has arms").1;
                while let Some((cond, body)) = bodies.pop() {
                    acc = match cond {
                        Some(c) => format!("(ite {c} {body} {acc})"),
                        None => body,
                    };
                }
                format!("(let (({m} {s})) {acc})")
            }
            ExprKind::If(c, a, b) => {
                format!("(ite {} {} {})", self.expr(c, env), self.expr(a, env), self.expr(b, env))
            }
            ExprKind::Unary(UnOp::Not, a) => format!("(not {})", self.expr(a, env)),
            ExprKind::Unary(UnOp::Neg, a) => format!("(- {})", self.expr(a, env)),
            ExprKind::Binary(op, l, r) => {
                let (l, r) = (self.expr(l, env), self.expr(r, env));
                let f = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "tdiv",
                    BinOp::Mod => "tmod",
                    BinOp::Eq => "=",
                    BinOp::Ne => "distinct",
                    BinOp::Lt => "<",
                    BinOp::Le => "<=",
                    BinOp::Gt => ">",
                    BinOp::Ge => ">=",
                    BinOp::And => "and",
                    BinOp::Or => "or",
                };
                format!("({f} {l} {r})")
            }
        }
    }
}

fn header(p: &Program, enc: &mut Enc) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "; bounded model checking of `{}`", p.name);
    s.push_str("(set-logic ALL)\n");
    s.push_str("(define-fun tdiv ((a Int) (b Int)) Int (ite (= (>= a 0) (> b 0)) (div (abs a) (abs b)) (- (div (abs a) (abs b)))))\n");
    s.push_str("(define-fun tmod ((a Int) (b Int)) Int (- a (* b (tdiv a b))))\n");
    for (id, t) in p.types.types.iter().enumerate() {
        let ctors: Vec<String> = match &t.kind {
            NominalKind::Enum(names) => names.iter().map(|n| format!("({}.{n})", t.name)).collect(),
            NominalKind::Variant(cs) => cs
                .iter()
                .map(|c| {
                    let mut d = format!("({}.{}", t.name, c.name);
                    for (k, f) in c.fields.iter().enumerate() {
                        let _ = write!(d, " ({}.{}.{k} {})", t.name, c.name, sort(p, *f));
                    }
                    d.push(')');
                    d
                })
                .collect(),
            NominalKind::Record(fs) => {
                let mut d = format!("(mk.{}", t.name);
                for f in fs {
                    let _ = write!(d, " ({}.{} {})", t.name, f.name, sort(p, f.ty));
                }
                d.push(')');
                vec![d]
            }
        };
        let _ = writeln!(s, "(declare-datatypes (({} 0)) (({})))", sort(p, Ty::Named(id as u32)), ctors.join(" "));
    }
    let mut keys = vec![Ty::Bool, Ty::INT];
    keys.extend((0..p.types.types.len() as u32).map(Ty::Named));
    for ty in keys {
        let k = sort_key(p, ty);
        let _ = writeln!(
            s,
            "(declare-datatypes ((Msg.{k} 0)) (((absent.{k}) (present.{k} (val.{k} {})))))",
            sort(p, ty)
        );
    }
    for f in &p.funcs {
        let params: Vec<String> = f
            .params
            .iter()
            .enumerate()
            .map(|(i, (_, ty))| format!("(a{i} {})", sort(p, *ty)))
            .collect();
        let mut env: Vec<Option<String>> = (0..f.params.len()).map(|i| Some(format!("a{i}"))).collect();
        let body = enc.expr(&f.body, &mut env);
        let _ = writeln!(s, "(define-fun f.{} ({}) {} {body})", f.name, params.join(" "), sort(p, f.ret));
    }
    // Initial configuration.
    for (i, inst) in p.network.instances.iter().enumerate() {
        let comp = &p.components[inst.comp as usize];
        let a = comp.automaton().expect("atomic");
        let _ = writeln!(s, "(define-fun s{i}_t0 () Int {})", a.initial);
        for (x, v) in a.vars.iter().enumerate() {
            let _ = writeln!(s, "(define-fun v{i}_{x}_t0 () {} {})", sort(p, v.ty), value_term(p, &v.init));
        }
        if comp.causality == Causality::Strong {
            for (o, port) in comp.outputs.iter().enumerate() {
                let _ = writeln!(
                    s,
                    "(define-fun b{i}_{o}_t0 () Msg.{} {})",
                    sort_key(p, port.ty),
                    present(p, port.ty, &value_term(p, &port.init))
                );
            }
        }
    }
    s
}

/// The message an input with source `src` (and type `ty`) receives at `t`.
fn source_term(p: &Program, src: Source, ty: Ty, t: usize) -> String {
    match src {
        Source::RootInput(k) => format!("in{k}_t{t}"),
        Source::Unconnected => absent(p, ty),
        Source::Output { inst, port } => {
            if p.component_of(inst).causality == Causality::Strong {
                format!("b{inst}_{port}_t{t}")
            } else {
                format!("o{inst}_{port}_t{t}")
            }
        }
    }
}

fn pattern_cond(p: &Program, pat: &Pattern, ty: Ty, inp: &str) -> Option<String> {
    match pat {
        Pattern::DontCare => None,
        Pattern::Wildcard | Pattern::Bind(_) => Some(is_present(p, ty, inp)),
        Pattern::Absent => Some(format!("(not {})", is_present(p, ty, inp))),
        Pattern::Literal(v) => Some(format!("(= {inp} {})", present(p, ty, &value_term(p, v)))),
    }
}

fn instance_tick(p: &Program, enc: &mut Enc, i: InstId, t: usize, s: &mut String) {
    let inst = &p.network.instances[i as usize];
    let comp: &Component = &p.components[inst.comp as usize];
    let a: &Automaton = comp.automaton().expect("atomic");
    let strong = comp.causality == Causality::Strong;
    let _ = writeln!(s, "(declare-const ch{i}_t{t} Int)");
    let _ = writeln!(s, "(declare-const s{i}_t{} Int)", t + 1);
    for (x, v) in a.vars.iter().enumerate() {
        let _ = writeln!(s, "(declare-const v{i}_{x}_t{} {})", t + 1, sort(p, v.ty));
    }
    let computed: Vec<String> = (0..comp.outputs.len())
        .map(|o| if strong { format!("b{i}_{o}_t{}", t + 1) } else { format!("o{i}_{o}_t{t}") })
        .collect();
    for (o, port) in comp.outputs.iter().enumerate() {
        let _ = writeln!(s, "(declare-const {} Msg.{})", computed[o], sort_key(p, port.ty));
        if let Some(w) = msg_well_formed(p, &computed[o], port.ty) {
            let _ = writeln!(s, "(assert {w})");
        }
    }
    for (x, v) in a.vars.iter().enumerate() {
        if let Some(w) = well_formed(p, &format!("v{i}_{x}_t{}", t + 1), v.ty) {
            let _ = writeln!(s, "(assert {w})");
        }
    }
    let inputs: Vec<String> = inst
        .inputs
        .iter()
        .zip(&comp.inputs)
        .map(|(src, port)| source_term(p, *src, port.ty, t))
        .collect();
    let cur_vars: Vec<String> = (0..a.vars.len()).map(|x| format!("v{i}_{x}_t{t}")).collect();
    let mut cases = Vec::new();
    let mut enabled_names = Vec::new();
    for (j, tr) in a.transitions.iter().enumerate() {
        let mut env: Vec<Option<String>> = vec![None; a.slots.len()];
        for (x, v) in cur_vars.iter().enumerate() {
            env[x] = Some(v.clone());
        }
        let mut conds = vec![format!("(= s{i}_t{t} {})", tr.source)];
        for (k, pat) in tr.patterns.iter().enumerate() {
            let ty = comp.inputs[k].ty;
            if let Some(c) = pattern_cond(p, pat, ty, &inputs[k]) {
                conds.push(c);
            }
            if let Pattern::Bind(slot) = pat {
                env[*slot as usize] = Some(val(p, ty, &inputs[k]));
            }
        }
        if let Some(g) = &tr.guard {
            conds.push(enc.expr(g, &mut env));
        }
        let en = format!("en{i}_{j}_t{t}");
        let _ = writeln!(s, "(define-fun {en} () Bool {})", conj(conds));
        let mut effs = vec![format!("(= ch{i}_t{t} {j})"), en.clone(), format!("(= s{i}_t{} {})", t + 1, tr.target)];
        let mut out_set = vec![None; comp.outputs.len()];
        let mut var_set = vec![None; a.vars.len()];
        for eff in &tr.effects {
            match eff {
                Effect::Emit { port, value } => {
                    let ty = comp.outputs[*port as usize].ty;
                    out_set[*port as usize] = Some(match value {
                        Some(x) => present(p, ty, &enc.expr(x, &mut env)),
                        None => absent(p, ty),
                    });
                }
                Effect::Assign { var, value } => var_set[*var as usize] = Some(enc.expr(value, &mut env)),
            }
        }
        for (o, v) in out_set.into_iter().enumerate() {
            let v = v.unwrap_or_else(|| absent(p, comp.outputs[o].ty));
            effs.push(format!("(= {} {v})", computed[o]));
        }
        for (x, v) in var_set.into_iter().enumerate() {
            let v = v.unwrap_or_else(|| cur_vars[x].clone());
            effs.push(format!("(= v{i}_{x}_t{} {v})", t + 1));
        }
        cases.push(conj(effs));
        enabled_names.push(en);
    }
    let mut stutter = vec![format!("(= ch{i}_t{t} (- 1))")];
    stutter.extend(enabled_names.iter().map(|e| format!("(not {e})")));
    stutter.push(format!("(= s{i}_t{} s{i}_t{t})", t + 1));
    for (o, port) in comp.outputs.iter().enumerate() {
        stutter.push(format!("(= {} {})", computed[o], absent(p, port.ty)));
    }
    for x in 0..a.vars.len() {
        stutter.push(format!("(= v{i}_{x}_t{} v{i}_{x}_t{t})", t + 1));
    }
    cases.insert(0, conj(stutter));
    let _ = writeln!(s, "(assert {})", disj(cases));
}

fn port_term(p: &Program, port: RootPort, t: usize) -> (String, Ty) {
    let root = p.root();
    match port {
        RootPort::Input(k) => (format!("in{k}_t{t}"), root.inputs[k as usize].ty),
        RootPort::Output(k) => {
            let ty = root.outputs[k as usize].ty;
            (source_term(p, p.network.root_outputs[k as usize], ty, t), ty)
        }
    }
}

fn prop_term(p: &Program, enc: &mut Enc, f: &TemporalFormula, prop: &Prop, t: usize) -> String {
    match prop {
        Prop::Const(b) => b.to_string(),
        Prop::Present(port) => {
            let (term, ty) = port_term(p, *port, t);
            is_present(p, ty, &term)
        }
        Prop::InState { inst, state } => format!("(= s{inst}_t{t} {state})"),
        Prop::Atom(k) => {
            let atom = &f.atoms[*k];
            let mut env: Vec<Option<String>> = vec![None; atom.slots.len()];
            let mut conds = Vec::new();
            for (slot, var) in &atom.reads {
                env[*slot as usize] = Some(match var {
                    AtomVar::Port(port) => {
                        let (term, ty) = port_term(p, *port, t);
                        conds.push(is_present(p, ty, &term));
                        val(p, ty, &term)
                    }
                    AtomVar::StateVar { inst, var } => format!("v{inst}_{var}_t{t}"),
                });
            }
            conds.push(enc.expr(&atom.expr, &mut env));
            conj(conds)
        }
        Prop::Not(q) => format!("(not {})", prop_term(p, enc, f, q, t)),
        Prop::And(qs) => conj(qs.iter().map(|q| prop_term(p, enc, f, q, t)).collect()),
        Prop::Or(qs) => disj(qs.iter().map(|q| prop_term(p, enc, f, q, t)).collect()),
    }
}

/// Encode `formula` over `bound` ticks.
pub fn encode(program: &Program, formula: &TemporalFormula, bound: usize) -> SmtScript {
    let p = program;
    let mut enc = Enc { p, fresh: 0 };
    let header = header(p, &mut enc);
    let mut ticks = Vec::new();
    let mut checks = Vec::new();
    for t in 0..bound {
        let mut s = String::new();
        for (k, port) in p.root().inputs.iter().enumerate() {
            let _ = writeln!(s, "(declare-const in{k}_t{t} Msg.{})", sort_key(p, port.ty));
            if let Some(w) = msg_well_formed(p, &format!("in{k}_t{t}"), port.ty) {
                let _ = writeln!(s, "(assert {w})");
            }
        }
        for &i in &p.network.schedule {
            instance_tick(p, &mut enc, i, t, &mut s);
        }
        ticks.push(s);
        let mut fails = Vec::new();
        for c in &formula.conjuncts {
            if c.next {
                if t >= 1 {
                    let a = prop_term(p, &mut enc, formula, &c.antecedent, t - 1);
                    let q = prop_term(p, &mut enc, formula, &c.consequent, t);
                    fails.push(format!("(and {a} (not {q}))"));
                }
            } else {
                let a = prop_term(p, &mut enc, formula, &c.antecedent, t);
                let q = prop_term(p, &mut enc, formula, &c.consequent, t);
                fails.push(format!("(and {a} (not {q}))"));
            }
        }
        checks.push(disj(fails));
    }
    SmtScript { header, ticks, checks }
}

fn int_of(x: &Sexpr) -> Option<i64> {
    match x {
        Sexpr::Atom(a) => a.parse().ok(),
        Sexpr::List(l) if l.len() == 2 && l[0].atom() == Some("-") => int_of(&l[1]).map(|v| -v),
        _ => None,
    }
}

/// Strip `(as X S)` qualifications.
fn unqualify(x: &Sexpr) -> &Sexpr {
    match x {
        Sexpr::List(l) if l.len() == 3 && l[0].atom() == Some("as") => &l[1],
        _ => x,
    }
}

fn value_of(p: &Program, x: &Sexpr, ty: Ty) -> Option<Value> {
    let x = unqualify(x);
    match ty {
        Ty::Bool => match x.atom()? {
            "true" => Some(Value::Bool(true)),
            "false" => Some(Value::Bool(false)),
            _ => None,
        },
        Ty::Int { .. } => int_of(x).map(Value::Int),
        Ty::Named(id) => {
            let t = p.types.get(id);
            let (head, args): (&str, &[Sexpr]) = match x {
                Sexpr::Atom(a) => (a, &[]),
                Sexpr::List(l) => (l.first()?.atom()?, &l[1..]),
                Sexpr::Str(_) => return None,
            };
            match &t.kind {
                NominalKind::Record(fs) => {
                    if head != format!("mk.{}", t.name) || args.len() != fs.len() {
                        return None;
                    }
                    let fields = fs.iter().zip(args).map(|(f, a)| value_of(p, a, f.ty)).collect::<Option<Vec<_>>>()?;
                    Some(Value::Record {
                        ty: id,
                        fields: fields.into(),
                    })
                }
                _ => {
                    let name = head.strip_prefix(&format!("{}.", t.name))?;
                    let tag = t.ctor_tag(name)?;
                    let ftys = t.ctor_fields(tag);
                    if ftys.len() != args.len() {
                        return None;
                    }
                    let vals = ftys.iter().zip(args).map(|(f, a)| value_of(p, a, *f)).collect::<Option<Vec<_>>>()?;
                    Some(Value::Ctor {
                        ty: id,
                        tag,
                        args: vals.into(),
                    })
                }
            }
        }
    }
}

fn message_of(p: &Program, x: &Sexpr, ty: Ty) -> Option<Message> {
    let k = sort_key(p, ty);
    match unqualify(x) {
        Sexpr::Atom(a) if *a == format!("absent.{k}") => Some(Message::Absent),
        Sexpr::List(l) if l.len() == 2 && l[0].atom() == Some(&format!("present.{k}")) => value_of(p, &l[1], ty).map(Message::Present),
        _ => None,
    }
}

/// `name -> value` of the constants in a `get-model` response.
fn model_values(resp: &[Sexpr]) -> HashMap<String, Sexpr> {
    let mut out = HashMap::new();
    for x in resp {
        let Some(items) = x.list() else { continue };
        for d in items {
            let Some(l) = d.list() else { continue };
            if l.len() == 5 && l[0].atom() == Some("define-fun") && l[2].list().is_some_and(|a| a.is_empty()) {
                if let Some(name) = l[1].atom() {
                    out.insert(name.to_string(), l[4].clone());
                }
            }
        }
    }
    out
}

fn responses(out: &str) -> Result<Vec<Sexpr>, String> {
    let xs = parse_all(out).map_err(|e| format!("SolverParseError: {e}"))?;
    for x in &xs {
        if let Some(l) = x.list() {
            if l.first().and_then(Sexpr::atom) == Some("error") {
                return Err(format!("solver error: {}", l.get(1).map(|m| m.to_string()).unwrap_or_default()));
            }
        }
    }
    Ok(xs)
}

fn extract(p: &Program, model: &HashMap<String, Sexpr>, k: usize) -> Result<(Stimulus, Vec<Vec<Option<usize>>>), String> {
    let mut rows = Vec::new();
    let mut choices = Vec::new();
    for t in 0..=k {
        let mut row = Vec::new();
        for (i, port) in p.root().inputs.iter().enumerate() {
            let name = format!("in{i}_t{t}");
            row.push(match model.get(&name) {
                Some(x) => message_of(p, x, port.ty).ok_or_else(|| format!("SolverParseError: value of {name}: {x}"))?,
                None => Message::Absent,
            });
        }
        rows.push(row);
        let mut ch = Vec::new();
        for i in 0..p.network.instances.len() {
            let name = format!("ch{i}_t{t}");
            let c = match model.get(&name) {
                Some(x) => int_of(x).ok_or_else(|| format!("SolverParseError: value of {name}: {x}"))?,
                None => -1,
            };
            ch.push(usize::try_from(c).ok());
        }
        choices.push(ch);
    }
    Ok((Stimulus { rows }, choices))
}

/// Encode, and solve when the engine has a solver.
pub fn bmc_smt(program: &Program, formula: &TemporalFormula, bound: usize, engine: &SmtEngine) -> (SmtScript, Verdict) {
    let mut script = encode(program, formula, bound);
    if engine.drop_last_unrolling && !script.ticks.is_empty() {
        script.ticks.pop();
        script.checks.pop();
    }
    let Some(solver) = &engine.solver else {
        return (script, Verdict::EngineError("SolverUnavailable: no solver configured".into()));
    };
    let verdict = solve(program, formula, bound, &script, solver).unwrap_or_else(Verdict::EngineError);
    (script, verdict)
}

fn solve(p: &Program, formula: &TemporalFormula, bound: usize, script: &SmtScript, solver: &Solver) -> Result<Verdict, String> {
    let out = solver.run(&script.render())?;
    let answers: Vec<String> = responses(&out)?
        .iter()
        .filter_map(|x| x.atom().map(str::to_string))
        .collect();
    if answers.len() != script.checks.len() {
        return Err(format!(
            "SolverParseError: expected {} answers, got {}",
            script.checks.len(),
            answers.len()
        ));
    }
    let Some(k) = answers.iter().position(|a| a == "sat") else {
        if let Some(a) = answers.iter().find(|a| *a != "unsat") {
            return Err(format!("solver answered `{a}`"));
        }
        return Ok(Verdict::HoldsUpTo(bound));
    };
    let out = solver.run(&script.witness(k))?;
    let resp = responses(&out)?;
    if resp.first().and_then(Sexpr::atom) != Some("sat") {
        return Err("witness query is not satisfiable".into());
    }
    let model = model_values(&resp[1..]);
    let (stimulus, choices) = extract(p, &model, k)?;
    let r = replay(p, formula, &stimulus, ChoicePolicy::Scripted(choices.clone())).map_err(|e| e.to_string())?;
    if r.violation != Some(k) {
        return Err(format!(
            "counterexample at tick {k} does not replay (replay violation: {:?})",
            r.violation
        ));
    }
    Ok(Verdict::Counterexample(Box::new(Counterexample {
        stimulus,
        choices,
        trace: r.trace,
        tick: k,
    })))
}
