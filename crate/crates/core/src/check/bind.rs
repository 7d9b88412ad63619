//! Binding requirement phrases to glossary conditions.
//!
//! A glossary condition becomes a [`Prop`]: a boolean combination of port
//! presence tests, control-state predicates and atoms. An atom is any other
//! boolean expression over root ports and instance variables; it is false
//! whenever one of the ports it reads carries no message.

use std::collections::HashMap;
use std::fmt;

use crate::model::ast::{self, BinOp, Expr, Pos, UnOp};
use crate::model::eval::{eval_expr, EvalError, Frame};
use crate::model::ir::{Func, InstId, Program, Slot, TExpr};
use crate::model::types::Ty;
use crate::model::value::{Message, Value};
use crate::syntax::{normalize_phrase, pretty_expr, Glossary, Requirement, Timing};

use super::typeck::{Env, Externals, Typeck};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RootPort {
    Input(u32),
    Output(u32),
}

/// Something an atom reads.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AtomVar {
    Port(RootPort),
    StateVar { inst: InstId, var: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Atom {
    /// The condition as written in the glossary.
    pub text: String,
    pub expr: TExpr,
    pub slots: Vec<Ty>,
    pub reads: Vec<(Slot, AtomVar)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Prop {
    Const(bool),
    Present(RootPort),
    InState { inst: InstId, state: u32 },
    /// Index into [`Bindings::atoms`].
    Atom(usize),
    Not(Box<Prop>),
    And(Vec<Prop>),
    Or(Vec<Prop>),
}

/// What a proposition can observe at one tick: the root messages and the
/// configuration every instance is in when the tick starts.
pub struct TickView<'a> {
    pub inputs: &'a [Message],
    pub outputs: &'a [Message],
    pub states: &'a [u32],
    pub vars: &'a [Vec<Value>],
}

impl TickView<'_> {
    fn port(&self, p: RootPort) -> &Message {
        match p {
            RootPort::Input(i) => &self.inputs[i as usize],
            RootPort::Output(i) => &self.outputs[i as usize],
        }
    }
}

impl Atom {
    pub fn eval(&self, funcs: &[Func], view: &TickView) -> Result<bool, EvalError> {
        let mut frame = Frame::new(self.slots.len());
        for &(slot, var) in &self.reads {
            let v = match var {
                AtomVar::Port(p) => match view.port(p) {
                    Message::Present(v) => v.clone(),
                    Message::Absent => return Ok(false),
                },
                AtomVar::StateVar { inst, var } => view.vars[inst as usize][var as usize].clone(),
            };
            frame.set(slot, v);
        }
        Ok(eval_expr(&mut frame, funcs, &self.expr)? == Value::Bool(true))
    }

    /// Root ports that must carry a message for the atom to hold.
    pub fn ports(&self) -> impl Iterator<Item = RootPort> + '_ {
        self.reads.iter().filter_map(|(_, v)| match v {
            AtomVar::Port(p) => Some(*p),
            AtomVar::StateVar { .. } => None,
        })
    }
}

impl Prop {
    pub fn eval(&self, atoms: &[Atom], funcs: &[Func], view: &TickView) -> Result<bool, EvalError> {
        Ok(match self {
            Prop::Const(b) => *b,
            Prop::Present(p) => view.port(*p).is_present(),
            Prop::InState { inst, state } => view.states[*inst as usize] == *state,
            Prop::Atom(i) => atoms[*i].eval(funcs, view)?,
            Prop::Not(p) => !p.eval(atoms, funcs, view)?,
            Prop::And(ps) => {
                for p in ps {
                    if !p.eval(atoms, funcs, view)? {
                        return Ok(false);
                    }
                }
                true
            }
            Prop::Or(ps) => {
                for p in ps {
                    if p.eval(atoms, funcs, view)? {
                        return Ok(true);
                    }
                }
                false
            }
        })
    }

    pub fn and(ps: Vec<Prop>) -> Prop {
        match <[Prop; 1]>::try_from(ps) {
            Ok([p]) => p,
            Err(ps) => Prop::And(ps),
        }
    }

    pub fn not(p: Prop) -> Prop {
        match p {
            Prop::Not(q) => *q,
            Prop::Const(b) => Prop::Const(!b),
            p => Prop::Not(Box::new(p)),
        }
    }

    /// Atom indices in order of first occurrence.
    pub fn atoms(&self, out: &mut Vec<usize>) {
        match self {
            Prop::Atom(i) if !out.contains(i) => out.push(*i),
            Prop::Not(p) => p.atoms(out),
            Prop::And(ps) | Prop::Or(ps) => ps.iter().for_each(|p| p.atoms(out)),
            _ => {}
        }
    }

    pub fn display<'a>(&'a self, program: &'a Program, atoms: &'a [Atom]) -> PropDisplay<'a> {
        PropDisplay {
            prop: self,
            program,
            atoms,
        }
    }
}

pub struct PropDisplay<'a> {
    prop: &'a Prop,
    program: &'a Program,
    atoms: &'a [Atom],
}

impl fmt::Display for PropDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_prop(f, self.prop, self.program, self.atoms)
    }
}

fn port_name(program: &Program, p: RootPort) -> &str {
    let root = program.root();
    match p {
        RootPort::Input(i) => &root.inputs[i as usize].name,
        RootPort::Output(i) => &root.outputs[i as usize].name,
    }
}

fn write_prop(f: &mut fmt::Formatter<'_>, p: &Prop, program: &Program, atoms: &[Atom]) -> fmt::Result {
    let list = |f: &mut fmt::Formatter<'_>, ps: &[Prop], sep: &str| -> fmt::Result {
        f.write_str("(")?;
        for (i, p) in ps.iter().enumerate() {
            if i > 0 {
                f.write_str(sep)?;
            }
            write_prop(f, p, program, atoms)?;
        }
        f.write_str(")")
    };
    match p {
        Prop::Const(b) => write!(f, "{b}"),
        Prop::Present(port) => write!(f, "{}?", port_name(program, *port)),
        Prop::InState { inst, state } => {
            let a = program.automaton_of(*inst);
            write!(f, "@{}.{}", program.network.instances[*inst as usize].path, a.states[*state as usize])
        }
        Prop::Atom(i) => write!(f, "[{}]", atoms[*i].text),
        Prop::Not(q) => {
            f.write_str("not ")?;
            write_prop(f, q, program, atoms)
        }
        Prop::And(ps) => list(f, ps, " and "),
        Prop::Or(ps) => list(f, ps, " or "),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundRequirement {
    pub id: String,
    pub while_cond: Prop,
    pub if_cond: Prop,
    pub then_resp: Prop,
    pub timing: Timing,
    pub else_resp: Option<Prop>,
    pub else_timing: Timing,
    pub pos: Pos,
}

/// Bound requirements sharing one atom table; equal phrases map to equal
/// propositions.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Bindings {
    pub atoms: Vec<Atom>,
    pub requirements: Vec<BoundRequirement>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum BindError {
    #[error("requirement {req}: phrase \"{phrase}\" is not in the glossary")]
    UnknownPhrase { req: String, phrase: String, pos: Pos },
    #[error("{}:{}: glossary entry \"{phrase}\": {message}", pos.line, pos.col)]
    TypeError { phrase: String, pos: Pos, message: String },
}

/// Resolve `@a.b.x` to an instance and the trailing name.
fn resolve_ref<'p>(program: &Program, path: &'p [String]) -> Result<(InstId, &'p str), String> {
    let shown = format!("@{}", path.join("."));
    let Some((last, prefix)) = path.split_last() else {
        return Err("empty reference".into());
    };
    if prefix.is_empty() {
        return Err(format!("`{shown}` must name an instance and a state or variable"));
    }
    let joined = prefix.join(".");
    if let Some(i) = program.instance_by_path(&joined) {
        return Ok((i, last));
    }
    // A component name stands for its only instance.
    let mut hits = program
        .network
        .instances
        .iter()
        .enumerate()
        .filter(|(_, inst)| program.components[inst.comp as usize].name == joined);
    match (hits.next(), hits.next()) {
        (Some((i, _)), None) => Ok((i as InstId, last)),
        (Some(_), Some(_)) => Err(format!("`{joined}` has several instances; use the instance path")),
        _ => Err(format!("no atomic instance `{joined}`")),
    }
}

struct RootNames<'p> {
    program: &'p Program,
    keys: HashMap<String, AtomVar>,
}

impl RootNames<'_> {
    fn port(&self, name: &str) -> Option<(RootPort, Ty)> {
        let root = self.program.root();
        if let Some(i) = root.input_index(name) {
            return Some((RootPort::Input(i), root.inputs[i as usize].ty));
        }
        root.output_index(name).map(|o| (RootPort::Output(o), root.outputs[o as usize].ty))
    }
}

impl Externals for RootNames<'_> {
    fn name(&mut self, name: &str) -> Option<Ty> {
        let (p, ty) = self.port(name)?;
        self.keys.insert(name.to_string(), AtomVar::Port(p));
        Some(ty)
    }

    fn state_ref(&mut self, path: &[String]) -> Result<Ty, String> {
        let (inst, last) = resolve_ref(self.program, path)?;
        let a = self.program.automaton_of(inst);
        match a.vars.iter().position(|v| v.name == last) {
            Some(v) => {
                self.keys.insert(
                    format!("@{}", path.join(".")),
                    AtomVar::StateVar { inst, var: v as u32 },
                );
                Ok(a.vars[v].ty)
            }
            None if a.states.iter().any(|s| s == last) => {
                Err(format!("control-state predicate `@{}` cannot be used inside a value expression", path.join(".")))
            }
            None => Err(format!("`{}` has no state or variable `{last}`", program_path(self.program, inst))),
        }
    }
}

fn program_path(p: &Program, inst: InstId) -> &str {
    &p.network.instances[inst as usize].path
}

struct Binder<'p> {
    program: &'p Program,
    env: Env,
    atoms: Vec<Atom>,
    /// Memoized phrase -> proposition.
    phrases: HashMap<String, Prop>,
    errors: Vec<BindError>,
}

impl<'p> Binder<'p> {
    fn prop(&mut self, e: &Expr, phrase: &str) -> Option<Prop> {
        use ast::ExprKind as K;
        match &e.kind {
            K::Bool(b) => Some(Prop::Const(*b)),
            K::Unary(UnOp::Not, x) => self.prop(x, phrase).map(Prop::not),
            K::Binary(op @ (BinOp::And | BinOp::Or), l, r) => {
                let l = self.prop(l, phrase);
                let r = self.prop(r, phrase);
                let (l, r) = (l?, r?);
                let mut parts = Vec::new();
                for p in [l, r] {
                    match (op, p) {
                        (BinOp::And, Prop::And(ps)) | (BinOp::Or, Prop::Or(ps)) => parts.extend(ps),
                        (_, p) => parts.push(p),
                    }
                }
                Some(if *op == BinOp::And { Prop::And(parts) } else { Prop::Or(parts) })
            }
            K::Present(name) => {
                let names = RootNames {
                    program: self.program,
                    keys: HashMap::new(),
                };
                match names.port(name) {
                    Some((p, _)) => Some(Prop::Present(p)),
                    None => {
                        self.type_error(phrase, e.pos, format!("`{name}` is not a port of the root component"));
                        None
                    }
                }
            }
            K::StateRef(path) => match resolve_ref(self.program, path) {
                Ok((inst, last)) => {
                    let a = self.program.automaton_of(inst);
                    match a.states.iter().position(|s| s == last) {
                        Some(s) => Some(Prop::InState { inst, state: s as u32 }),
                        None => self.atom(e, phrase),
                    }
                }
                Err(m) => {
                    self.type_error(phrase, e.pos, m);
                    None
                }
            },
            _ => self.atom(e, phrase),
        }
    }

    fn atom(&mut self, e: &Expr, phrase: &str) -> Option<Prop> {
        let mut names = RootNames {
            program: self.program,
            keys: HashMap::new(),
        };
        let (te, slots, ext, errors) = {
            let mut tc = Typeck::new(&self.env);
            tc.ext = Some(&mut names);
            let te = tc.expect(e, Ty::Bool, "a glossary condition");
            (te, tc.slots, tc.ext_slots, tc.errors)
        };
        for err in errors {
            self.type_error(phrase, err.pos, err.message);
        }
        let te = te?;
        let reads = ext.iter().map(|(k, s, _)| (*s, names.keys[k])).collect();
        let atom = Atom {
            text: pretty_expr(e),
            expr: te,
            slots,
            reads,
        };
        let idx = match self.atoms.iter().position(|a| *a == atom) {
            Some(i) => i,
            None => {
                self.atoms.push(atom);
                self.atoms.len() - 1
            }
        };
        Some(Prop::Atom(idx))
    }

    fn type_error(&mut self, phrase: &str, pos: Pos, message: String) {
        self.errors.push(BindError::TypeError {
            phrase: phrase.to_string(),
            pos,
            message,
        });
    }

    fn phrase(&mut self, glossary: &Glossary, req: &Requirement, phrase: &str) -> Option<Prop> {
        let key = normalize_phrase(phrase);
        if let Some(p) = self.phrases.get(&key) {
            return Some(p.clone());
        }
        let Some(entry) = glossary.lookup(&key) else {
            self.errors.push(BindError::UnknownPhrase {
                req: req.id.clone(),
                phrase: key,
                pos: req.pos,
            });
            return None;
        };
        let p = self.prop(&entry.expr, &key)?;
        self.phrases.insert(key, p.clone());
        Some(p)
    }

    /// A condition phrase: `AND` splits it into separately bound parts.
    fn condition(&mut self, glossary: &Glossary, req: &Requirement, text: &str) -> Option<Prop> {
        let mut parts = Vec::new();
        let mut ok = true;
        for chunk in split_and(text) {
            match self.phrase(glossary, req, &chunk) {
                Some(p) => parts.push(p),
                None => ok = false,
            }
        }
        ok.then(|| Prop::and(parts))
    }
}

fn split_and(text: &str) -> Vec<String> {
    let mut out = vec![Vec::new()];
    for w in text.split_whitespace() {
        if w == "AND" {
            out.push(Vec::new());
        } else {
            out.last_mut().unwrap().push(w);
        }
    }
    out.into_iter().map(|ws| ws.join(" ")).collect()
}

/// Bind every phrase of every requirement to its glossary condition.
pub fn bind_glossary(program: &Program, glossary: &Glossary, reqs: &[Requirement]) -> Result<Bindings, Vec<BindError>> {
    let mut b = Binder {
        program,
        env: Env::from_program(&program.types, &program.funcs),
        atoms: Vec::new(),
        phrases: HashMap::new(),
        errors: Vec::new(),
    };
    let mut bound = Vec::new();
    for r in reqs {
        let w = b.condition(glossary, r, &r.while_cond);
        let i = b.condition(glossary, r, &r.if_cond);
        let t = b.phrase(glossary, r, &r.then_resp);
        let e = match &r.else_resp {
            Some(text) => b.phrase(glossary, r, text).map(Some),
            None => Some(None),
        };
        if let (Some(w), Some(i), Some(t), Some(e)) = (w, i, t, e) {
            bound.push(BoundRequirement {
                id: r.id.clone(),
                while_cond: w,
                if_cond: i,
                then_resp: t,
                timing: r.timing,
                else_resp: e,
                else_timing: r.else_timing,
                pos: r.pos,
            });
        }
    }
    if b.errors.is_empty() {
        Ok(Bindings {
            atoms: b.atoms,
            requirements: bound,
        })
    } else {
        Err(b.errors)
    }
}
