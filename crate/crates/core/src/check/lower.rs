//! Name resolution, type checking and lowering of a parsed model.

use std::collections::{HashMap, HashSet};

use crate::model::ast::{self, BehaviorDef, Direction, EffectDef, Model, PatternDef, Pos, TypeDefKind, TypeExpr};
use crate::model::ir::{
    Automaton, Behavior, CompId, Component, Composite, Effect, Func, FuncId, FunctionTable, Link,
    Pattern, Port, PortRef, StateVar, Sub, TableRow, Transition,
};
use crate::model::types::{CtorSig, FieldSig, NominalKind, NominalType, Ty};
use crate::model::value::value_from_lit;

use super::graph::{cycles, successors_first};
use super::report::{Category, CheckReport, Finding, Severity};
use super::typeck::{int_range, Env, FuncSig, TypeErr, Typeck};

pub(crate) struct Lowered {
    pub env: Env,
    pub funcs: Vec<Func>,
    /// Indexed by declaration order; `None` where lowering failed.
    pub components: Vec<Option<Component>>,
    pub root: Option<CompId>,
}

struct Iface {
    inputs: Vec<Port>,
    outputs: Vec<Port>,
    /// Ports whose declaration was rejected; references stay silent.
    broken: Vec<String>,
}

impl Iface {
    fn find(&self, name: &str) -> Option<(Direction, u32, &Port)> {
        if let Some(i) = self.inputs.iter().position(|p| p.name == name) {
            return Some((Direction::In, i as u32, &self.inputs[i]));
        }
        self.outputs
            .iter()
            .position(|p| p.name == name)
            .map(|i| (Direction::Out, i as u32, &self.outputs[i]))
    }
}

pub(crate) struct Lowerer<'m> {
    model: &'m Model,
    pub report: CheckReport,
}

fn type_refs(t: &TypeExpr, out: &mut Vec<String>) {
    if let TypeExpr::Named(n) = t {
        out.push(n.clone());
    }
}

fn typedef_refs(k: &TypeDefKind) -> Vec<String> {
    let mut out = Vec::new();
    match k {
        TypeDefKind::Variant(cs) => cs.iter().flat_map(|c| &c.fields).for_each(|t| type_refs(t, &mut out)),
        TypeDefKind::Record(fs) => fs.iter().for_each(|f| type_refs(&f.ty, &mut out)),
        _ => {}
    }
    out
}

fn calls(e: &ast::Expr, out: &mut Vec<String>) {
    use ast::ExprKind as A;
    match &e.kind {
        A::Call(n, args) => {
            out.push(n.clone());
            args.iter().for_each(|a| calls(a, out));
        }
        A::Record(_, fs) => fs.iter().for_each(|(_, a)| calls(a, out)),
        A::Field(a, _) | A::Unary(_, a) => calls(a, out),
        A::Match(s, arms) => {
            calls(s, out);
            arms.iter().for_each(|a| calls(&a.body, out));
        }
        A::If(a, b, c) => {
            calls(a, out);
            calls(b, out);
            calls(c, out);
        }
        A::Binary(_, a, b) => {
            calls(a, out);
            calls(b, out);
        }
        A::Int(_) | A::Bool(_) | A::Name(_) | A::Present(_) | A::StateRef(_) => {}
    }
}

/// Edges of a reference graph among `names`, keyed by position.
fn index_edges(names: &[&str], refs: impl Fn(usize) -> Vec<String>) -> Vec<Vec<usize>> {
    (0..names.len())
        .map(|i| {
            let mut e: Vec<usize> = refs(i)
                .iter()
                .filter_map(|r| names.iter().position(|n| n == r))
                .collect();
            e.sort_unstable();
            e.dedup();
            e
        })
        .collect()
}

impl<'m> Lowerer<'m> {
    pub fn new(model: &'m Model) -> Self {
        Lowerer {
            model,
            report: CheckReport::default(),
        }
    }

    fn push(&mut self, cat: Category, sev: Severity, code: &'static str, path: &str, pos: Pos, message: String) {
        self.report.findings.push(Finding {
            severity: sev,
            code,
            path: path.to_string(),
            pos,
            message,
            category: cat,
        });
    }

    fn type_errs(&mut self, path: &str, errs: Vec<TypeErr>) {
        for e in errs {
            self.push(Category::Types, Severity::Error, e.code, path, e.pos, e.message);
        }
    }

    pub fn run(mut self) -> (CheckReport, Lowered) {
        let m = self.model;
        let type_names: Vec<&str> = m.types.iter().map(|t| t.name.as_str()).collect();
        let type_edges = index_edges(&type_names, |i| typedef_refs(&m.types[i].kind));
        let func_names: Vec<&str> = m.funcs.iter().map(|f| f.name.as_str()).collect();
        let func_edges = index_edges(&func_names, |i| {
            let mut v = Vec::new();
            calls(&m.funcs[i].body, &mut v);
            v
        });
        let comp_names: Vec<&str> = m.components.iter().map(|c| c.name.as_str()).collect();
        let comp_edges = index_edges(&comp_names, |i| match &m.components[i].behavior {
            BehaviorDef::Composite(c) => c.subs.iter().map(|s| s.component.clone()).collect(),
            _ => Vec::new(),
        });
        let path = m.name.clone();
        for (what, code, names, edges, positions) in [
            ("type", "RecursiveType", &type_names, &type_edges, m.types.iter().map(|t| t.pos).collect::<Vec<_>>()),
            ("function", "RecursiveFunction", &func_names, &func_edges, m.funcs.iter().map(|f| f.pos).collect()),
            ("component", "RecursiveComponent", &comp_names, &comp_edges, m.components.iter().map(|c| c.pos).collect()),
        ] {
            for cyc in cycles(edges) {
                let shown: Vec<&str> = cyc.iter().map(|&i| names[i]).collect();
                self.push(
                    Category::Recursion,
                    Severity::Error,
                    code,
                    &path,
                    positions[cyc[0]],
                    format!("{what} `{}` is recursive: {}", names[cyc[0]], shown.join(" -> ")),
                );
            }
        }

        let mut env = Env::default();
        self.lower_types(&mut env);
        let funcs = self.lower_funcs(&mut env, &func_edges);
        let components = self.lower_components(&env);
        let recursive_components = !cycles(&comp_edges).is_empty();
        let root = if recursive_components {
            None
        } else {
            match m.root_candidates().as_slice() {
                [one] => m.components.iter().position(|c| c.name == one.name).map(|i| i as CompId),
                [] => {
                    self.push(Category::Connectivity, Severity::Error, "NoRoot", &path, m.pos, "model has no component".into());
                    None
                }
                many => {
                    let names: Vec<&str> = many.iter().map(|c| c.name.as_str()).collect();
                    self.push(
                        Category::Connectivity,
                        Severity::Error,
                        "AmbiguousRoot",
                        &path,
                        m.pos,
                        format!("several components are not instantiated anywhere: {}", names.join(", ")),
                    );
                    None
                }
            }
        };
        (
            self.report,
            Lowered {
                env,
                funcs,
                components,
                root,
            },
        )
    }

    fn lower_types(&mut self, env: &mut Env) {
        let m = self.model;
        let path = m.name.clone();
        let func_names: HashSet<&str> = m.funcs.iter().map(|f| f.name.as_str()).collect();
        let mut done = vec![false; m.types.len()];
        loop {
            let mut progress = false;
            for (i, td) in m.types.iter().enumerate() {
                if done[i] {
                    continue;
                }
                let ready = typedef_refs(&td.kind)
                    .iter()
                    .all(|r| env.type_names.contains_key(r) || !m.types.iter().any(|t| t.name == *r));
                if !ready {
                    continue;
                }
                done[i] = true;
                progress = true;
                let mut errs: Vec<TypeErr> = Vec::new();
                let resolve = |t: &TypeExpr, errs: &mut Vec<TypeErr>| match env.resolve_type(t, td.pos) {
                    Ok(t) => Some(t),
                    Err(e) => {
                        errs.extend(e);
                        None
                    }
                };
                let mut new_ctors: Vec<String> = Vec::new();
                let result: Option<Ty> = match &td.kind {
                    TypeDefKind::Bool => Some(Ty::Bool),
                    TypeDefKind::BoundedInt { lo, hi } => match int_range(*lo, *hi, td.pos) {
                        Ok(t) => Some(t),
                        Err(e) => {
                            errs.push(e);
                            None
                        }
                    },
                    TypeDefKind::Enum(lits) => {
                        new_ctors = lits.clone();
                        Some(Ty::Bool)
                    }
                    TypeDefKind::Variant(cs) => {
                        new_ctors = cs.iter().map(|c| c.name.clone()).collect();
                        let mut ok = true;
                        for c in cs {
                            for f in &c.fields {
                                ok &= resolve(f, &mut errs).is_some();
                            }
                        }
                        ok.then_some(Ty::Bool)
                    }
                    TypeDefKind::Record(fs) => {
                        let mut ok = true;
                        let mut seen = HashSet::new();
                        for f in fs {
                            if !seen.insert(&f.name) {
                                errs.push(TypeErr {
                                    pos: td.pos,
                                    code: "DuplicateField",
                                    message: format!("field `{}` appears twice in `{}`", f.name, td.name),
                                });
                                ok = false;
                            }
                            ok &= resolve(&f.ty, &mut errs).is_some();
                        }
                        ok.then_some(Ty::Bool)
                    }
                };
                let nominal = matches!(td.kind, TypeDefKind::Enum(_) | TypeDefKind::Variant(_));
                if nominal && new_ctors.is_empty() {
                    errs.push(TypeErr {
                        pos: td.pos,
                        code: "EmptyType",
                        message: format!("type `{}` has no constructors", td.name),
                    });
                }
                let mut seen = HashSet::new();
                for c in &new_ctors {
                    if !seen.insert(c) {
                        errs.push(TypeErr {
                            pos: td.pos,
                            code: "DuplicateConstructor",
                            message: format!("constructor `{c}` appears twice in `{}`", td.name),
                        });
                    } else if let Some((other, _)) = env.ctors.get(c) {
                        errs.push(TypeErr {
                            pos: td.pos,
                            code: "DuplicateConstructor",
                            message: format!(
                                "constructor `{c}` is already declared by `{}`",
                                env.types.get(*other).name
                            ),
                        });
                    } else if func_names.contains(c.as_str()) || env.type_names.contains_key(c) || m.types.iter().any(|t| t.name == *c) {
                        errs.push(TypeErr {
                            pos: td.pos,
                            code: "NameClash",
                            message: format!("constructor `{c}` has the name of a type or function"),
                        });
                    }
                }
                let failed = result.is_none() || !errs.is_empty();
                self.type_errs(&path, errs);
                if failed {
                    env.poisoned.push(td.name.clone());
                    env.poisoned.extend(new_ctors);
                    continue;
                }
                let kind = match &td.kind {
                    TypeDefKind::Bool | TypeDefKind::BoundedInt { .. } => {
                        env.type_names.insert(td.name.clone(), result.expect("checked"));
                        continue;
                    }
                    TypeDefKind::Enum(lits) => NominalKind::Enum(lits.clone()),
                    TypeDefKind::Variant(cs) => NominalKind::Variant(
                        cs.iter()
                            .map(|c| CtorSig {
                                name: c.name.clone(),
                                fields: c.fields.iter().map(|f| env.resolve_type(f, td.pos).expect("checked")).collect(),
                            })
                            .collect(),
                    ),
                    TypeDefKind::Record(fs) => NominalKind::Record(
                        fs.iter()
                            .map(|f| FieldSig {
                                name: f.name.clone(),
                                ty: env.resolve_type(&f.ty, td.pos).expect("checked"),
                            })
                            .collect(),
                    ),
                };
                let id = env.types.types.len() as u32;
                for (tag, c) in new_ctors.iter().enumerate() {
                    env.ctors.insert(c.clone(), (id, tag as u32));
                }
                env.types.types.push(NominalType {
                    name: td.name.clone(),
                    kind,
                });
                env.type_names.insert(td.name.clone(), Ty::Named(id));
            }
            if !progress {
                break;
            }
        }
        // whatever is left sits on or behind a type cycle, already reported
        for (i, td) in m.types.iter().enumerate() {
            if !done[i] {
                env.poisoned.push(td.name.clone());
            }
        }
    }

    fn lower_funcs(&mut self, env: &mut Env, edges: &[Vec<usize>]) -> Vec<Func> {
        let m = self.model;
        let path = m.name.clone();
        let order = successors_first(edges).unwrap_or_else(|| (0..m.funcs.len()).collect());
        let mut sigs: Vec<(usize, FuncSig)> = Vec::new();
        for &i in &order {
            let f = &m.funcs[i];
            let mut errs = Vec::new();
            let mut params = Vec::new();
            let mut ok = true;
            for (pn, pt) in &f.params {
                if params.iter().any(|(n, _): &(String, Ty)| n == pn) {
                    errs.push(TypeErr {
                        pos: f.pos,
                        code: "DuplicateBinding",
                        message: format!("parameter `{pn}` appears twice"),
                    });
                    ok = false;
                }
                match env.resolve_type(pt, f.pos) {
                    Ok(t) => params.push((pn.clone(), t)),
                    Err(e) => {
                        errs.extend(e);
                        ok = false;
                    }
                }
            }
            let ret = match env.resolve_type(&f.ret, f.pos) {
                Ok(t) => Some(t),
                Err(e) => {
                    errs.extend(e);
                    None
                }
            };
            self.type_errs(&path, errs);
            match (ok, ret) {
                (true, Some(ret)) => sigs.push((i, FuncSig { params, ret })),
                _ => env.poisoned.push(f.name.clone()),
            }
        }
        for (id, (i, sig)) in sigs.iter().enumerate() {
            env.funcs.insert(m.funcs[*i].name.clone(), (id as FuncId, sig.clone()));
        }
        let mut out = Vec::new();
        for (i, sig) in &sigs {
            let f = &m.funcs[*i];
            let mut tc = Typeck::new(env);
            for (pn, pt) in &sig.params {
                tc.bind(pn, *pt, f.pos);
            }
            let body = tc.expect(&f.body, sig.ret, &format!("result of `{}`", f.name));
            let slots = std::mem::take(&mut tc.slots);
            let errs = std::mem::take(&mut tc.errors);
            self.type_errs(&path, errs);
            if let Some(body) = body {
                out.push(Func {
                    name: f.name.clone(),
                    params: sig.params.clone(),
                    ret: sig.ret,
                    body,
                    slots,
                });
            }
        }
        out
    }

    fn interface(&mut self, env: &Env, c: &ast::ComponentDef) -> Iface {
        let mut iface = Iface {
            inputs: Vec::new(),
            outputs: Vec::new(),
            broken: Vec::new(),
        };
        let mut errs = Vec::new();
        let mut seen = HashSet::new();
        for p in &c.ports {
            if !seen.insert(&p.name) {
                errs.push(TypeErr {
                    pos: p.pos,
                    code: "DuplicatePort",
                    message: format!("port `{}` is declared twice", p.name),
                });
                continue;
            }
            let ty = match env.resolve_type(&p.ty, p.pos) {
                Ok(t) => t,
                Err(e) => {
                    errs.extend(e);
                    iface.broken.push(p.name.clone());
                    continue;
                }
            };
            let init = match value_from_lit(&env.types, &p.init, ty) {
                Ok(v) => v,
                Err(e) => {
                    errs.push(TypeErr {
                        pos: p.pos,
                        code: "InvalidInitialValue",
                        message: format!("initial value of port `{}`: {e}", p.name),
                    });
                    iface.broken.push(p.name.clone());
                    continue;
                }
            };
            let port = Port {
                name: p.name.clone(),
                ty,
                init,
            };
            match p.dir {
                Direction::In => iface.inputs.push(port),
                Direction::Out => iface.outputs.push(port),
            }
        }
        self.type_errs(&c.name, errs);
        iface
    }

    fn lower_components(&mut self, env: &Env) -> Vec<Option<Component>> {
        let m = self.model;
        let ifaces: Vec<Iface> = m.components.iter().map(|c| self.interface(env, c)).collect();
        let mut out = Vec::new();
        for (ci, c) in m.components.iter().enumerate() {
            let iface = &ifaces[ci];
            let before = self.report.errors().count();
            let behavior = match &c.behavior {
                BehaviorDef::Automaton(a) => self.automaton(env, c, iface, a).map(Behavior::Automaton),
                BehaviorDef::Table(t) => self.table(env, c, iface, t).map(|t| {
                    let a = t.to_automaton();
                    Behavior::Table(t, a)
                }),
                BehaviorDef::Composite(comp) => self.composite(env, c, iface, comp, &ifaces).map(Behavior::Composite),
            };
            let clean = self.report.errors().count() == before && iface.broken.is_empty();
            out.push(match behavior {
                Some(behavior) if clean => Some(Component {
                    name: c.name.clone(),
                    inputs: iface.inputs.clone(),
                    outputs: iface.outputs.clone(),
                    causality: c.causality,
                    behavior,
                }),
                _ => None,
            });
        }
        out
    }

    /// Lower the input patterns of one transition or row, binding variables.
    fn patterns(
        tc: &mut Typeck<'_>,
        iface: &Iface,
        pats: &[ast::InputPattern],
        pos: Pos,
    ) -> Vec<Pattern> {
        let mut out = vec![Pattern::DontCare; iface.inputs.len()];
        let mut seen = HashSet::new();
        for ip in pats {
            let Some((Direction::In, i, port)) = iface.find(&ip.port) else {
                if !iface.broken.contains(&ip.port) {
                    tc.err(pos, "UnknownPort", format!("`{}` is not an input port", ip.port));
                }
                continue;
            };
            if !seen.insert(i) {
                tc.err(pos, "DuplicatePattern", format!("port `{}` has two patterns", ip.port));
                continue;
            }
            let ty = port.ty;
            out[i as usize] = match &ip.pat {
                PatternDef::Wildcard => Pattern::Wildcard,
                PatternDef::Absent => Pattern::Absent,
                PatternDef::Literal(l) => match value_from_lit(&tc.env.types, l, ty) {
                    Ok(v) => Pattern::Literal(v),
                    Err(e) => {
                        tc.err(pos, "TypeMismatch", format!("pattern for `{}`: {e}", ip.port));
                        Pattern::DontCare
                    }
                },
                PatternDef::Bind(x) => Pattern::Bind(tc.bind(x, ty, pos)),
            };
        }
        out
    }

    fn outputs(
        tc: &mut Typeck<'_>,
        iface: &Iface,
        port: &str,
        value: Option<&ast::Expr>,
        pos: Pos,
        seen: &mut HashSet<u32>,
    ) -> Option<(u32, Option<crate::model::ir::TExpr>)> {
        let Some((Direction::Out, i, p)) = iface.find(port) else {
            if !iface.broken.iter().any(|b| b == port) {
                tc.err(pos, "UnknownPort", format!("`{port}` is not an output port"));
            }
            return None;
        };
        let ty = p.ty;
        if !seen.insert(i) {
            tc.err(pos, "DuplicateOutput", format!("output `{port}` is given twice"));
            return None;
        }
        match value {
            None => Some((i, None)),
            Some(e) => tc.expect(e, ty, &format!("output `{port}`")).map(|t| (i, Some(t))),
        }
    }

    fn automaton(&mut self, env: &Env, c: &ast::ComponentDef, iface: &Iface, a: &ast::AutomatonDef) -> Option<Automaton> {
        let mut tc = Typeck::new(env);
        let mut states: Vec<String> = Vec::new();
        for s in &a.states {
            if states.contains(&s.name) {
                tc.err(c.pos, "DuplicateState", format!("state `{}` is declared twice", s.name));
            } else {
                states.push(s.name.clone());
            }
        }
        let initials: Vec<&ast::StateDecl> = a.states.iter().filter(|s| s.initial).collect();
        let initial = match initials.as_slice() {
            [one] => states.iter().position(|s| *s == one.name).unwrap_or(0) as u32,
            [] => {
                tc.err(c.pos, "NoInitialState", "automaton has no initial state".into());
                0
            }
            _ => {
                tc.err(c.pos, "MultipleInitialStates", "automaton has more than one initial state".into());
                0
            }
        };
        let mut vars = Vec::new();
        for v in &a.vars {
            if vars.iter().any(|x: &StateVar| x.name == v.name) {
                tc.err(v.pos, "DuplicateVariable", format!("variable `{}` is declared twice", v.name));
                continue;
            }
            let ty = match env.resolve_type(&v.ty, v.pos) {
                Ok(t) => t,
                Err(e) => {
                    tc.errors.extend(e);
                    Ty::Bool
                }
            };
            let init = match value_from_lit(&env.types, &v.init, ty) {
                Ok(x) => x,
                Err(e) => {
                    tc.err(v.pos, "InvalidInitialValue", format!("initial value of `{}`: {e}", v.name));
                    crate::model::value::Value::default_of(&env.types, ty)
                }
            };
            tc.bind(&v.name, ty, v.pos);
            vars.push(StateVar {
                name: v.name.clone(),
                ty,
                init,
            });
        }
        let mut transitions = Vec::new();
        for t in &a.transitions {
            let mark = tc.scope_len();
            let state = |tc: &mut Typeck<'_>, n: &str| match states.iter().position(|s| s == n) {
                Some(i) => i as u32,
                None => {
                    tc.err(t.pos, "UnknownState", format!("state `{n}` is not declared"));
                    0
                }
            };
            let source = state(&mut tc, &t.source);
            let target = state(&mut tc, &t.target);
            let patterns = Self::patterns(&mut tc, iface, &t.inputs, t.pos);
            let guard = t.guard.as_ref().map(|g| tc.expect(g, Ty::Bool, "guard"));
            let mut effects = Vec::new();
            let mut seen_out = HashSet::new();
            let mut seen_var = HashSet::new();
            for e in &t.effects {
                match e {
                    EffectDef::Output { port, value } => {
                        if let Some((p, v)) = Self::outputs(&mut tc, iface, port, value.as_ref(), t.pos, &mut seen_out) {
                            effects.push(Effect::Emit { port: p, value: v });
                        }
                    }
                    EffectDef::Assign { var, value } => {
                        let Some(i) = vars.iter().position(|v| v.name == *var) else {
                            tc.err(t.pos, "UnknownVariable", format!("`{var}` is not a state variable"));
                            continue;
                        };
                        if !seen_var.insert(i) {
                            tc.err(t.pos, "DuplicateAssignment", format!("`{var}` is assigned twice"));
                            continue;
                        }
                        if let Some(v) = tc.expect(value, vars[i].ty, &format!("variable `{var}`")) {
                            effects.push(Effect::Assign { var: i as u32, value: v });
                        }
                    }
                }
            }
            tc.truncate_scope(mark);
            transitions.push(Transition {
                source,
                target,
                patterns,
                guard: guard.flatten(),
                effects,
                line: t.pos.line,
            });
        }
        let errs = std::mem::take(&mut tc.errors);
        let ok = errs.is_empty();
        let slots = std::mem::take(&mut tc.slots);
        self.type_errs(&c.name, errs);
        ok.then_some(Automaton {
            states,
            initial,
            vars,
            transitions,
            slots,
        })
    }

    fn table(&mut self, env: &Env, c: &ast::ComponentDef, iface: &Iface, t: &ast::TableDef) -> Option<FunctionTable> {
        let mut tc = Typeck::new(env);
        let mut rows = Vec::new();
        for r in &t.rows {
            let mark = tc.scope_len();
            let patterns = Self::patterns(&mut tc, iface, &r.inputs, r.pos);
            let guard = r.guard.as_ref().map(|g| tc.expect(g, Ty::Bool, "guard"));
            let mut seen = HashSet::new();
            let outputs = r
                .outputs
                .iter()
                .filter_map(|(p, v)| Self::outputs(&mut tc, iface, p, v.as_ref(), r.pos, &mut seen))
                .collect();
            tc.truncate_scope(mark);
            rows.push(TableRow {
                patterns,
                guard: guard.flatten(),
                outputs,
                line: r.pos.line,
            });
        }
        let errs = std::mem::take(&mut tc.errors);
        let ok = errs.is_empty();
        let slots = std::mem::take(&mut tc.slots);
        self.type_errs(&c.name, errs);
        ok.then_some(FunctionTable { rows, slots })
    }

    fn composite(&mut self, env: &Env, c: &ast::ComponentDef, iface: &Iface, comp: &ast::CompositeDef, ifaces: &[Iface]) -> Option<Composite> {
        let m = self.model;
        let path = c.name.as_str();
        let mut ok = true;
        let mut subs: Vec<Sub> = Vec::new();
        // sub name -> component index, None when unresolved
        let mut sub_comp: HashMap<&str, Option<usize>> = HashMap::new();
        for s in &comp.subs {
            if sub_comp.contains_key(s.name.as_str()) {
                self.push(Category::Connectivity, Severity::Error, "DuplicateInstance", path, s.pos, format!("instance `{}` is declared twice", s.name));
                ok = false;
                continue;
            }
            let idx = m.components.iter().position(|x| x.name == s.component);
            if idx.is_none() {
                self.push(Category::Connectivity, Severity::Error, "UnknownComponent", path, s.pos, format!("component `{}` is not defined", s.component));
                ok = false;
            }
            sub_comp.insert(&s.name, idx);
            subs.push(Sub {
                name: s.name.clone(),
                comp: idx.unwrap_or(0) as CompId,
            });
        }
        let sub_index = |n: &str| subs.iter().position(|s| s.name == n).map(|i| i as u32);

        // Resolve an endpoint to (portref, direction, type); Err(true) means
        // an error was reported, Err(false) that it was suppressed.
        let resolve = |this: &mut Self, ep: &ast::Endpoint, pos: Pos| -> Result<(PortRef, Direction, Ty), ()> {
            let (iface_ref, sub) = match &ep.instance {
                None => (iface, None),
                Some(inst) => match sub_comp.get(inst.as_str()) {
                    None => {
                        this.push(Category::Connectivity, Severity::Error, "UnknownInstance", path, pos, format!("no instance `{inst}`"));
                        return Err(());
                    }
                    Some(None) => return Err(()),
                    Some(Some(ci)) => (&ifaces[*ci], sub_index(inst)),
                },
            };
            match iface_ref.find(&ep.port) {
                Some((dir, port, p)) => Ok((PortRef { sub, port }, dir, p.ty)),
                None => {
                    if !iface_ref.broken.contains(&ep.port) {
                        this.push(Category::Connectivity, Severity::Error, "UnknownPort", path, pos, format!("`{ep}` is not a port"));
                    }
                    Err(())
                }
            }
        };

        let mut channels = Vec::new();
        let mut delegations = Vec::new();
        let mut drivers: HashMap<PortRef, Pos> = HashMap::new();
        for (is_channel, conn) in comp
            .channels
            .iter()
            .map(|c| (true, c))
            .chain(comp.delegations.iter().map(|d| (false, d)))
        {
            let from = resolve(self, &conn.from, conn.pos);
            let to = resolve(self, &conn.to, conn.pos);
            let (Ok(from), Ok(to)) = (from, to) else {
                ok = false;
                continue;
            };
            let shape_ok = if is_channel {
                from.0.sub.is_some() && from.1 == Direction::Out && to.0.sub.is_some() && to.1 == Direction::In
            } else {
                matches!(
                    (from.0.sub, from.1, to.0.sub, to.1),
                    (None, Direction::In, Some(_), Direction::In) | (Some(_), Direction::Out, None, Direction::Out)
                )
            };
            if !shape_ok {
                let (code, msg) = if is_channel {
                    ("InvalidChannel", format!("channel `{} -> {}` must connect a subcomponent output to a subcomponent input", conn.from, conn.to))
                } else {
                    ("InvalidDelegation", format!("delegation `{} -> {}` must connect an input to a subcomponent input or a subcomponent output to an output", conn.from, conn.to))
                };
                self.push(Category::Connectivity, Severity::Error, code, path, conn.pos, msg);
                ok = false;
                continue;
            }
            if from.2 != to.2 {
                let msg = format!("`{}` carries {} but `{}` expects {}", conn.from, env.show(from.2), conn.to, env.show(to.2));
                self.push(Category::Types, Severity::Error, "TypeMismatch", path, conn.pos, msg);
                ok = false;
            }
            if drivers.insert(to.0, conn.pos).is_some() {
                self.push(Category::Connectivity, Severity::Error, "MultipleDrivers", path, conn.pos, format!("`{}` has more than one driver", conn.to));
                ok = false;
                continue;
            }
            let link = Link { from: from.0, to: to.0 };
            if is_channel {
                channels.push(link);
            } else {
                delegations.push(link);
            }
        }
        for (si, s) in comp.subs.iter().enumerate() {
            let Some(Some(ci)) = sub_comp.get(s.name.as_str()) else { continue };
            if subs.get(si).map(|x| x.name != s.name).unwrap_or(true) {
                continue;
            }
            for (pi, p) in ifaces[*ci].inputs.iter().enumerate() {
                let r = PortRef {
                    sub: Some(si as u32),
                    port: pi as u32,
                };
                if !drivers.contains_key(&r) {
                    self.push(Category::Connectivity, Severity::Warning, "UnconnectedInput", path, s.pos, format!("input `{}.{}` is not connected and reads absent", s.name, p.name));
                }
            }
        }
        for (pi, p) in iface.outputs.iter().enumerate() {
            let r = PortRef {
                sub: None,
                port: pi as u32,
            };
            if !drivers.contains_key(&r) {
                self.push(Category::Connectivity, Severity::Warning, "UnconnectedOutput", path, c.pos, format!("output `{}` is not driven and stays absent", p.name));
            }
        }
        ok.then_some(Composite {
            subs,
            channels,
            delegations,
        })
    }
}
