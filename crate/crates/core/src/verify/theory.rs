//! Plain-text theory document: the data dictionary, one transition
//! function per atomic component, one composition per composite, each
//! section after everything it refers to.

use std::fmt::{self, Write as _};

use crate::model::ir::{Automaton, Behavior, Component, Composite, Effect, ExprKind, Pattern, PortRef, Program, TExpr};
use crate::model::ast::UnOp;
use crate::model::types::{NominalKind, Ty};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SectionKind {
    DataDictionary,
    Function,
    Composition,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TheorySection {
    pub kind: SectionKind,
    pub name: String,
    pub body: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TheoryDocument {
    pub model: String,
    pub sections: Vec<TheorySection>,
}

impl fmt::Display for TheoryDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "theory {}", self.model)?;
        for s in &self.sections {
            let kw = match s.kind {
                SectionKind::DataDictionary => "dictionary",
                SectionKind::Function => "function",
                SectionKind::Composition => "composition",
            };
            writeln!(f, "\nsection {kw} {}", s.name)?;
            f.write_str(&s.body)?;
            writeln!(f, "end")?;
        }
        Ok(())
    }
}

/// Slot names of one frame; unnamed slots print as `x<slot>`.
struct Names(Vec<Option<String>>);

impl Names {
    fn get(&self, s: u32) -> String {
        self.0.get(s as usize).cloned().flatten().unwrap_or_else(|| format!("x{s}"))
    }
}

fn expr(p: &Program, e: &TExpr, names: &Names) -> String {
    let sub = |x: &TExpr| expr(p, x, names);
    match &e.kind {
        ExprKind::Lit(v) => v.display(&p.types).to_string(),
        ExprKind::Var(s) => names.get(*s),
        ExprKind::Call(f, args) => {
            let a: Vec<String> = args.iter().map(sub).collect();
            format!("{}({})", p.funcs[*f as usize].name, a.join(", "))
        }
        ExprKind::Ctor { ty, tag, args } => {
            let name = p.types.get(*ty).ctor_name(*tag).to_string();
            if args.is_empty() {
                name
            } else {
                let a: Vec<String> = args.iter().map(sub).collect();
                format!("{name}({})", a.join(", "))
            }
        }
        ExprKind::Record { ty, fields } => {
            let t = p.types.get(*ty);
            let NominalKind::Record(fs) = &t.kind else { unreachable!() };
            let a: Vec<String> = fs.iter().zip(fields).map(|(f, x)| format!("{} = {}", f.name, sub(x))).collect();
            format!("{} {{ {} }}", t.name, a.join(", "))
        }
        ExprKind::Field(r, i) => {
            let Ty::Named(id) = r.ty else { unreachable!() };
            let NominalKind::Record(fs) = &p.types.get(id).kind else { unreachable!() };
            format!("{}.{}", sub(r), fs[*i as usize].name)
        }
        ExprKind::Narrow(x) => sub(x),
        ExprKind::Match { scrut, arms } => {
            let Ty::Named(id) = scrut.ty else { unreachable!() };
            let t = p.types.get(id);
            let a: Vec<String> = arms
                .iter()
                .map(|arm| {
                    let pat = match arm.tag {
                        None => "_".to_string(),
                        Some(tag) if arm.binds.is_empty() => t.ctor_name(tag).to_string(),
                        Some(tag) => {
                            let b: Vec<String> = arm.binds.iter().map(|b| b.map_or("_".into(), |s| names.get(s))).collect();
                            format!("{}({})", t.ctor_name(tag), b.join(", "))
                        }
                    };
                    format!("{pat} => {}", sub(&arm.body))
                })
                .collect();
            format!("match {} {{ {} }}", sub(scrut), a.join("; "))
        }
        ExprKind::If(c, a, b) => format!("(if {} then {} else {})", sub(c), sub(a), sub(b)),
        ExprKind::Unary(UnOp::Not, x) => format!("(not {})", sub(x)),
        ExprKind::Unary(UnOp::Neg, x) => format!("(-{})", sub(x)),
        ExprKind::Binary(op, l, r) => format!("({} {} {})", sub(l), op.symbol(), sub(r)),
    }
}

fn dictionary(p: &Program) -> String {
    let mut s = String::new();
    for t in &p.types.types {
        let _ = match &t.kind {
            NominalKind::Enum(names) => writeln!(s, "  datatype {} = {}", t.name, names.join(" | ")),
            NominalKind::Variant(cs) => {
                let alts: Vec<String> = cs
                    .iter()
                    .map(|c| {
                        if c.fields.is_empty() {
                            c.name.clone()
                        } else {
                            let f: Vec<String> = c.fields.iter().map(|t| p.types.display(*t).to_string()).collect();
                            format!("{}({})", c.name, f.join(", "))
                        }
                    })
                    .collect();
                writeln!(s, "  datatype {} = {}", t.name, alts.join(" | "))
            }
            NominalKind::Record(fs) => {
                let f: Vec<String> = fs.iter().map(|f| format!("{}: {}", f.name, p.types.display(f.ty))).collect();
                writeln!(s, "  record {} = {{ {} }}", t.name, f.join(", "))
            }
        };
    }
    for f in &p.funcs {
        let params: Vec<String> = f.params.iter().map(|(n, t)| format!("{n}: {}", p.types.display(*t))).collect();
        let names = Names(f.params.iter().map(|(n, _)| Some(n.clone())).collect());
        let _ = writeln!(
            s,
            "  fun {}({}): {} = {}",
            f.name,
            params.join(", "),
            p.types.display(f.ret),
            expr(p, &f.body, &names)
        );
    }
    s
}

fn ports(p: &Program, ports: &[crate::model::ir::Port]) -> String {
    ports
        .iter()
        .map(|x| format!("{}: {}", x.name, p.types.display(x.ty)))
        .collect::<Vec<_>>()
        .join(", ")
}

fn function(p: &Program, c: &Component, a: &Automaton) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "  causality {}", c.causality);
    let _ = writeln!(s, "  states {} initial {}", a.states.join(" | "), a.states[a.initial as usize]);
    for v in &a.vars {
        let _ = writeln!(s, "  var {}: {} = {}", v.name, p.types.display(v.ty), v.init.display(&p.types));
    }
    let _ = writeln!(s, "  in ({})", ports(p, &c.inputs));
    let _ = writeln!(s, "  out ({})", ports(p, &c.outputs));
    let vars: Vec<&str> = a.vars.iter().map(|v| v.name.as_str()).collect();
    let ins: Vec<&str> = c.inputs.iter().map(|x| x.name.as_str()).collect();
    let _ = writeln!(
        s,
        "  step_{}(state, ({}), ({})) =",
        c.name,
        vars.join(", "),
        ins.join(", ")
    );
    for tr in &a.transitions {
        let mut names: Vec<Option<String>> = vec![None; a.slots.len()];
        for (i, v) in a.vars.iter().enumerate() {
            names[i] = Some(v.name.clone());
        }
        let mut conds = vec![format!("state = {}", a.states[tr.source as usize])];
        for (k, pat) in tr.patterns.iter().enumerate() {
            let port = &c.inputs[k].name;
            match pat {
                Pattern::DontCare => {}
                Pattern::Wildcard => conds.push(format!("present {port}")),
                Pattern::Absent => conds.push(format!("absent {port}")),
                Pattern::Literal(v) => conds.push(format!("{port} = {}", v.display(&p.types))),
                Pattern::Bind(slot) => {
                    names[*slot as usize] = Some(port.clone());
                    conds.push(format!("present {port}"));
                }
            }
        }
        let names = Names(names);
        if let Some(g) = &tr.guard {
            conds.push(expr(p, g, &names));
        }
        let mut vals: Vec<String> = vars.iter().map(|v| v.to_string()).collect();
        let mut outs: Vec<String> = vec!["absent".into(); c.outputs.len()];
        for eff in &tr.effects {
            match eff {
                Effect::Assign { var, value } => vals[*var as usize] = expr(p, value, &names),
                Effect::Emit { port, value: Some(v) } => outs[*port as usize] = format!("present {}", expr(p, v, &names)),
                Effect::Emit { port, value: None } => outs[*port as usize] = "absent".into(),
            }
        }
        let _ = writeln!(
            s,
            "    | {} -> ({}, ({}), ({}))",
            conds.join(" and "),
            a.states[tr.target as usize],
            vals.join(", "),
            outs.join(", ")
        );
    }
    let _ = writeln!(
        s,
        "    | otherwise -> (state, ({}), ({}))",
        vars.join(", "),
        vec!["absent"; c.outputs.len()].join(", ")
    );
    s
}

fn composition(p: &Program, c: &Component, comp: &Composite) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "  causality {}", c.causality);
    let _ = writeln!(s, "  in ({})", ports(p, &c.inputs));
    let _ = writeln!(s, "  out ({})", ports(p, &c.outputs));
    for sub in &comp.subs {
        let sc = &p.components[sub.comp as usize];
        let f = if sc.is_atomic() { "step" } else { "compose" };
        let _ = writeln!(s, "  sub {} = {f}_{}", sub.name, sc.name);
    }
    let endpoint = |r: PortRef, is_source: bool| -> String {
        match r.sub {
            None => {
                let port = if is_source { &c.inputs[r.port as usize] } else { &c.outputs[r.port as usize] };
                format!("self.{}", port.name)
            }
            Some(i) => {
                let sub = &comp.subs[i as usize];
                let sc = &p.components[sub.comp as usize];
                let port = if is_source { &sc.outputs[r.port as usize] } else { &sc.inputs[r.port as usize] };
                format!("{}.{}", sub.name, port.name)
            }
        }
    };
    for l in &comp.channels {
        let _ = writeln!(s, "  channel {} -> {}", endpoint(l.from, true), endpoint(l.to, false));
    }
    for l in &comp.delegations {
        let _ = writeln!(s, "  delegate {} -> {}", endpoint(l.from, true), endpoint(l.to, false));
    }
    s
}

pub fn export_theories(program: &Program) -> TheoryDocument {
    let mut sections = vec![TheorySection {
        kind: SectionKind::DataDictionary,
        name: "types".into(),
        body: dictionary(program),
    }];
    for c in program.components_bottom_up() {
        let comp = &program.components[c as usize];
        let (kind, body) = match &comp.behavior {
            Behavior::Automaton(a) | Behavior::Table(_, a) => (SectionKind::Function, function(program, comp, a)),
            Behavior::Composite(k) => (SectionKind::Composition, composition(program, comp, k)),
        };
        sections.push(TheorySection {
            kind,
            name: comp.name.clone(),
            body,
        });
    }
    TheoryDocument {
        model: program.name.clone(),
        sections,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::check::load_model;

    const TWO: &str = "
model Two {
  component Toggle {
    in tick: Bool init false
    out level: Bool init false
    causality weak
    automaton {
      states Low init, High
      transition Low -> High when tick? then level = true
      transition High -> Low when tick? then level = false
    }
  }
  component Top {
    in tick: Bool init false
    out a: Bool init false
    out b: Bool init false
    causality weak
    sub x: Toggle
    sub y: Toggle
    delegate tick -> x.tick
    delegate tick -> y.tick
    delegate x.level -> a
    delegate y.level -> b
  }
}
";

    #[test]
    fn one_section_per_component_after_the_dictionary() {
        let p = load_model(TWO).unwrap();
        let doc = export_theories(&p);
        let kinds: Vec<SectionKind> = doc.sections.iter().map(|s| s.kind).collect();
        assert_eq!(kinds, [SectionKind::DataDictionary, SectionKind::Function, SectionKind::Composition]);
        let f = &doc.sections[1].body;
        assert_eq!(f.matches("    | ").count(), 3, "{f}");
        assert!(f.contains("| otherwise -> (state, (), (absent))"), "{f}");
        let c = &doc.sections[2].body;
        assert!(c.contains("sub x = step_Toggle") && c.contains("sub y = step_Toggle"), "{c}");
    }
}
