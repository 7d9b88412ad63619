//! Canonical rendering of model ASTs. Parsing the output yields an AST
//! equal to the input.

use std::fmt::Write;

use crate::model::ast::*;
use crate::model::types::{INT_MAX, INT_MIN};

pub fn pretty_model(m: &Model) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "model {} {{", m.name);
    for t in &m.types {
        let _ = writeln!(out, "  type {} = {}", t.name, type_def_kind(&t.kind));
    }
    for f in &m.funcs {
        let params: Vec<String> = f
            .params
            .iter()
            .map(|(n, t)| format!("{n}: {}", type_expr(t)))
            .collect();
        let _ = writeln!(
            out,
            "  func {}({}): {} = {}",
            f.name,
            params.join(", "),
            type_expr(&f.ret),
            pretty_expr(&f.body)
        );
    }
    for c in &m.components {
        component(&mut out, c);
    }
    out.push_str("}\n");
    out
}

fn component(out: &mut String, c: &ComponentDef) {
    let _ = writeln!(out, "  component {} {{", c.name);
    for p in &c.ports {
        let dir = match p.dir {
            Direction::In => "in",
            Direction::Out => "out",
        };
        let _ = writeln!(
            out,
            "    {dir} {}: {} init {}",
            p.name,
            type_expr(&p.ty),
            value_lit(&p.init)
        );
    }
    let _ = writeln!(out, "    causality {}", c.causality);
    match &c.behavior {
        BehaviorDef::Automaton(a) => {
            out.push_str("    automaton {\n");
            if !a.states.is_empty() {
                let states: Vec<String> = a
                    .states
                    .iter()
                    .map(|s| {
                        if s.initial {
                            format!("{} init", s.name)
                        } else {
                            s.name.clone()
                        }
                    })
                    .collect();
                let _ = writeln!(out, "      states {}", states.join(", "));
            }
            for v in &a.vars {
                let _ = writeln!(
                    out,
                    "      var {}: {} init {}",
                    v.name,
                    type_expr(&v.ty),
                    value_lit(&v.init)
                );
            }
            for t in &a.transitions {
                let _ = write!(out, "      transition {} -> {}", t.source, t.target);
                clauses(out, &t.inputs, t.guard.as_ref());
                if !t.effects.is_empty() {
                    let effects: Vec<String> = t
                        .effects
                        .iter()
                        .map(|e| match e {
                            EffectDef::Output { port, value } => output(port, value.as_ref()),
                            EffectDef::Assign { var, value } => {
                                format!("{var} := {}", pretty_expr(value))
                            }
                        })
                        .collect();
                    let _ = write!(out, " then {}", effects.join(", "));
                }
                out.push('\n');
            }
            out.push_str("    }\n");
        }
        BehaviorDef::Table(t) => {
            out.push_str("    table {\n");
            for r in &t.rows {
                out.push_str("      row");
                clauses(out, &r.inputs, r.guard.as_ref());
                if !r.outputs.is_empty() {
                    let outs: Vec<String> =
                        r.outputs.iter().map(|(p, e)| output(p, e.as_ref())).collect();
                    let _ = write!(out, " then {}", outs.join(", "));
                }
                out.push('\n');
            }
            out.push_str("    }\n");
        }
        BehaviorDef::Composite(comp) => {
            for s in &comp.subs {
                let _ = writeln!(out, "    sub {}: {}", s.name, s.component);
            }
            for ch in &comp.channels {
                let _ = writeln!(out, "    channel {} -> {}", ch.from, ch.to);
            }
            for d in &comp.delegations {
                let _ = writeln!(out, "    delegate {} -> {}", d.from, d.to);
            }
        }
    }
    out.push_str("  }\n");
}

fn clauses(out: &mut String, inputs: &[InputPattern], guard: Option<&Expr>) {
    if !inputs.is_empty() {
        let pats: Vec<String> = inputs.iter().map(pattern).collect();
        let _ = write!(out, " when {}", pats.join(", "));
    }
    if let Some(g) = guard {
        let _ = write!(out, " with {}", pretty_expr(g));
    }
}

fn output(port: &str, value: Option<&Expr>) -> String {
    match value {
        Some(e) => format!("{port} = {}", pretty_expr(e)),
        None => format!("{port} = -"),
    }
}

fn pattern(p: &InputPattern) -> String {
    match &p.pat {
        PatternDef::Wildcard => format!("{}?", p.port),
        PatternDef::Absent => format!("{} = -", p.port),
        PatternDef::Literal(v) => format!("{} = {}", p.port, value_lit(v)),
        PatternDef::Bind(x) => format!("{}?{x}", p.port),
    }
}

pub fn type_expr(t: &TypeExpr) -> String {
    match t {
        TypeExpr::Bool => "Bool".into(),
        TypeExpr::Int => "Int".into(),
        TypeExpr::IntRange(lo, hi) => format!("Int[{lo}..{hi}]"),
        TypeExpr::Named(n) => n.clone(),
    }
}

fn type_def_kind(k: &TypeDefKind) -> String {
    match k {
        TypeDefKind::Bool => "Bool".into(),
        TypeDefKind::BoundedInt { lo, hi } if *lo == INT_MIN && *hi == INT_MAX => "Int".into(),
        TypeDefKind::BoundedInt { lo, hi } => format!("Int[{lo}..{hi}]"),
        TypeDefKind::Enum(lits) => format!("enum {{{}}}", lits.join(", ")),
        TypeDefKind::Variant(ctors) => {
            let cs: Vec<String> = ctors
                .iter()
                .map(|c| {
                    if c.fields.is_empty() {
                        c.name.clone()
                    } else {
                        let fs: Vec<String> = c.fields.iter().map(type_expr).collect();
                        format!("{}({})", c.name, fs.join(", "))
                    }
                })
                .collect();
            format!("variant {{{}}}", cs.join(", "))
        }
        TypeDefKind::Record(fields) => {
            let fs: Vec<String> = fields
                .iter()
                .map(|f| format!("{}: {}", f.name, type_expr(&f.ty)))
                .collect();
            format!("record {{{}}}", fs.join(", "))
        }
    }
}

pub fn value_lit(v: &ValueLit) -> String {
    match v {
        ValueLit::Int(i) => i.to_string(),
        ValueLit::Bool(b) => b.to_string(),
        ValueLit::Ctor(n, args) if args.is_empty() => n.clone(),
        ValueLit::Ctor(n, args) => {
            let a: Vec<String> = args.iter().map(value_lit).collect();
            format!("{n}({})", a.join(", "))
        }
        ValueLit::Record(fields) => {
            let fs: Vec<String> = fields
                .iter()
                .map(|(f, v)| format!("{f} = {}", value_lit(v)))
                .collect();
            format!("{{{}}}", fs.join(", "))
        }
    }
}

const PREC_IF: u8 = 0;
const PREC_NOT: u8 = 3;
const PREC_UNARY: u8 = 7;
const PREC_POSTFIX: u8 = 8;
const PREC_ATOM: u8 = 9;

fn prec(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::If(..) => PREC_IF,
        ExprKind::Binary(op, ..) => op.precedence(),
        ExprKind::Unary(UnOp::Not, _) => PREC_NOT,
        ExprKind::Unary(UnOp::Neg, _) => PREC_UNARY,
        ExprKind::Int(i) if *i < 0 => PREC_UNARY,
        ExprKind::Field(..) => PREC_POSTFIX,
        _ => PREC_ATOM,
    }
}

fn at_least(e: &Expr, min: u8) -> String {
    if prec(e) >= min {
        pretty_expr(e)
    } else {
        format!("({})", pretty_expr(e))
    }
}

pub fn pretty_expr(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Int(i) => i.to_string(),
        ExprKind::Bool(b) => b.to_string(),
        ExprKind::Name(n) => n.clone(),
        ExprKind::Call(f, args) => {
            let a: Vec<String> = args.iter().map(pretty_expr).collect();
            format!("{f}({})", a.join(", "))
        }
        ExprKind::Record(t, fields) => {
            let fs: Vec<String> = fields
                .iter()
                .map(|(f, v)| format!("{f} = {}", pretty_expr(v)))
                .collect();
            format!("{t}{{{}}}", fs.join(", "))
        }
        ExprKind::Field(inner, f) => format!("{}.{f}", at_least(inner, PREC_POSTFIX)),
        ExprKind::Match(scrut, arms) => {
            let s = match scrut.kind {
                ExprKind::Name(_) => pretty_expr(scrut),
                _ => format!("({})", pretty_expr(scrut)),
            };
            let a: Vec<String> = arms
                .iter()
                .map(|arm| {
                    let pat = match &arm.pat {
                        MatchPat::Wildcard => "_".to_string(),
                        MatchPat::Ctor(c, binds) if binds.is_empty() => c.clone(),
                        MatchPat::Ctor(c, binds) => {
                            let b: Vec<&str> =
                                binds.iter().map(|b| b.as_deref().unwrap_or("_")).collect();
                            format!("{c}({})", b.join(", "))
                        }
                    };
                    format!("{pat} => {}", pretty_expr(&arm.body))
                })
                .collect();
            format!("match {s} {{ {} }}", a.join(", "))
        }
        ExprKind::If(c, t, f) => format!(
            "if {} then {} else {}",
            pretty_expr(c),
            pretty_expr(t),
            pretty_expr(f)
        ),
        ExprKind::Unary(UnOp::Not, inner) => format!("not {}", at_least(inner, PREC_NOT)),
        ExprKind::Unary(UnOp::Neg, inner) => match inner.kind {
            // `-3` would read back as a literal
            ExprKind::Int(_) => format!("-({})", pretty_expr(inner)),
            _ => format!("-{}", at_least(inner, PREC_UNARY)),
        },
        ExprKind::Binary(op, l, r) => {
            let p = op.precedence();
            let lmin = if op.is_comparison() { p + 1 } else { p };
            format!("{} {} {}", at_least(l, lmin), op.symbol(), at_least(r, p + 1))
        }
        ExprKind::Present(p) => format!("{p}?"),
        ExprKind::StateRef(path) => format!("@{}", path.join(".")),
    }
}
