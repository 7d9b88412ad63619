//! Random small models in the surface syntax, with random requirements over
//! their root ports. Expressions are built so that no evaluation error can
//! occur: integers stay within `0..=k` through `mod`.

use std::fmt::Write as _;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use synchrony::check::load_model;
use synchrony::model::ir::Program;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PTy {
    Bool,
    Int(i64),
    Enum,
}

impl PTy {
    fn text(&self) -> String {
        match self {
            PTy::Bool => "Bool".into(),
            PTy::Int(k) => format!("Int[0..{k}]"),
            PTy::Enum => "E".into(),
        }
    }

    fn literal(&self, rng: &mut ChaCha8Rng, ctors: usize) -> String {
        match self {
            PTy::Bool => if rng.random_bool(0.5) { "true" } else { "false" }.into(),
            PTy::Int(k) => rng.random_range(0..=*k).to_string(),
            PTy::Enum => CTORS[rng.random_range(0..ctors)].into(),
        }
    }
}

const CTORS: [&str; 3] = ["Ka", "Kb", "Kc"];

#[derive(Clone, Debug)]
pub struct Port {
    pub name: String,
    pub ty: PTy,
}

#[derive(Clone, Debug)]
pub struct Atomic {
    pub name: String,
    pub inputs: Vec<Port>,
    pub outputs: Vec<Port>,
    pub strong: bool,
    pub table: bool,
    pub states: usize,
    /// Body lines, without the component header and ports.
    pub body: String,
    /// The same behavior written as an automaton, for tables.
    pub as_automaton: String,
}

#[derive(Clone, Debug)]
pub struct GenModel {
    pub text: String,
    /// Tables rewritten as single-state automata.
    pub automaton_text: String,
    pub atomics: Vec<Atomic>,
    pub root_inputs: Vec<Port>,
    pub root_outputs: Vec<Port>,
    pub ctors: usize,
}

struct Ctx<'r> {
    rng: &'r mut ChaCha8Rng,
    ctors: usize,
    /// Names in scope with their types.
    scope: Vec<(String, PTy)>,
}

impl Ctx<'_> {
    fn pick_ty(&mut self) -> PTy {
        match self.rng.random_range(0..3) {
            0 => PTy::Bool,
            1 => PTy::Int(self.rng.random_range(1..=3)),
            _ => PTy::Enum,
        }
    }

    fn names_of(&self, want: &PTy) -> Vec<String> {
        self.scope
            .iter()
            .filter(|(_, t)| match (t, want) {
                (PTy::Int(a), PTy::Int(b)) => a <= b,
                (a, b) => a == b,
            })
            .map(|(n, _)| n.clone())
            .collect()
    }

    fn ints(&self) -> Vec<String> {
        self.scope.iter().filter(|(_, t)| matches!(t, PTy::Int(_))).map(|(n, _)| n.clone()).collect()
    }

    fn expr(&mut self, ty: &PTy, depth: u32) -> String {
        let names = self.names_of(ty);
        let leaf = depth == 0 || self.rng.random_bool(0.4);
        if leaf {
            if !names.is_empty() && self.rng.random_bool(0.6) {
                return names.choose(self.rng).unwrap().clone();
            }
            return ty.literal(self.rng, self.ctors);
        }
        match ty {
            PTy::Bool => match self.rng.random_range(0..5) {
                0 => format!("not ({})", self.expr(ty, depth - 1)),
                1 => format!("({} and {})", self.expr(ty, depth - 1), self.expr(ty, depth - 1)),
                2 => format!("({} or {})", self.expr(ty, depth - 1), self.expr(ty, depth - 1)),
                3 => {
                    let ints = self.ints();
                    let a = ints.choose(self.rng).cloned().unwrap_or_else(|| "1".into());
                    let op = ["<", "<=", "=", "!=", ">"][self.rng.random_range(0..5)];
                    format!("{a} {op} {}", self.rng.random_range(0..=3))
                }
                _ => {
                    let e = PTy::Enum;
                    format!("{} = {}", self.expr(&e, depth - 1), e.literal(self.rng, self.ctors))
                }
            },
            PTy::Int(k) => match self.rng.random_range(0..3) {
                0 => {
                    let c = self.expr(&PTy::Bool, depth - 1);
                    format!("(if {c} then {} else {})", self.expr(ty, depth - 1), self.expr(ty, depth - 1))
                }
                _ => format!("(({} + {}) mod {})", self.expr(ty, depth - 1), self.expr(ty, depth - 1), k + 1),
            },
            PTy::Enum => {
                let c = self.expr(&PTy::Bool, depth - 1);
                format!("(if {c} then {} else {})", self.expr(ty, depth - 1), self.expr(ty, depth - 1))
            }
        }
    }
}

/// Patterns, guard and effects of one transition or row.
fn clause(ctx: &mut Ctx<'_>, inputs: &[Port], outputs: &[Port], vars: &[Port], bind_base: &mut usize) -> String {
    ctx.scope = vars.iter().map(|v| (v.name.clone(), v.ty.clone())).collect();
    let mut pats = Vec::new();
    for p in inputs {
        match ctx.rng.random_range(0..20) {
            0..=5 => {}
            6..=8 => pats.push(format!("{} = -", p.name)),
            9..=14 => {
                let x = format!("x{bind_base}");
                *bind_base += 1;
                pats.push(format!("{}?{x}", p.name));
                ctx.scope.push((x, p.ty.clone()));
            }
            15..=16 => pats.push(format!("{}?", p.name)),
            _ => pats.push(format!("{} = {}", p.name, p.ty.literal(ctx.rng, ctx.ctors))),
        }
    }
    let mut s = String::new();
    if !pats.is_empty() {
        let _ = write!(s, " when {}", pats.join(", "));
    }
    if ctx.rng.random_bool(0.4) {
        let g = ctx.expr(&PTy::Bool, 2);
        let _ = write!(s, " with {g}");
    }
    let mut effs = Vec::new();
    for o in outputs {
        match ctx.rng.random_range(0..10) {
            0..=5 => {
                let e = ctx.expr(&o.ty, 2);
                effs.push(format!("{} = {e}", o.name));
            }
            6 => effs.push(format!("{} = -", o.name)),
            _ => {}
        }
    }
    for v in vars {
        if ctx.rng.random_bool(0.5) {
            let e = ctx.expr(&v.ty, 2);
            effs.push(format!("{} := {e}", v.name));
        }
    }
    if !effs.is_empty() {
        let _ = write!(s, " then {}", effs.join(", "));
    }
    s
}

fn atomic(rng: &mut ChaCha8Rng, ctors: usize, name: &str, inputs: Vec<Port>, outputs: Vec<Port>) -> Atomic {
    let strong = rng.random_bool(0.4);
    let table = rng.random_bool(0.3);
    let mut ctx = Ctx {
        rng,
        ctors,
        scope: Vec::new(),
    };
    let mut bind = 0;
    let n = ctx.rng.random_range(1..=4);
    let (body, as_automaton, states) = if table {
        let mut rows = Vec::new();
        for _ in 0..n {
            rows.push(clause(&mut ctx, &inputs, &outputs, &[], &mut bind));
        }
        let body = rows.iter().map(|r| format!("      row{r}\n")).collect::<String>();
        let auto = rows.iter().map(|r| format!("      transition Main -> Main{r}\n")).collect::<String>();
        (
            format!("    table {{\n{body}    }}\n"),
            format!("    automaton {{\n      states Main init\n{auto}    }}\n"),
            1,
        )
    } else {
        let states = ctx.rng.random_range(1..=2);
        let vars: Vec<Port> = if ctx.rng.random_bool(0.5) {
            let ty = ctx.pick_ty();
            vec![Port { name: "v0".into(), ty }]
        } else {
            Vec::new()
        };
        let mut s = String::from("    automaton {\n");
        let names: Vec<String> = (0..states).map(|i| format!("S{i}")).collect();
        let _ = writeln!(s, "      states S0 init{}", names[1..].iter().map(|n| format!(", {n}")).collect::<String>());
        for v in &vars {
            let lit = v.ty.literal(ctx.rng, ctors);
            let _ = writeln!(s, "      var {}: {} init {lit}", v.name, v.ty.text());
        }
        for _ in 0..n {
            let src = ctx.rng.random_range(0..states);
            let dst = ctx.rng.random_range(0..states);
            let c = clause(&mut ctx, &inputs, &outputs, &vars, &mut bind);
            let _ = writeln!(s, "      transition S{src} -> S{dst}{c}");
        }
        s.push_str("    }\n");
        (s.clone(), s, states)
    };
    Atomic {
        name: name.into(),
        inputs,
        outputs,
        strong,
        table,
        states,
        body,
        as_automaton,
    }
}

fn header(a: &Atomic, rng: &mut ChaCha8Rng, ctors: usize) -> String {
    let mut s = format!("  component {} {{\n", a.name);
    for p in &a.inputs {
        let _ = writeln!(s, "    in {}: {} init {}", p.name, p.ty.text(), p.ty.literal(rng, ctors));
    }
    for p in &a.outputs {
        let _ = writeln!(s, "    out {}: {} init {}", p.name, p.ty.text(), p.ty.literal(rng, ctors));
    }
    let _ = writeln!(s, "    causality {}", if a.strong { "strong" } else { "weak" });
    s
}

fn ports(ctx: &mut Ctx<'_>, prefix: &str, n: usize) -> Vec<Port> {
    (0..n)
        .map(|i| Port {
            name: format!("{prefix}{i}"),
            ty: ctx.pick_ty(),
        })
        .collect()
}

/// One random model; at most three components (two atomics under a root
/// composite, or a single atomic root).
pub fn random_model(seed: u64) -> GenModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ctors = rng.random_range(2..=3);
    let composite = rng.random_bool(0.5);
    let mut ctx = Ctx {
        rng: &mut rng,
        ctors,
        scope: Vec::new(),
    };
    let n_in = ctx.rng.random_range(1..=2);
    let n_out = ctx.rng.random_range(1..=2);
    let a_in = ports(&mut ctx, "i", n_in);
    let a_out = ports(&mut ctx, "o", n_out);

    let mut types = format!("  type E = enum {{ {} }}\n", CTORS[..ctors].join(", "));
    types.push('\n');
    if !composite {
        let a = atomic(&mut rng, ctors, "C0", a_in.clone(), a_out.clone());
        let head = header(&a, &mut rng, ctors);
        let text = format!("model M{seed} {{\n{types}{head}{}  }}\n}}\n", a.body);
        let automaton_text = format!("model M{seed} {{\n{types}{head}{}  }}\n}}\n", a.as_automaton);
        return GenModel {
            text,
            automaton_text,
            root_inputs: a_in,
            root_outputs: a_out,
            atomics: vec![a],
            ctors,
        };
    }

    let a = atomic(&mut rng, ctors, "C1", a_in, a_out);
    // B's inputs: fed by A's outputs or by the root.
    let mut channels = Vec::new();
    let mut b_in = Vec::new();
    let n_b_in = rng.random_range(1..=2);
    for i in 0..n_b_in {
        let name = format!("i{i}");
        if rng.random_bool(0.6) {
            let src = a.outputs.choose(&mut rng).unwrap();
            channels.push(format!("    channel c1.{} -> c2.{name}", src.name));
            b_in.push(Port { name, ty: src.ty.clone() });
        } else {
            let mut c = Ctx {
                rng: &mut rng,
                ctors,
                scope: Vec::new(),
            };
            let ty = c.pick_ty();
            b_in.push(Port { name, ty });
        }
    }
    let n_b_out = rng.random_range(1..=2);
    let mut c = Ctx {
        rng: &mut rng,
        ctors,
        scope: Vec::new(),
    };
    let mut b_out = ports(&mut c, "o", n_b_out);
    // Feedback from B into A, legal only through a strongly causal side.
    let mut fed_back = None;
    let b_strong_hint = rng.random_bool(0.5);
    if (a.strong || b_strong_hint) && rng.random_bool(0.6) {
        let k = rng.random_range(0..a.inputs.len());
        let name = format!("o{}", b_out.len());
        b_out.push(Port {
            name: name.clone(),
            ty: a.inputs[k].ty.clone(),
        });
        channels.push(format!("    channel c2.{name} -> c1.{}", a.inputs[k].name));
        fed_back = Some(k);
    }
    let mut b = atomic(&mut rng, ctors, "C2", b_in, b_out);
    if fed_back.is_some() && !a.strong {
        b.strong = true;
    }

    let mut root_inputs = Vec::new();
    let mut root_outputs = Vec::new();
    let mut wiring = Vec::new();
    for (k, p) in a.inputs.iter().enumerate() {
        if fed_back != Some(k) {
            let name = format!("a_{}", p.name);
            wiring.push(format!("    delegate {name} -> c1.{}", p.name));
            root_inputs.push(Port { name, ty: p.ty.clone() });
        }
    }
    for p in &b.inputs {
        if !channels.iter().any(|c| c.ends_with(&format!("-> c2.{}", p.name))) {
            let name = format!("b_{}", p.name);
            wiring.push(format!("    delegate {name} -> c2.{}", p.name));
            root_inputs.push(Port { name, ty: p.ty.clone() });
        }
    }
    for (sub, tag, x) in [("c1", "a", &a), ("c2", "b", &b)] {
        for p in &x.outputs {
            let name = format!("{tag}_{}", p.name);
            wiring.push(format!("    delegate {sub}.{} -> {name}", p.name));
            root_outputs.push(Port { name, ty: p.ty.clone() });
        }
    }

    let mut root = String::from("  component Top {\n");
    for p in &root_inputs {
        let _ = writeln!(root, "    in {}: {} init {}", p.name, p.ty.text(), p.ty.literal(&mut rng, ctors));
    }
    for p in &root_outputs {
        let _ = writeln!(root, "    out {}: {} init {}", p.name, p.ty.text(), p.ty.literal(&mut rng, ctors));
    }
    root.push_str("    causality CAUSALITY\n    sub c1: C1\n    sub c2: C2\n");
    for l in channels.iter().chain(&wiring) {
        root.push_str(l);
        root.push('\n');
    }
    root.push_str("  }\n");

    let ha = header(&a, &mut rng, ctors);
    let hb = header(&b, &mut rng, ctors);
    let build = |body_a: &str, body_b: &str, causality: &str| {
        format!(
            "model M{seed} {{\n{types}{ha}{body_a}  }}\n\n{hb}{body_b}  }}\n\n{}}}\n",
            root.replace("CAUSALITY", causality)
        )
    };
    // Declare the root strong when the checker accepts it.
    let causality = if load_model(&build(&a.body, &b.body, "strong")).is_ok() { "strong" } else { "weak" };
    GenModel {
        text: build(&a.body, &b.body, causality),
        automaton_text: build(&a.as_automaton, &b.as_automaton, causality),
        root_inputs,
        root_outputs,
        atomics: vec![a, b],
        ctors,
    }
}

/// Random requirements and glossary over the root ports and control
/// states of `m`: `count` requirements.
pub fn random_requirements(m: &GenModel, seed: u64, count: usize) -> (String, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut gls = String::new();
    let mut reqs = String::new();
    let mut phrase = 0;
    let mut atom = |rng: &mut ChaCha8Rng, gls: &mut String| -> String {
        let e = match rng.random_range(0..10) {
            0..=1 => {
                let a = m.atomics.choose(rng).unwrap();
                format!("@{}.{}", a.name, if a.table { "Main".to_string() } else { format!("S{}", rng.random_range(0..a.states)) })
            }
            2..=5 => {
                let p = m.root_inputs.iter().chain(&m.root_outputs).collect::<Vec<_>>();
                let p = p.choose(rng).unwrap();
                match rng.random_range(0..3) {
                    0 => format!("{}?", p.name),
                    1 => format!("not {}?", p.name),
                    _ => format!("{} = {}", p.name, p.ty.literal(rng, m.ctors)),
                }
            }
            6 => "true".into(),
            _ => {
                let p = m.root_outputs.choose(rng).unwrap();
                match &p.ty {
                    PTy::Int(k) => format!("{} >= {}", p.name, rng.random_range(0..=*k)),
                    t => format!("{} = {}", p.name, t.literal(rng, m.ctors)),
                }
            }
        };
        let name = format!("cond{phrase}");
        phrase += 1;
        let _ = writeln!(gls, "\"{name}\" := {e}");
        name
    };
    for r in 0..count {
        let w = atom(&mut rng, &mut gls);
        let i = atom(&mut rng, &mut gls);
        let t = atom(&mut rng, &mut gls);
        let next = |rng: &mut ChaCha8Rng| if rng.random_bool(0.5) { "NEXT " } else { "" };
        let _ = write!(reqs, "REQ f{r} WHILE {w} IF {i} THEN {}{t}", next(&mut rng));
        if rng.random_bool(0.3) {
            let e = atom(&mut rng, &mut gls);
            let _ = write!(reqs, " ELSE {}{e}", next(&mut rng));
        }
        reqs.push('\n');
    }
    (reqs, gls)
}

pub fn load_generated(text: &str) -> Program {
    load_model(text).unwrap_or_else(|e| panic!("generated model does not load: {e}\n{text}"))
}
