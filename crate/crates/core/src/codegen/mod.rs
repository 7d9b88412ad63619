//! C code generation in a restricted subset: no pointer arithmetic, no heap,
//! no recursion, only fixed-bound loops.
//!
//! Layout: `types.h`/`types.c` hold the data dictionary and the model's
//! functions, every component gets a `<Component>.h`/`.c` pair with a step
//! function, and `harness.c` drives the root component from a stimulus
//! file. Where the model is non-deterministic the generated code takes the
//! first enabled transition, i.e. it implements one refinement.

mod emit;
mod harness;
mod lint;

use std::fmt::Write as _;
use std::path::Path;

use crate::check::overlapping_transitions;
use crate::model::ast::Causality;
use crate::model::ir::{Automaton, Behavior, CompId, Component, Composite, Effect, Pattern, Program};
use crate::model::types::{NominalKind, Ty};

pub use harness::generate_harness;
pub use lint::lint_subset;

use emit::{c_type, ctor_const, ident, msg_size, msg_type, size_of, Emitter};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnitKind {
    Types,
    ComponentStep,
    Harness,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratedUnit {
    pub file_name: String,
    pub contents: String,
    pub kind: UnitKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generated {
    pub units: Vec<GeneratedUnit>,
    /// Components whose generated code relies on taking the first enabled
    /// transition.
    pub first_policy: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum GenError {
    #[error("composite `{0}`: channel feedback between subcomponents only passes through strongly causal atomic components in generated code")]
    UnsupportedFeedback(String),
}

/// Storage of the root state aggregate, in bytes.
pub fn state_bytes(p: &Program) -> usize {
    comp_state_bytes(p, p.root)
}

fn comp_state_bytes(p: &Program, c: CompId) -> usize {
    let comp = &p.components[c as usize];
    match &comp.behavior {
        Behavior::Composite(k) => k.subs.iter().map(|s| comp_state_bytes(p, s.comp)).sum::<usize>().max(4),
        Behavior::Automaton(a) | Behavior::Table(_, a) => {
            let vars: usize = a.vars.iter().map(|v| size_of(p, v.ty)).sum();
            let buf = if comp.causality == Causality::Strong { ports_bytes(p, &comp.outputs) } else { 0 };
            4 + vars + buf
        }
    }
}

/// Size of an input or output aggregate.
pub(crate) fn ports_bytes(p: &Program, ports: &[crate::model::ir::Port]) -> usize {
    ports.iter().map(|x| msg_size(p, x.ty)).sum::<usize>().max(4)
}

/// Named types, each after the types its fields mention.
fn type_order(p: &Program) -> Vec<u32> {
    fn deps(p: &Program, id: u32) -> Vec<u32> {
        let fields: Vec<Ty> = match &p.types.get(id).kind {
            NominalKind::Enum(_) => Vec::new(),
            NominalKind::Record(fs) => fs.iter().map(|f| f.ty).collect(),
            NominalKind::Variant(cs) => cs.iter().flat_map(|c| c.fields.iter().copied()).collect(),
        };
        fields
            .into_iter()
            .filter_map(|t| if let Ty::Named(d) = t { Some(d) } else { None })
            .collect()
    }
    fn visit(p: &Program, id: u32, seen: &mut [bool], out: &mut Vec<u32>) {
        if seen[id as usize] {
            return;
        }
        seen[id as usize] = true;
        for d in deps(p, id) {
            visit(p, d, seen, out);
        }
        out.push(id);
    }
    let n = p.types.types.len();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for id in 0..n as u32 {
        visit(p, id, &mut seen, &mut out);
    }
    out
}

fn guard_name(file: &str) -> String {
    let mut g = String::from("SYN_");
    for ch in file.chars() {
        g.push(if ch.is_ascii_alphanumeric() { ch.to_ascii_uppercase() } else { '_' });
    }
    g
}

fn types_h(p: &Program) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "/* Data dictionary of model {}. Generated code, do not edit. */", p.name);
    let g = guard_name("types.h");
    let _ = writeln!(s, "#ifndef {g}\n#define {g}\n\n#include <stdint.h>\n");
    s.push_str("typedef int32_t syn_int;\ntypedef int32_t syn_bool;\n\n");
    s.push_str("#define SYN_INT_MIN (-2147483647 - 1)\n#define SYN_INT_MAX 2147483647\n\n");
    s.push_str("#define SYN_OK 0\n#define SYN_DIVISION_BY_ZERO 1\n#define SYN_RANGE_VIOLATION 2\n#define SYN_MATCH_FAILURE 3\n\n");
    s.push_str("typedef struct { syn_bool present; syn_bool value; } Msg_Bool;\n");
    s.push_str("typedef struct { syn_bool present; syn_int value; } Msg_Int;\n");
    for id in type_order(p) {
        let t = p.types.get(id);
        let name = ident(&t.name);
        let _ = writeln!(s);
        match &t.kind {
            NominalKind::Enum(cs) => {
                let consts: Vec<String> = cs.iter().enumerate().map(|(i, c)| format!("{}_{c} = {i}", t.name)).collect();
                let _ = writeln!(s, "enum {{ {} }};\ntypedef int32_t {name};", consts.join(", "));
            }
            NominalKind::Variant(cs) => {
                let consts: Vec<String> = cs.iter().enumerate().map(|(i, c)| format!("{}_{} = {i}", t.name, c.name)).collect();
                let _ = writeln!(s, "enum {{ {} }};", consts.join(", "));
                let _ = writeln!(s, "typedef struct {{\n    int32_t tag;");
                for c in cs.iter().filter(|c| !c.fields.is_empty()) {
                    let fields: Vec<String> = c
                        .fields
                        .iter()
                        .enumerate()
                        .map(|(k, f)| format!("{} f{k};", c_type(p, *f)))
                        .collect();
                    let _ = writeln!(s, "    struct {{ {} }} {};", fields.join(" "), ident(&c.name));
                }
                let _ = writeln!(s, "}} {name};");
            }
            NominalKind::Record(fs) => {
                let _ = writeln!(s, "typedef struct {{");
                for f in fs {
                    let _ = writeln!(s, "    {} {};", c_type(p, f.ty), ident(&f.name));
                }
                if fs.is_empty() {
                    let _ = writeln!(s, "    syn_int none_;");
                }
                let _ = writeln!(s, "}} {name};");
            }
        }
        let _ = writeln!(s, "typedef struct {{ syn_bool present; {name} value; }} Msg_{};", t.name);
    }
    let _ = writeln!(s);
    for id in type_order(p) {
        let t = p.types.get(id);
        if !matches!(t.kind, NominalKind::Enum(_)) {
            let n = ident(&t.name);
            let _ = writeln!(s, "syn_bool eq_{}({n} a, {n} b);", t.name);
        }
    }
    for f in &p.funcs {
        let _ = writeln!(s, "{};", func_signature(p, f));
    }
    let _ = writeln!(s, "\n#endif");
    s
}

fn func_signature(p: &Program, f: &crate::model::ir::Func) -> String {
    let mut params: Vec<String> = f
        .params
        .iter()
        .map(|(n, t)| format!("{} a_{n}", c_type(p, *t)))
        .collect();
    params.push(format!("{} *ret", c_type(p, f.ret)));
    format!("int32_t f_{}({})", f.name, params.join(", "))
}

fn types_c(p: &Program) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "/* Data dictionary of model {}. Generated code, do not edit. */\n", p.name);
    s.push_str("#include \"types.h\"\n");
    for id in type_order(p) {
        let t = p.types.get(id);
        let n = ident(&t.name);
        let mut e = Emitter::new(p, 1);
        match &t.kind {
            NominalKind::Enum(_) => continue,
            NominalKind::Record(fs) => {
                let parts: Vec<String> = fs
                    .iter()
                    .map(|f| {
                        let fname = ident(&f.name);
                        e.eq(f.ty, &format!("a.{fname}"), &format!("b.{fname}"))
                    })
                    .collect();
                let body = if parts.is_empty() { "1".to_string() } else { parts.join(" && ") };
                e.line(&format!("return {body};"));
            }
            NominalKind::Variant(cs) => {
                e.line("if (a.tag != b.tag) return 0;");
                for (tag, c) in cs.iter().enumerate() {
                    if c.fields.is_empty() {
                        continue;
                    }
                    let cn = ident(&c.name);
                    let parts: Vec<String> = c
                        .fields
                        .iter()
                        .enumerate()
                        .map(|(k, f)| e.eq(*f, &format!("a.{cn}.f{k}"), &format!("b.{cn}.f{k}")))
                        .collect();
                    let l = format!("if (a.tag == {}) return {};", ctor_const(p, id, tag as u32), parts.join(" && "));
                    e.line(&l);
                }
                e.line("return 1;");
            }
        }
        let _ = write!(s, "\nsyn_bool eq_{}({n} a, {n} b)\n{{\n{}}}\n", t.name, e.out);
    }
    for f in &p.funcs {
        let mut e = Emitter::new(p, 1);
        let mut env: Vec<Option<String>> = f.params.iter().map(|(n, _)| Some(format!("a_{n}"))).collect();
        let v = e.expr(&f.body, &mut env);
        e.check_store(&v, f.ret);
        e.line(&format!("*ret = {v};"));
        e.line("return SYN_OK;");
        let _ = write!(s, "\n{}\n{{\n{}}}\n", func_signature(p, f), e.out);
    }
    s
}

fn port_struct(p: &Program, name: &str, ports: &[crate::model::ir::Port]) -> String {
    let mut s = String::from("typedef struct {\n");
    for x in ports {
        let _ = writeln!(s, "    {} {};", msg_type(p, x.ty), ident(&x.name));
    }
    if ports.is_empty() {
        s.push_str("    syn_int none_;\n");
    }
    let _ = writeln!(s, "}} {name};");
    s
}

fn component_h(p: &Program, c: &Component, first_policy: bool) -> String {
    let n = &c.name;
    let mut s = String::new();
    let _ = writeln!(s, "/* Component {n} ({} causality). Generated code, do not edit. */", c.causality);
    if first_policy {
        let _ = writeln!(
            s,
            "/* The model leaves the choice between some transitions of {n} open;\n   this code always takes the first enabled one. */"
        );
    }
    let g = guard_name(&format!("{n}.h"));
    let _ = writeln!(s, "#ifndef {g}\n#define {g}\n\n#include \"types.h\"");
    if let Behavior::Composite(k) = &c.behavior {
        let mut seen = Vec::new();
        for sub in &k.subs {
            if !seen.contains(&sub.comp) {
                seen.push(sub.comp);
                let _ = writeln!(s, "#include \"{}.h\"", p.components[sub.comp as usize].name);
            }
        }
    }
    let _ = writeln!(s);
    s.push_str(&port_struct(p, &format!("{n}_in"), &c.inputs));
    s.push_str(&port_struct(p, &format!("{n}_out"), &c.outputs));
    match &c.behavior {
        Behavior::Composite(k) => {
            s.push_str("typedef struct {\n");
            for sub in &k.subs {
                let _ = writeln!(s, "    {}_state sub_{};", p.components[sub.comp as usize].name, sub.name);
            }
            let _ = writeln!(s, "}} {n}_state;");
        }
        Behavior::Automaton(a) | Behavior::Table(_, a) => {
            let consts: Vec<String> = a.states.iter().enumerate().map(|(i, st)| format!("{n}_at_{st} = {i}")).collect();
            let _ = writeln!(s, "enum {{ {} }};", consts.join(", "));
            s.push_str("typedef struct {\n    int32_t control;\n");
            for v in &a.vars {
                let _ = writeln!(s, "    {} v_{};", c_type(p, v.ty), v.name);
            }
            if c.causality == Causality::Strong {
                let _ = writeln!(s, "    {n}_out buffer;");
            }
            let _ = writeln!(s, "}} {n}_state;");
        }
    }
    let _ = writeln!(s, "\n/* state aggregate: {} bytes */", comp_state_bytes_of(p, c));
    let _ = writeln!(s, "void {n}_init({n}_state *st);");
    let _ = writeln!(s, "int32_t {n}_step({n}_state *st, const {n}_in *in, {n}_out *out);");
    if c.is_atomic() && c.causality == Causality::Strong {
        let _ = writeln!(s, "void {n}_emit(const {n}_state *st, {n}_out *out);");
    }
    let _ = writeln!(s, "\n#endif");
    s
}

fn comp_state_bytes_of(p: &Program, c: &Component) -> usize {
    let id = p.components.iter().position(|x| std::ptr::eq(x, c)).expect("component of this program");
    comp_state_bytes(p, id as CompId)
}

fn pattern_test(e: &mut Emitter, ty: Ty, pat: &Pattern, msg: &str) -> Option<String> {
    match pat {
        Pattern::DontCare => None,
        Pattern::Wildcard | Pattern::Bind(_) => Some(format!("{msg}.present")),
        Pattern::Absent => Some(format!("!{msg}.present")),
        Pattern::Literal(v) => {
            let lit = e.value(v);
            Some(format!("{msg}.present && {}", e.eq(ty, &format!("{msg}.value"), &lit)))
        }
    }
}

fn atomic_c(p: &Program, c: &Component, a: &Automaton) -> String {
    let n = &c.name;
    let strong = c.causality == Causality::Strong;
    let mut s = String::new();
    let _ = writeln!(s, "/* Component {n} ({} causality). Generated code, do not edit. */\n", c.causality);
    let _ = writeln!(s, "#include \"{n}.h\"\n");

    let mut e = Emitter::new(p, 1);
    e.line(&format!("{n}_state s = {{0}};"));
    e.line(&format!("s.control = {n}_at_{};", a.states[a.initial as usize]));
    for v in &a.vars {
        let val = e.value(&v.init);
        e.line(&format!("s.v_{} = {val};", v.name));
    }
    if strong {
        for port in &c.outputs {
            let val = e.value(&port.init);
            let pn = ident(&port.name);
            e.line(&format!("s.buffer.{pn}.present = 1;"));
            e.line(&format!("s.buffer.{pn}.value = {val};"));
        }
    }
    e.line("*st = s;");
    let _ = write!(s, "void {n}_init({n}_state *st)\n{{\n{}}}\n\n", e.out);

    if strong {
        let _ = write!(s, "void {n}_emit(const {n}_state *st, {n}_out *out)\n{{\n    *out = st->buffer;\n}}\n\n");
    }

    let mut e = Emitter::new(p, 1);
    let nt = a.transitions.len();
    e.line(&format!("{n}_out c = {{0}};"));
    if nt > 0 {
        e.line(&format!("syn_bool en[{nt}] = {{0}};"));
    }
    e.line("(void)in;");
    let vars: Vec<String> = a.vars.iter().map(|v| format!("st->v_{}", v.name)).collect();
    let frame = |e: &mut Emitter, t: &crate::model::ir::Transition, with_tests: bool| -> (Vec<Option<String>>, Vec<String>) {
        let mut env: Vec<Option<String>> = vec![None; a.slots.len()];
        for (i, v) in vars.iter().enumerate() {
            env[i] = Some(v.clone());
        }
        let mut tests = Vec::new();
        for (k, pat) in t.patterns.iter().enumerate() {
            let port = &c.inputs[k];
            let msg = format!("in->{}", ident(&port.name));
            if with_tests {
                if let Some(test) = pattern_test(e, port.ty, pat, &msg) {
                    tests.push(test);
                }
            }
            if let Pattern::Bind(slot) = pat {
                env[*slot as usize] = Some(format!("{msg}.value"));
            }
        }
        (env, tests)
    };
    for (j, t) in a.transitions.iter().enumerate() {
        e.line(&format!("/* line {} */", t.line));
        let (mut env, mut tests) = frame(&mut e, t, true);
        tests.insert(0, format!("st->control == {n}_at_{}", a.states[t.source as usize]));
        e.open(&format!("if ({}) {{", tests.join(" && ")));
        match &t.guard {
            Some(g) => {
                let v = e.expr(g, &mut env);
                e.line(&format!("en[{j}] = {v};"));
            }
            None => e.line(&format!("en[{j}] = 1;")),
        }
        e.close("}");
    }
    for (j, t) in a.transitions.iter().enumerate() {
        let head = if j == 0 { format!("if (en[{j}]) {{") } else { format!("}} else if (en[{j}]) {{") };
        if j == 0 {
            e.open(&head);
        } else {
            e.indent -= 1;
            e.open(&head);
        }
        let (mut env, _) = frame(&mut e, t, false);
        let mut next = Vec::new();
        for (i, v) in a.vars.iter().enumerate() {
            next.push(e.temp(v.ty, &vars[i]));
        }
        for eff in &t.effects {
            match eff {
                Effect::Emit { port, value } => {
                    let port_def = &c.outputs[*port as usize];
                    let pn = ident(&port_def.name);
                    match value {
                        Some(x) => {
                            let v = e.expr(x, &mut env);
                            e.check_store(&v, port_def.ty);
                            e.line(&format!("c.{pn}.present = 1;"));
                            e.line(&format!("c.{pn}.value = {v};"));
                        }
                        None => e.line(&format!("c.{pn}.present = 0;")),
                    }
                }
                Effect::Assign { var, value } => {
                    let v = e.expr(value, &mut env);
                    e.check_store(&v, a.vars[*var as usize].ty);
                    let l = format!("{} = {v};", next[*var as usize]);
                    e.line(&l);
                }
            }
        }
        for (i, v) in a.vars.iter().enumerate() {
            let l = format!("st->v_{} = {};", v.name, next[i]);
            e.line(&l);
        }
        e.line(&format!("st->control = {n}_at_{};", a.states[t.target as usize]));
    }
    if nt > 0 {
        e.close("}");
    }
    if strong {
        e.line("*out = st->buffer;");
        e.line("st->buffer = c;");
    } else {
        e.line("*out = c;");
    }
    e.line("return SYN_OK;");
    let _ = write!(s, "int32_t {n}_step({n}_state *st, const {n}_in *in, {n}_out *out)\n{{\n{}}}\n", e.out);
    s
}

/// Order in which a composite steps its subcomponents: every reader after
/// the producers it depends on within the tick.
fn sub_order(p: &Program, c: &Component, k: &Composite) -> Result<Vec<usize>, GenError> {
    let n = k.subs.len();
    let mut indeg = vec![0usize; n];
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    for l in &k.channels {
        let (Some(a), Some(b)) = (l.from.sub, l.to.sub) else { continue };
        let producer = &p.components[k.subs[a as usize].comp as usize];
        if producer.is_atomic() && producer.causality == Causality::Strong {
            continue;
        }
        succ[a as usize].push(b as usize);
        indeg[b as usize] += 1;
    }
    let mut order = Vec::new();
    let mut done = vec![false; n];
    while order.len() < n {
        let next = (0..n).find(|i| !done[*i] && indeg[*i] == 0);
        let Some(i) = next else {
            return Err(GenError::UnsupportedFeedback(c.name.clone()));
        };
        done[i] = true;
        order.push(i);
        for &j in &succ[i] {
            indeg[j] -= 1;
        }
    }
    Ok(order)
}

fn composite_c(p: &Program, c: &Component, k: &Composite) -> Result<String, GenError> {
    let n = &c.name;
    let mut s = String::new();
    let _ = writeln!(s, "/* Component {n} ({} causality). Generated code, do not edit. */\n", c.causality);
    let _ = writeln!(s, "#include \"{n}.h\"\n");
    let sub_comp = |i: usize| &p.components[k.subs[i].comp as usize];

    let mut e = Emitter::new(p, 1);
    for sub in &k.subs {
        e.line(&format!("{}_init(&st->sub_{});", p.components[sub.comp as usize].name, sub.name));
    }
    let _ = write!(s, "void {n}_init({n}_state *st)\n{{\n{}}}\n\n", e.out);

    let source = |to: crate::model::ir::PortRef| -> Option<String> {
        k.channels.iter().chain(&k.delegations).find(|l| l.to == to).map(|l| match l.from.sub {
            None => format!("in->{}", ident(&c.inputs[l.from.port as usize].name)),
            Some(a) => format!(
                "o_{}.{}",
                k.subs[a as usize].name,
                ident(&sub_comp(a as usize).outputs[l.from.port as usize].name)
            ),
        })
    };
    let mut e = Emitter::new(p, 1);
    for sub in &k.subs {
        let sn = &p.components[sub.comp as usize].name;
        e.line(&format!("{sn}_in i_{} = {{0}};", sub.name));
        e.line(&format!("{sn}_out o_{} = {{0}};", sub.name));
    }
    e.line(&format!("{n}_out r = {{0}};"));
    e.line("int32_t e = SYN_OK;");
    e.line("(void)in;");
    for (i, sub) in k.subs.iter().enumerate() {
        let sc = sub_comp(i);
        if sc.is_atomic() && sc.causality == Causality::Strong {
            e.line(&format!("{}_emit(&st->sub_{}, &o_{});", sc.name, sub.name, sub.name));
        }
    }
    for i in sub_order(p, c, k)? {
        let sub = &k.subs[i];
        let sc = sub_comp(i);
        for (port, def) in sc.inputs.iter().enumerate() {
            let to = crate::model::ir::PortRef {
                sub: Some(i as u32),
                port: port as u32,
            };
            if let Some(src) = source(to) {
                e.line(&format!("i_{}.{} = {src};", sub.name, ident(&def.name)));
            }
        }
        e.line(&format!("e = {}_step(&st->sub_{}, &i_{}, &o_{});", sc.name, sub.name, sub.name, sub.name));
        e.line("if (e != SYN_OK) return e;");
    }
    for (port, def) in c.outputs.iter().enumerate() {
        let to = crate::model::ir::PortRef {
            sub: None,
            port: port as u32,
        };
        if let Some(src) = source(to) {
            e.line(&format!("r.{} = {src};", ident(&def.name)));
        }
    }
    e.line("*out = r;");
    e.line("return SYN_OK;");
    let _ = write!(s, "int32_t {n}_step({n}_state *st, const {n}_in *in, {n}_out *out)\n{{\n{}}}\n", e.out);
    Ok(s)
}

/// Components whose automaton has transitions that may be enabled
/// together.
pub fn first_policy_components(p: &Program) -> Vec<String> {
    p.components_bottom_up()
        .into_iter()
        .map(|c| &p.components[c as usize])
        .filter(|c| {
            c.automaton()
                .is_some_and(|a| !overlapping_transitions(&p.types, &p.funcs, a, &c.inputs).is_empty())
        })
        .map(|c| c.name.clone())
        .collect()
}

/// Types unit and one step unit per component, in dependency order.
pub fn generate_code(p: &Program) -> Result<Generated, GenError> {
    let first_policy = first_policy_components(p);
    let mut units = vec![
        GeneratedUnit {
            file_name: "types.h".into(),
            contents: types_h(p),
            kind: UnitKind::Types,
        },
        GeneratedUnit {
            file_name: "types.c".into(),
            contents: types_c(p),
            kind: UnitKind::Types,
        },
    ];
    for id in p.components_bottom_up() {
        let c = &p.components[id as usize];
        let body = match &c.behavior {
            Behavior::Composite(k) => composite_c(p, c, k)?,
            Behavior::Automaton(a) | Behavior::Table(_, a) => atomic_c(p, c, a),
        };
        units.push(GeneratedUnit {
            file_name: format!("{}.h", c.name),
            contents: component_h(p, c, first_policy.contains(&c.name)),
            kind: UnitKind::ComponentStep,
        });
        units.push(GeneratedUnit {
            file_name: format!("{}.c", c.name),
            contents: body,
            kind: UnitKind::ComponentStep,
        });
    }
    Ok(Generated { units, first_policy })
}

/// Write units into `dir`, creating it if needed.
pub fn write_units(dir: &Path, units: &[GeneratedUnit]) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for u in units {
        std::fs::write(dir.join(&u.file_name), &u.contents)?;
    }
    Ok(())
}

/// The `.c` files of `units`, for a compiler command line.
pub fn sources(units: &[GeneratedUnit]) -> Vec<&str> {
    units
        .iter()
        .filter(|u| u.file_name.ends_with(".c"))
        .map(|u| u.file_name.as_str())
        .collect()
}
