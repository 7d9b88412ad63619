//! Expressions as C statement sequences.
//!
//! Every expression is flattened into temporaries so that checked
//! arithmetic, short-circuiting and matches keep the reference evaluation
//! order. Failures `return` an error code from the enclosing function.


use crate::model::ast::{BinOp, UnOp};
use crate::model::ir::{ExprKind, Program, TExpr};
use crate::model::types::{NominalKind, Ty, INT_MAX, INT_MIN};
use crate::model::value::Value;

const C_RESERVED: &[&str] = &[
    "auto", "break", "case", "char", "const", "continue", "default", "do", "double", "else", "enum", "extern", "float",
    "for", "goto", "if", "inline", "int", "long", "register", "restrict", "return", "short", "signed", "sizeof",
    "static", "struct", "switch", "typedef", "union", "unsigned", "void", "volatile", "while", "main", "bool", "true",
    "false", "errno", "stdin", "stdout", "stderr", "tag",
];

/// A model identifier usable as a C identifier.
pub fn ident(name: &str) -> String {
    if C_RESERVED.contains(&name) || name.starts_with("syn_") {
        format!("{name}_")
    } else {
        name.to_string()
    }
}

pub fn c_type(p: &Program, ty: Ty) -> String {
    match ty {
        Ty::Bool => "syn_bool".into(),
        Ty::Int { .. } => "syn_int".into(),
        Ty::Named(id) => ident(&p.types.get(id).name),
    }
}

/// Name of the message carrier of `ty`.
pub fn msg_type(p: &Program, ty: Ty) -> String {
    match ty {
        Ty::Bool => "Msg_Bool".into(),
        Ty::Int { .. } => "Msg_Int".into(),
        Ty::Named(id) => format!("Msg_{}", p.types.get(id).name),
    }
}

pub fn ctor_const(p: &Program, ty: u32, tag: u32) -> String {
    let t = p.types.get(ty);
    format!("{}_{}", t.name, t.ctor_name(tag))
}

pub fn int_lit(v: i64) -> String {
    if v == INT_MIN {
        "(-2147483647 - 1)".into()
    } else if v < 0 {
        format!("({v})")
    } else {
        v.to_string()
    }
}

fn is_enum(p: &Program, ty: Ty) -> bool {
    matches!(ty, Ty::Named(id) if matches!(p.types.get(id).kind, NominalKind::Enum(_)))
}

/// Zero initializer for a local of type `ty`.
pub fn zero(p: &Program, ty: Ty) -> &'static str {
    match ty {
        Ty::Named(_) if !is_enum(p, ty) => "{0}",
        _ => "0",
    }
}

pub struct Emitter<'p> {
    pub p: &'p Program,
    pub out: String,
    pub indent: usize,
    tmp: usize,
}

impl<'p> Emitter<'p> {
    pub fn new(p: &'p Program, indent: usize) -> Self {
        Emitter {
            p,
            out: String::new(),
            indent,
            tmp: 0,
        }
    }

    pub fn line(&mut self, s: &str) {
        for _ in 0..self.indent {
            self.out.push_str("    ");
        }
        self.out.push_str(s);
        self.out.push('\n');
    }

    pub fn open(&mut self, s: &str) {
        self.line(s);
        self.indent += 1;
    }

    pub fn close(&mut self, s: &str) {
        self.indent -= 1;
        self.line(s);
    }

    pub fn fresh(&mut self, prefix: &str) -> String {
        self.tmp += 1;
        format!("{prefix}{}", self.tmp)
    }

    /// Declare a temporary of type `ty` holding `init`.
    pub fn temp(&mut self, ty: Ty, init: &str) -> String {
        let t = self.fresh("t");
        let decl = format!("{} {t} = {init};", c_type(self.p, ty));
        self.line(&decl);
        t
    }

    /// Fail with a range violation unless `v` fits `ty`.
    pub fn check_store(&mut self, v: &str, ty: Ty) {
        if let Ty::Int { lo, hi } = ty {
            let mut conds = Vec::new();
            if lo > INT_MIN {
                conds.push(format!("{v} < {}", int_lit(lo)));
            }
            if hi < INT_MAX {
                conds.push(format!("{v} > {}", int_lit(hi)));
            }
            if !conds.is_empty() {
                let l = format!("if ({}) return SYN_RANGE_VIOLATION;", conds.join(" || "));
                self.line(&l);
            }
        }
    }

    /// A C expression for a constant; aggregates go through a temporary.
    pub fn value(&mut self, v: &Value) -> String {
        match v {
            Value::Bool(b) => if *b { "1" } else { "0" }.into(),
            Value::Int(i) => int_lit(*i),
            Value::Ctor { ty, tag, args } => {
                if matches!(self.p.types.get(*ty).kind, NominalKind::Enum(_)) {
                    return ctor_const(self.p, *ty, *tag);
                }
                let vals: Vec<String> = args.iter().map(|a| self.value(a)).collect();
                self.build_ctor(*ty, *tag, &vals)
            }
            Value::Record { ty, fields } => {
                let vals: Vec<String> = fields.iter().map(|a| self.value(a)).collect();
                self.build_record(*ty, &vals)
            }
        }
    }

    fn build_ctor(&mut self, ty: u32, tag: u32, vals: &[String]) -> String {
        let t = self.temp(Ty::Named(ty), "{0}");
        let nt = self.p.types.get(ty);
        let l = format!("{t}.tag = {};", ctor_const(self.p, ty, tag));
        self.line(&l);
        let cname = ident(nt.ctor_name(tag));
        for (k, v) in vals.iter().enumerate() {
            let l = format!("{t}.{cname}.f{k} = {v};");
            self.line(&l);
        }
        t
    }

    fn build_record(&mut self, ty: u32, vals: &[String]) -> String {
        let t = self.temp(Ty::Named(ty), "{0}");
        let NominalKind::Record(fs) = &self.p.types.get(ty).kind else { unreachable!() };
        for (f, v) in fs.iter().zip(vals) {
            let l = format!("{t}.{} = {v};", ident(&f.name));
            self.line(&l);
        }
        t
    }

    /// Equality test of two values of type `ty`.
    pub fn eq(&self, ty: Ty, a: &str, b: &str) -> String {
        match ty {
            Ty::Named(id) if !is_enum(self.p, ty) => format!("eq_{}({a}, {b})", self.p.types.get(id).name),
            _ => format!("({a} == {b})"),
        }
    }

    fn arith(&mut self, op: &str, a: &str, b: &str) -> String {
        let w = self.fresh("w");
        let l = format!("int64_t {w} = (int64_t){a} {op} (int64_t){b};");
        self.line(&l);
        self.narrow_wide(&w)
    }

    fn narrow_wide(&mut self, w: &str) -> String {
        let l = format!("if ({w} < SYN_INT_MIN || {w} > SYN_INT_MAX) return SYN_RANGE_VIOLATION;");
        self.line(&l);
        self.temp(Ty::INT, &format!("(syn_int){w}"))
    }

    /// Emit the evaluation of `e`; `env` maps frame slots to C lvalues.
    pub fn expr(&mut self, e: &TExpr, env: &mut Vec<Option<String>>) -> String {
        let p = self.p;
        match &e.kind {
            ExprKind::Lit(v) => self.value(v),
            ExprKind::Var(s) => env
                .get(*s as usize)
                .cloned()
                .flatten()
                .unwrap_or_else(|| panic!("slot {s} unbound in generated code")),
            ExprKind::Call(f, args) => {
                let func = &p.funcs[*f as usize];
                let mut vals = Vec::new();
                for (a, (_, pty)) in args.iter().zip(&func.params) {
                    let v = self.expr(a, env);
                    self.check_store(&v, *pty);
                    vals.push(v);
                }
                let r = self.temp(func.ret, zero(p, func.ret));
                let ec = self.fresh("e");
                vals.push(format!("&{r}"));
                let l = format!("int32_t {ec} = f_{}({});", func.name, vals.join(", "));
                self.line(&l);
                let l = format!("if ({ec} != SYN_OK) return {ec};");
                self.line(&l);
                r
            }
            ExprKind::Ctor { ty, tag, args } => {
                if is_enum(p, e.ty) {
                    return ctor_const(p, *ty, *tag);
                }
                let vals: Vec<String> = args.iter().map(|a| self.expr(a, env)).collect();
                self.build_ctor(*ty, *tag, &vals)
            }
            ExprKind::Record { ty, fields } => {
                let vals: Vec<String> = fields.iter().map(|a| self.expr(a, env)).collect();
                self.build_record(*ty, &vals)
            }
            ExprKind::Field(r, idx) => {
                let Ty::Named(id) = r.ty else { unreachable!() };
                let NominalKind::Record(fs) = &p.types.get(id).kind else { unreachable!() };
                let v = self.expr(r, env);
                format!("{v}.{}", ident(&fs[*idx as usize].name))
            }
            ExprKind::Narrow(inner) => {
                let v = self.expr(inner, env);
                self.check_store(&v, e.ty);
                v
            }
            ExprKind::Match { scrut, arms } => {
                let Ty::Named(id) = scrut.ty else { unreachable!() };
                let t = p.types.get(id);
                let enum_like = matches!(t.kind, NominalKind::Enum(_));
                let s = self.expr(scrut, env);
                let r = self.temp(e.ty, zero(p, e.ty));
                let mut first = true;
                let mut total = false;
                for arm in arms {
                    let head = match arm.tag {
                        None => {
                            total = true;
                            if first { "{".to_string() } else { "} else {".to_string() }
                        }
                        Some(tag) => {
                            let test = if enum_like {
                                format!("{s} == {}", ctor_const(p, id, tag))
                            } else {
                                format!("{s}.tag == {}", ctor_const(p, id, tag))
                            };
                            if first { format!("if ({test}) {{") } else { format!("}} else if ({test}) {{") }
                        }
                    };
                    if first {
                        self.open(&head);
                    } else {
                        self.indent -= 1;
                        self.open(&head);
                    }
                    first = false;
                    if let Some(tag) = arm.tag {
                        let cname = ident(t.ctor_name(tag));
                        for (k, (b, fty)) in arm.binds.iter().zip(t.ctor_fields(tag)).enumerate() {
                            if let Some(slot) = b {
                                let v = self.temp(*fty, &format!("{s}.{cname}.f{k}"));
                                let slot = *slot as usize;
                                if env.len() <= slot {
                                    env.resize(slot + 1, None);
                                }
                                env[slot] = Some(v);
                            }
                        }
                    }
                    let v = self.expr(&arm.body, env);
                    let l = format!("{r} = {v};");
                    self.line(&l);
                    if total {
                        break;
                    }
                }
                if !total {
                    self.indent -= 1;
                    self.open("} else {");
                    self.line("return SYN_MATCH_FAILURE;");
                }
                self.close("}");
                r
            }
            ExprKind::If(c, a, b) => {
                let cv = self.expr(c, env);
                let r = self.temp(e.ty, zero(p, e.ty));
                self.open(&format!("if ({cv}) {{"));
                let av = self.expr(a, env);
                self.line(&format!("{r} = {av};"));
                self.indent -= 1;
                self.open("} else {");
                let bv = self.expr(b, env);
                self.line(&format!("{r} = {bv};"));
                self.close("}");
                r
            }
            ExprKind::Unary(UnOp::Not, a) => {
                let v = self.expr(a, env);
                format!("(!{v})")
            }
            ExprKind::Unary(UnOp::Neg, a) => {
                let v = self.expr(a, env);
                let w = self.fresh("w");
                self.line(&format!("int64_t {w} = -(int64_t){v};"));
                self.narrow_wide(&w)
            }
            ExprKind::Binary(op @ (BinOp::And | BinOp::Or), l, rr) => {
                let lv = self.expr(l, env);
                let r = self.temp(Ty::Bool, &lv);
                let test = if *op == BinOp::And { r.clone() } else { format!("!{r}") };
                self.open(&format!("if ({test}) {{"));
                let rv = self.expr(rr, env);
                self.line(&format!("{r} = {rv};"));
                self.close("}");
                r
            }
            ExprKind::Binary(op, l, r) => {
                let lv = self.expr(l, env);
                let rv = self.expr(r, env);
                match op {
                    BinOp::Eq => self.eq(l.ty, &lv, &rv),
                    BinOp::Ne => format!("(!{})", self.eq(l.ty, &lv, &rv)),
                    BinOp::Lt => format!("({lv} < {rv})"),
                    BinOp::Le => format!("({lv} <= {rv})"),
                    BinOp::Gt => format!("({lv} > {rv})"),
                    BinOp::Ge => format!("({lv} >= {rv})"),
                    BinOp::Add => self.arith("+", &lv, &rv),
                    BinOp::Sub => self.arith("-", &lv, &rv),
                    BinOp::Mul => self.arith("*", &lv, &rv),
                    BinOp::Div | BinOp::Mod => {
                        self.line(&format!("if ({rv} == 0) return SYN_DIVISION_BY_ZERO;"));
                        self.arith(if *op == BinOp::Div { "/" } else { "%" }, &lv, &rv)
                    }
                    BinOp::And | BinOp::Or => unreachable!(),
                }
            }
        }
    }
}

/// Size in bytes of the C carrier of `ty`: every scalar is a 32-bit word,
/// so aggregates have no padding.
pub fn size_of(p: &Program, ty: Ty) -> usize {
    match ty {
        Ty::Bool | Ty::Int { .. } => 4,
        Ty::Named(id) => match &p.types.get(id).kind {
            NominalKind::Enum(_) => 4,
            NominalKind::Record(fs) => fs.iter().map(|f| size_of(p, f.ty)).sum::<usize>().max(4),
            NominalKind::Variant(cs) => 4 + cs.iter().flat_map(|c| &c.fields).map(|f| size_of(p, *f)).sum::<usize>(),
        },
    }
}

pub fn msg_size(p: &Program, ty: Ty) -> usize {
    4 + size_of(p, ty)
}
