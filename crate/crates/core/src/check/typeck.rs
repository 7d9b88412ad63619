//! Expression type checking and lowering to [`TExpr`].

use std::collections::HashMap;

use crate::model::ast::{self, BinOp, Expr, MatchPat, Pos, TypeExpr, UnOp};
use crate::model::ir::{Arm, ExprKind, FuncId, Slot, TExpr};
use crate::model::types::{NominalKind, Ty, TypeId, TypeTable, INT_MAX, INT_MIN};
use crate::model::value::Value;

#[derive(Clone, Debug)]
pub(crate) struct FuncSig {
    pub params: Vec<(String, Ty)>,
    pub ret: Ty,
}

/// Resolved global names.
#[derive(Clone, Debug, Default)]
pub(crate) struct Env {
    pub types: TypeTable,
    /// Every usable type name, aliases resolved.
    pub type_names: HashMap<String, Ty>,
    /// Constructor and enum literal names.
    pub ctors: HashMap<String, (TypeId, u32)>,
    pub funcs: HashMap<String, (FuncId, FuncSig)>,
    /// Names whose definition was rejected; uses are not reported again.
    pub poisoned: Vec<String>,
}

#[derive(Clone, Debug)]
pub(crate) struct TypeErr {
    pub pos: Pos,
    pub code: &'static str,
    pub message: String,
}

impl Env {
    pub fn resolve_type(&self, t: &TypeExpr, pos: Pos) -> Result<Ty, Option<TypeErr>> {
        match t {
            TypeExpr::Bool => Ok(Ty::Bool),
            TypeExpr::Int => Ok(Ty::INT),
            TypeExpr::IntRange(lo, hi) => int_range(*lo, *hi, pos).map_err(Some),
            TypeExpr::Named(n) => match self.type_names.get(n) {
                Some(t) => Ok(*t),
                None if self.poisoned.contains(n) => Err(None),
                None => Err(Some(TypeErr {
                    pos,
                    code: "UnknownType",
                    message: format!("type `{n}` is not defined"),
                })),
            },
        }
    }

    /// Global names of an already checked program.
    pub fn from_program(types: &TypeTable, funcs: &[crate::model::ir::Func]) -> Env {
        let mut env = Env {
            types: types.clone(),
            ..Env::default()
        };
        for (id, t) in types.types.iter().enumerate() {
            let id = id as TypeId;
            env.type_names.insert(t.name.clone(), Ty::Named(id));
            if !matches!(t.kind, NominalKind::Record(_)) {
                for tag in 0..t.ctor_count() as u32 {
                    env.ctors.insert(t.ctor_name(tag).to_string(), (id, tag));
                }
            }
        }
        for (i, f) in funcs.iter().enumerate() {
            let sig = FuncSig {
                params: f.params.clone(),
                ret: f.ret,
            };
            env.funcs.insert(f.name.clone(), (i as FuncId, sig));
        }
        env
    }

    pub fn show(&self, t: Ty) -> String {
        self.types.display(t).to_string()
    }
}

pub(crate) fn int_range(lo: i64, hi: i64, pos: Pos) -> Result<Ty, TypeErr> {
    if lo > hi {
        return Err(TypeErr {
            pos,
            code: "EmptyRange",
            message: format!("range {lo}..{hi} is empty"),
        });
    }
    if lo < INT_MIN || hi > INT_MAX {
        return Err(TypeErr {
            pos,
            code: "RangeTooWide",
            message: format!("range {lo}..{hi} exceeds the 32-bit carrier"),
        });
    }
    Ok(Ty::Int { lo, hi })
}

/// Resolution of names that are neither local variables nor constructors
/// (root ports and `@` references in glossary conditions). Each resolved
/// name gets one slot, recorded in [`Typeck::ext_slots`] under the name
/// (or `@path` for references).
pub(crate) trait Externals {
    fn name(&mut self, name: &str) -> Option<Ty>;
    fn state_ref(&mut self, path: &[String]) -> Result<Ty, String>;
}

pub(crate) struct Typeck<'e> {
    pub env: &'e Env,
    scope: Vec<(String, Slot, Ty)>,
    pub slots: Vec<Ty>,
    pub ext: Option<&'e mut dyn Externals>,
    pub ext_slots: Vec<(String, Slot, Ty)>,
    pub errors: Vec<TypeErr>,
}

impl<'e> Typeck<'e> {
    pub fn new(env: &'e Env) -> Self {
        Typeck {
            env,
            scope: Vec::new(),
            slots: Vec::new(),
            ext: None,
            ext_slots: Vec::new(),
            errors: Vec::new(),
        }
    }

    pub fn err(&mut self, pos: Pos, code: &'static str, message: String) {
        self.errors.push(TypeErr { pos, code, message });
    }

    /// Allocate a slot without making it visible by name.
    pub fn alloc(&mut self, ty: Ty) -> Slot {
        self.slots.push(ty);
        (self.slots.len() - 1) as Slot
    }

    /// Declare a named variable in the innermost scope.
    pub fn bind(&mut self, name: &str, ty: Ty, pos: Pos) -> Slot {
        if self.env.ctors.contains_key(name) {
            self.err(
                pos,
                "NameClash",
                format!("variable `{name}` has the name of a constructor"),
            );
        } else if self.scope.iter().any(|(n, _, _)| n == name) {
            self.err(
                pos,
                "DuplicateBinding",
                format!("`{name}` is already bound here"),
            );
        }
        let s = self.alloc(ty);
        self.scope.push((name.to_string(), s, ty));
        s
    }

    pub fn scope_len(&self) -> usize {
        self.scope.len()
    }

    pub fn truncate_scope(&mut self, n: usize) {
        self.scope.truncate(n);
    }

    pub fn lookup(&self, name: &str) -> Option<(Slot, Ty)> {
        self.scope
            .iter()
            .rev()
            .find(|(n, _, _)| n == name)
            .map(|(_, s, t)| (*s, *t))
    }

    fn ext_var(&mut self, key: String, ty: Ty) -> TExpr {
        let slot = match self.ext_slots.iter().find(|(k, _, _)| *k == key) {
            Some((_, s, _)) => *s,
            None => {
                let s = self.alloc(ty);
                self.ext_slots.push((key, s, ty));
                s
            }
        };
        TExpr {
            kind: ExprKind::Var(slot),
            ty,
        }
    }

    /// Check `e` against the type of a location it is stored into.
    pub fn expect(&mut self, e: &Expr, want: Ty, what: &str) -> Option<TExpr> {
        let te = self.expr(e)?;
        if !te.ty.compatible(want) {
            let msg = format!(
                "{what} has type {}, found {}",
                self.env.show(want),
                self.env.show(te.ty)
            );
            self.err(e.pos, "TypeMismatch", msg);
            return None;
        }
        Some(te)
    }

    /// Like [`Self::expect`], inserting a range check where the location is
    /// narrower than the value.
    fn expect_narrowed(&mut self, e: &Expr, want: Ty, what: &str) -> Option<TExpr> {
        let te = self.expect(e, want, what)?;
        Some(narrow(te, want))
    }

    pub fn expr(&mut self, e: &Expr) -> Option<TExpr> {
        use ast::ExprKind as A;
        match &e.kind {
            A::Int(v) => {
                if *v < INT_MIN || *v > INT_MAX {
                    self.err(
                        e.pos,
                        "TypeMismatch",
                        format!("integer literal {v} exceeds the 32-bit carrier"),
                    );
                    return None;
                }
                Some(TExpr::lit(Value::Int(*v), Ty::Int { lo: *v, hi: *v }))
            }
            A::Bool(b) => Some(TExpr::lit(Value::Bool(*b), Ty::Bool)),
            A::Name(n) => {
                if let Some((s, ty)) = self.lookup(n) {
                    return Some(TExpr {
                        kind: ExprKind::Var(s),
                        ty,
                    });
                }
                if let Some(&(ty, tag)) = self.env.ctors.get(n) {
                    let nfields = self.env.types.get(ty).ctor_fields(tag).len();
                    if nfields != 0 {
                        self.err(
                            e.pos,
                            "ArityMismatch",
                            format!("constructor `{n}` takes {nfields} argument(s)"),
                        );
                        return None;
                    }
                    return Some(TExpr::lit(Value::enum_lit(ty, tag), Ty::Named(ty)));
                }
                if let Some(ext) = self.ext.as_mut() {
                    if let Some(ty) = ext.name(n) {
                        return Some(self.ext_var(n.clone(), ty));
                    }
                }
                self.err(e.pos, "UnknownName", format!("`{n}` is not defined here"));
                None
            }
            A::Call(n, args) => self.call(e.pos, n, args),
            A::Record(tn, fields) => {
                let Some(&Ty::Named(id)) = self.env.type_names.get(tn) else {
                    if !self.env.poisoned.contains(tn) {
                        self.err(e.pos, "UnknownType", format!("`{tn}` is not a record type"));
                    }
                    return None;
                };
                let NominalKind::Record(sigs) = &self.env.types.get(id).kind else {
                    self.err(e.pos, "TypeMismatch", format!("`{tn}` is not a record type"));
                    return None;
                };
                let sigs = sigs.clone();
                let names_ok = sigs.len() == fields.len()
                    && sigs.iter().zip(fields).all(|(s, (n, _))| s.name == *n);
                if !names_ok {
                    let want: Vec<&str> = sigs.iter().map(|s| s.name.as_str()).collect();
                    self.err(
                        e.pos,
                        "UnknownField",
                        format!("record `{tn}` needs fields {} in this order", want.join(", ")),
                    );
                    return None;
                }
                let mut out = Vec::new();
                let mut ok = true;
                for (s, (n, fe)) in sigs.iter().zip(fields) {
                    match self.expect_narrowed(fe, s.ty, &format!("field `{n}`")) {
                        Some(t) => out.push(t),
                        None => ok = false,
                    }
                }
                ok.then(|| TExpr {
                    kind: ExprKind::Record { ty: id, fields: out },
                    ty: Ty::Named(id),
                })
            }
            A::Field(inner, f) => {
                let te = self.expr(inner)?;
                let field = match te.ty {
                    Ty::Named(id) => match &self.env.types.get(id).kind {
                        NominalKind::Record(sigs) => sigs
                            .iter()
                            .position(|s| s.name == *f)
                            .map(|i| (i as u32, sigs[i].ty)),
                        _ => None,
                    },
                    _ => None,
                };
                match field {
                    Some((i, ty)) => Some(TExpr {
                        kind: ExprKind::Field(Box::new(te), i),
                        ty,
                    }),
                    None => {
                        let msg = format!("{} has no field `{f}`", self.env.show(te.ty));
                        self.err(e.pos, "UnknownField", msg);
                        None
                    }
                }
            }
            A::Match(scrut, arms) => self.match_expr(e.pos, scrut, arms),
            A::If(c, t, f) => {
                let c = self.expect(c, Ty::Bool, "condition");
                let t = self.expr(t);
                let f = self.expr(f);
                let (c, t, f) = (c?, t?, f?);
                if !t.ty.compatible(f.ty) {
                    let msg = format!(
                        "branches have types {} and {}",
                        self.env.show(t.ty),
                        self.env.show(f.ty)
                    );
                    self.err(e.pos, "TypeMismatch", msg);
                    return None;
                }
                let ty = t.ty.join(f.ty);
                Some(TExpr {
                    kind: ExprKind::If(Box::new(c), Box::new(t), Box::new(f)),
                    ty,
                })
            }
            A::Unary(op, inner) => {
                let (want, ty) = match op {
                    UnOp::Neg => (Ty::INT, Ty::INT),
                    UnOp::Not => (Ty::Bool, Ty::Bool),
                };
                let te = self.expect(inner, want, "operand")?;
                Some(TExpr {
                    kind: ExprKind::Unary(*op, Box::new(te)),
                    ty,
                })
            }
            A::Binary(op, l, r) => {
                let (lt, rt) = (self.expr(l), self.expr(r));
                let (lt, rt) = (lt?, rt?);
                let ty = if op.is_arithmetic() || matches!(op, BinOp::And | BinOp::Or) {
                    let want = if op.is_arithmetic() { Ty::INT } else { Ty::Bool };
                    for (side, t) in [(l, &lt), (r, &rt)] {
                        if !t.ty.compatible(want) {
                            let msg = format!(
                                "`{}` needs {} operands, found {}",
                                op.symbol(),
                                self.env.show(want),
                                self.env.show(t.ty)
                            );
                            self.err(side.pos, "TypeMismatch", msg);
                            return None;
                        }
                    }
                    want
                } else {
                    let ordered = !matches!(op, BinOp::Eq | BinOp::Ne);
                    if !lt.ty.compatible(rt.ty) || (ordered && !lt.ty.is_int()) {
                        let msg = format!(
                            "cannot compare {} and {} with `{}`",
                            self.env.show(lt.ty),
                            self.env.show(rt.ty),
                            op.symbol()
                        );
                        self.err(e.pos, "TypeMismatch", msg);
                        return None;
                    }
                    Ty::Bool
                };
                Some(TExpr {
                    kind: ExprKind::Binary(*op, Box::new(lt), Box::new(rt)),
                    ty,
                })
            }
            A::Present(p) => {
                self.err(
                    e.pos,
                    "NotAllowedHere",
                    format!("presence test `{p}?` is only allowed in glossary conditions"),
                );
                None
            }
            A::StateRef(path) => {
                let res = match self.ext.as_mut() {
                    Some(ext) => ext.state_ref(path),
                    None => Err(format!(
                        "`@{}` is only allowed in glossary conditions",
                        path.join(".")
                    )),
                };
                match res {
                    Ok(ty) => Some(self.ext_var(format!("@{}", path.join(".")), ty)),
                    Err(msg) => {
                        self.err(e.pos, "NotAllowedHere", msg);
                        None
                    }
                }
            }
        }
    }

    fn call(&mut self, pos: Pos, n: &str, args: &[Expr]) -> Option<TExpr> {
        if let Some((fid, sig)) = self.env.funcs.get(n) {
            let (fid, sig) = (*fid, sig.clone());
            if sig.params.len() != args.len() {
                self.err(
                    pos,
                    "ArityMismatch",
                    format!(
                        "`{n}` takes {} argument(s), got {}",
                        sig.params.len(),
                        args.len()
                    ),
                );
                return None;
            }
            let mut out = Vec::new();
            let mut ok = true;
            for ((pn, pt), a) in sig.params.iter().zip(args) {
                match self.expect(a, *pt, &format!("argument `{pn}`")) {
                    Some(t) => out.push(t),
                    None => ok = false,
                }
            }
            return ok.then(|| TExpr {
                kind: ExprKind::Call(fid, out),
                ty: sig.ret,
            });
        }
        if let Some(&(ty, tag)) = self.env.ctors.get(n) {
            let fields = self.env.types.get(ty).ctor_fields(tag).to_vec();
            if fields.len() != args.len() {
                self.err(
                    pos,
                    "ArityMismatch",
                    format!(
                        "constructor `{n}` takes {} argument(s), got {}",
                        fields.len(),
                        args.len()
                    ),
                );
                return None;
            }
            let mut out = Vec::new();
            let mut ok = true;
            for (i, (ft, a)) in fields.iter().zip(args).enumerate() {
                match self.expect_narrowed(a, *ft, &format!("argument {} of `{n}`", i + 1)) {
                    Some(t) => out.push(t),
                    None => ok = false,
                }
            }
            if fields.is_empty() {
                return Some(TExpr::lit(Value::enum_lit(ty, tag), Ty::Named(ty)));
            }
            return ok.then(|| TExpr {
                kind: ExprKind::Ctor { ty, tag, args: out },
                ty: Ty::Named(ty),
            });
        }
        if !self.env.poisoned.iter().any(|p| p == n) {
            self.err(pos, "UnknownFunction", format!("`{n}` is not a function or constructor"));
        }
        None
    }

    fn match_expr(&mut self, pos: Pos, scrut: &Expr, arms: &[ast::MatchArm]) -> Option<TExpr> {
        let st = self.expr(scrut)?;
        let id = match st.ty {
            Ty::Named(id) if !matches!(self.env.types.get(id).kind, NominalKind::Record(_)) => id,
            other => {
                let msg = format!("cannot match on {}", self.env.show(other));
                self.err(scrut.pos, "TypeMismatch", msg);
                return None;
            }
        };
        let nt = self.env.types.get(id).clone();
        let mut covered = vec![false; nt.ctor_count()];
        let mut wildcard = false;
        let mut out_arms = Vec::new();
        let mut ty: Option<Ty> = None;
        let mut ok = true;
        for arm in arms {
            if wildcard {
                self.err(arm.body.pos, "UnreachableArm", "arm follows a wildcard".into());
                ok = false;
                continue;
            }
            let mark = self.scope_len();
            let (tag, binds) = match &arm.pat {
                MatchPat::Wildcard => {
                    wildcard = true;
                    (None, Vec::new())
                }
                MatchPat::Ctor(c, binders) => {
                    let Some(tag) = nt.ctor_tag(c) else {
                        self.err(
                            arm.body.pos,
                            "UnknownConstructor",
                            format!("`{c}` is not a constructor of {}", nt.name),
                        );
                        ok = false;
                        continue;
                    };
                    let fields = nt.ctor_fields(tag);
                    if fields.len() != binders.len() {
                        self.err(
                            arm.body.pos,
                            "ArityMismatch",
                            format!("`{c}` has {} field(s), pattern binds {}", fields.len(), binders.len()),
                        );
                        ok = false;
                        continue;
                    }
                    if covered[tag as usize] {
                        self.err(arm.body.pos, "UnreachableArm", format!("`{c}` is matched twice"));
                        ok = false;
                    }
                    covered[tag as usize] = true;
                    let binds = binders
                        .iter()
                        .zip(fields)
                        .map(|(b, ft)| b.as_ref().map(|n| self.bind(n, *ft, arm.body.pos)))
                        .collect();
                    (Some(tag), binds)
                }
            };
            let body = self.expr(&arm.body);
            self.truncate_scope(mark);
            let Some(body) = body else {
                ok = false;
                continue;
            };
            match ty {
                Some(t) if !t.compatible(body.ty) => {
                    let msg = format!(
                        "match arms have types {} and {}",
                        self.env.show(t),
                        self.env.show(body.ty)
                    );
                    self.err(arm.body.pos, "TypeMismatch", msg);
                    ok = false;
                }
                Some(t) => ty = Some(t.join(body.ty)),
                None => ty = Some(body.ty),
            }
            out_arms.push(Arm { tag, binds, body });
        }
        if !wildcard && covered.iter().any(|c| !c) {
            let missing: Vec<&str> = (0..covered.len())
                .filter(|i| !covered[*i])
                .map(|i| nt.ctor_name(i as u32))
                .collect();
            self.err(
                pos,
                "NonExhaustiveMatch",
                format!("match does not cover {}", missing.join(", ")),
            );
            return None;
        }
        if !ok {
            return None;
        }
        let Some(ty) = ty else {
            self.err(pos, "NonExhaustiveMatch", "match has no arms".into());
            return None;
        };
        Some(TExpr {
            kind: ExprKind::Match {
                scrut: Box::new(st),
                arms: out_arms,
            },
            ty,
        })
    }
}

/// Wrap an integer expression whose range may exceed `want`.
pub(crate) fn narrow(te: TExpr, want: Ty) -> TExpr {
    match (te.ty, want) {
        (Ty::Int { lo: a, hi: b }, Ty::Int { lo, hi }) if a < lo || b > hi => TExpr {
            kind: ExprKind::Narrow(Box::new(te)),
            ty: want,
        },
        (_, w) if te.ty.is_int() => TExpr { ty: w, ..te },
        _ => te,
    }
}
