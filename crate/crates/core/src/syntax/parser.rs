//! Recursive-descent parser for `.syn` model files.

use crate::model::ast::*;

use super::lexer::{tokenize, Tok, Token};
use super::ParseError;

type PResult<T> = Result<T, ParseError>;

pub(crate) struct Parser {
    toks: Vec<Token>,
    i: usize,
}

impl Parser {
    pub(crate) fn new(src: &str) -> PResult<Self> {
        Ok(Parser {
            toks: tokenize(src)?,
            i: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.i + n).min(self.toks.len() - 1)].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].pos
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.i].clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        ParseError::Syntax {
            pos: self.pos(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().to_string(),
        }
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Kw(x) if *x == k)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, k: &str) -> bool {
        if self.is_kw(k) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<Pos> {
        if self.is_sym(s) {
            Ok(self.bump().pos)
        } else {
            Err(self.error(&[&format!("`{s}`")]))
        }
    }

    fn expect_kw(&mut self, k: &str) -> PResult<Pos> {
        if self.is_kw(k) {
            Ok(self.bump().pos)
        } else {
            Err(self.error(&[&format!("`{k}`")]))
        }
    }

    fn expect_ident(&mut self) -> PResult<(String, Pos)> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let pos = self.bump().pos;
                Ok((s, pos))
            }
            _ => Err(self.error(&["identifier"])),
        }
    }

    pub(crate) fn expect_eof(&self) -> PResult<()> {
        match self.peek() {
            Tok::Eof => Ok(()),
            _ => Err(self.error(&["end of input"])),
        }
    }

    fn signed_int(&mut self) -> PResult<i64> {
        let neg = self.eat_sym("-");
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(if neg { -v } else { v })
            }
            _ => Err(self.error(&["integer"])),
        }
    }

    // ----- declarations -------------------------------------------------

    pub(crate) fn model(&mut self) -> Result<Model, Vec<ParseError>> {
        let m = self.model_inner().map_err(|e| vec![e])?;
        let mut errors = Vec::new();
        let mut seen: Vec<(&str, &str)> = Vec::new();
        let decls = m
            .types
            .iter()
            .map(|t| ("type", t.name.as_str(), t.pos))
            .chain(m.funcs.iter().map(|f| ("function", f.name.as_str(), f.pos)))
            .chain(m.components.iter().map(|c| ("component", c.name.as_str(), c.pos)));
        for (kind, name, pos) in decls {
            // types and functions share one namespace; components have their own
            let ns = if kind == "component" { "component" } else { "value" };
            if seen.iter().any(|(n, k)| *n == name && *k == ns) {
                errors.push(ParseError::DuplicateDefinition {
                    name: name.to_string(),
                    pos,
                });
            } else {
                seen.push((name, ns));
            }
        }
        if errors.is_empty() {
            Ok(m)
        } else {
            Err(errors)
        }
    }

    fn model_inner(&mut self) -> PResult<Model> {
        let pos = self.expect_kw("model")?;
        let (name, _) = self.expect_ident()?;
        self.expect_sym("{")?;
        let mut m = Model {
            name,
            types: Vec::new(),
            funcs: Vec::new(),
            components: Vec::new(),
            pos,
        };
        loop {
            if self.eat_sym("}") {
                break;
            } else if self.is_kw("type") {
                m.types.push(self.type_def()?);
            } else if self.is_kw("func") {
                m.funcs.push(self.func_def()?);
            } else if self.is_kw("component") {
                m.components.push(self.component()?);
            } else {
                return Err(self.error(&["`type`", "`func`", "`component`", "`}`"]));
            }
        }
        self.expect_eof()?;
        Ok(m)
    }

    fn type_expr(&mut self) -> PResult<TypeExpr> {
        if self.eat_kw("Bool") {
            Ok(TypeExpr::Bool)
        } else if self.eat_kw("Int") {
            if self.eat_sym("[") {
                let lo = self.signed_int()?;
                self.expect_sym("..")?;
                let hi = self.signed_int()?;
                self.expect_sym("]")?;
                Ok(TypeExpr::IntRange(lo, hi))
            } else {
                Ok(TypeExpr::Int)
            }
        } else {
            match self.peek().clone() {
                Tok::Ident(n) => {
                    self.bump();
                    Ok(TypeExpr::Named(n))
                }
                _ => Err(self.error(&["type"])),
            }
        }
    }

    fn comma_list<T>(
        &mut self,
        close: &str,
        mut item: impl FnMut(&mut Self) -> PResult<T>,
    ) -> PResult<Vec<T>> {
        let mut out = Vec::new();
        if self.eat_sym(close) {
            return Ok(out);
        }
        loop {
            out.push(item(self)?);
            if self.eat_sym(",") {
                if self.eat_sym(close) {
                    return Ok(out);
                }
                continue;
            }
            self.expect_sym(close)?;
            return Ok(out);
        }
    }

    fn type_def(&mut self) -> PResult<TypeDef> {
        let pos = self.expect_kw("type")?;
        let (name, _) = self.expect_ident()?;
        self.expect_sym("=")?;
        let kind = if self.eat_kw("enum") {
            self.expect_sym("{")?;
            TypeDefKind::Enum(self.comma_list("}", |p| Ok(p.expect_ident()?.0))?)
        } else if self.eat_kw("variant") {
            self.expect_sym("{")?;
            TypeDefKind::Variant(self.comma_list("}", |p| {
                let (name, _) = p.expect_ident()?;
                let fields = if p.eat_sym("(") {
                    p.comma_list(")", |p| p.type_expr())?
                } else {
                    Vec::new()
                };
                Ok(CtorDef { name, fields })
            })?)
        } else if self.eat_kw("record") {
            self.expect_sym("{")?;
            TypeDefKind::Record(self.comma_list("}", |p| {
                let (name, _) = p.expect_ident()?;
                p.expect_sym(":")?;
                Ok(FieldDef {
                    name,
                    ty: p.type_expr()?,
                })
            })?)
        } else if self.is_kw("Bool") || self.is_kw("Int") {
            match self.type_expr()? {
                TypeExpr::Bool => TypeDefKind::Bool,
                TypeExpr::Int => TypeDefKind::BoundedInt {
                    lo: crate::model::types::INT_MIN,
                    hi: crate::model::types::INT_MAX,
                },
                TypeExpr::IntRange(lo, hi) => TypeDefKind::BoundedInt { lo, hi },
                TypeExpr::Named(_) => unreachable!(),
            }
        } else {
            return Err(self.error(&["`enum`", "`variant`", "`record`", "`Bool`", "`Int`"]));
        };
        Ok(TypeDef { name, kind, pos })
    }

    fn func_def(&mut self) -> PResult<FuncDef> {
        let pos = self.expect_kw("func")?;
        let (name, _) = self.expect_ident()?;
        self.expect_sym("(")?;
        let params = self.comma_list(")", |p| {
            let (n, _) = p.expect_ident()?;
            p.expect_sym(":")?;
            Ok((n, p.type_expr()?))
        })?;
        self.expect_sym(":")?;
        let ret = self.type_expr()?;
        self.expect_sym("=")?;
        let body = self.expr()?;
        Ok(FuncDef {
            name,
            params,
            ret,
            body,
            pos,
        })
    }

    fn component(&mut self) -> PResult<ComponentDef> {
        let pos = self.expect_kw("component")?;
        let (name, _) = self.expect_ident()?;
        self.expect_sym("{")?;
        let mut ports = Vec::new();
        let mut causality = None;
        let mut behavior: Option<BehaviorDef> = None;
        let mut composite = CompositeDef {
            subs: Vec::new(),
            channels: Vec::new(),
            delegations: Vec::new(),
        };
        let mut is_composite = false;
        loop {
            let item_pos = self.pos();
            if self.eat_sym("}") {
                break;
            } else if self.is_kw("in") || self.is_kw("out") {
                let dir = if self.eat_kw("in") {
                    Direction::In
                } else {
                    self.bump();
                    Direction::Out
                };
                let (pname, _) = self.expect_ident()?;
                self.expect_sym(":")?;
                let ty = self.type_expr()?;
                self.expect_kw("init")?;
                let init = self.value_lit()?;
                ports.push(PortDecl {
                    name: pname,
                    dir,
                    ty,
                    init,
                    pos: item_pos,
                });
            } else if self.eat_kw("causality") {
                if causality.is_some() {
                    return Err(ParseError::Syntax {
                        pos: item_pos,
                        expected: vec!["a single causality declaration".into()],
                        found: "`causality`".into(),
                    });
                }
                causality = Some(if self.eat_kw("weak") {
                    Causality::Weak
                } else if self.eat_kw("strong") {
                    Causality::Strong
                } else {
                    return Err(self.error(&["`weak`", "`strong`"]));
                });
            } else if self.is_kw("automaton") || self.is_kw("table") {
                if behavior.is_some() || is_composite {
                    return Err(self.error(&["a single behavior"]));
                }
                behavior = Some(if self.eat_kw("automaton") {
                    BehaviorDef::Automaton(self.automaton()?)
                } else {
                    self.bump();
                    BehaviorDef::Table(self.table()?)
                });
            } else if self.is_kw("sub") || self.is_kw("channel") || self.is_kw("delegate") {
                if behavior.is_some() {
                    return Err(self.error(&["a single behavior"]));
                }
                is_composite = true;
                if self.eat_kw("sub") {
                    let (sname, _) = self.expect_ident()?;
                    self.expect_sym(":")?;
                    let (cname, _) = self.expect_ident()?;
                    composite.subs.push(SubDecl {
                        name: sname,
                        component: cname,
                        pos: item_pos,
                    });
                } else {
                    let is_channel = self.eat_kw("channel");
                    if !is_channel {
                        self.bump();
                    }
                    let from = self.endpoint()?;
                    self.expect_sym("->")?;
                    let to = self.endpoint()?;
                    let c = Connection {
                        from,
                        to,
                        pos: item_pos,
                    };
                    if is_channel {
                        composite.channels.push(c);
                    } else {
                        composite.delegations.push(c);
                    }
                }
            } else {
                return Err(self.error(&[
                    "`in`",
                    "`out`",
                    "`causality`",
                    "`automaton`",
                    "`table`",
                    "`sub`",
                    "`channel`",
                    "`delegate`",
                    "`}`",
                ]));
            }
        }
        let end = self.toks[self.i - 1].pos;
        let causality = causality.ok_or_else(|| ParseError::Syntax {
            pos: end,
            expected: vec!["`causality`".into()],
            found: "`}`".into(),
        })?;
        let behavior = match (behavior, is_composite) {
            (Some(b), _) => b,
            (None, true) => BehaviorDef::Composite(composite),
            (None, false) => {
                return Err(ParseError::Syntax {
                    pos: end,
                    expected: vec!["`automaton`".into(), "`table`".into(), "`sub`".into()],
                    found: "`}`".into(),
                })
            }
        };
        Ok(ComponentDef {
            name,
            ports,
            causality,
            behavior,
            pos,
        })
    }

    fn endpoint(&mut self) -> PResult<Endpoint> {
        let (a, _) = self.expect_ident()?;
        if self.eat_sym(".") {
            let (b, _) = self.expect_ident()?;
            Ok(Endpoint {
                instance: Some(a),
                port: b,
            })
        } else {
            Ok(Endpoint {
                instance: None,
                port: a,
            })
        }
    }

    fn automaton(&mut self) -> PResult<AutomatonDef> {
        self.expect_sym("{")?;
        let mut a = AutomatonDef {
            states: Vec::new(),
            vars: Vec::new(),
            transitions: Vec::new(),
        };
        loop {
            let pos = self.pos();
            if self.eat_sym("}") {
                return Ok(a);
            } else if self.eat_kw("states") {
                loop {
                    let (name, _) = self.expect_ident()?;
                    let initial = self.eat_kw("init");
                    a.states.push(StateDecl { name, initial });
                    if !self.eat_sym(",") {
                        break;
                    }
                }
            } else if self.eat_kw("var") {
                let (name, _) = self.expect_ident()?;
                self.expect_sym(":")?;
                let ty = self.type_expr()?;
                self.expect_kw("init")?;
                let init = self.value_lit()?;
                a.vars.push(VarDecl { name, ty, init, pos });
            } else if self.eat_kw("transition") {
                let (source, _) = self.expect_ident()?;
                self.expect_sym("->")?;
                let (target, _) = self.expect_ident()?;
                let inputs = if self.eat_kw("when") {
                    self.patterns()?
                } else {
                    Vec::new()
                };
                let guard = if self.eat_kw("with") {
                    Some(self.expr()?)
                } else {
                    None
                };
                let mut effects = Vec::new();
                if self.eat_kw("then") {
                    loop {
                        let (name, _) = self.expect_ident()?;
                        if self.eat_sym(":=") {
                            effects.push(EffectDef::Assign {
                                var: name,
                                value: self.expr()?,
                            });
                        } else {
                            self.expect_sym("=")?;
                            effects.push(EffectDef::Output {
                                port: name,
                                value: self.expr_or_absent()?,
                            });
                        }
                        if !self.eat_sym(",") {
                            break;
                        }
                    }
                }
                a.transitions.push(TransitionDef {
                    source,
                    target,
                    inputs,
                    guard,
                    effects,
                    pos,
                });
            } else {
                return Err(self.error(&["`states`", "`var`", "`transition`", "`}`"]));
            }
        }
    }

    fn table(&mut self) -> PResult<TableDef> {
        self.expect_sym("{")?;
        let mut rows = Vec::new();
        loop {
            let pos = self.pos();
            if self.eat_sym("}") {
                return Ok(TableDef { rows });
            }
            self.expect_kw("row")?;
            let inputs = if self.eat_kw("when") {
                self.patterns()?
            } else {
                Vec::new()
            };
            let guard = if self.eat_kw("with") {
                Some(self.expr()?)
            } else {
                None
            };
            let mut outputs = Vec::new();
            if self.eat_kw("then") {
                loop {
                    let (name, _) = self.expect_ident()?;
                    self.expect_sym("=")?;
                    outputs.push((name, self.expr_or_absent()?));
                    if !self.eat_sym(",") {
                        break;
                    }
                }
            }
            rows.push(TableRow {
                inputs,
                guard,
                outputs,
                pos,
            });
        }
    }

    /// `-` alone means absence; `-` followed by an operand is negation.
    fn expr_or_absent(&mut self) -> PResult<Option<Expr>> {
        if self.is_sym("-") && !self.starts_operand(1) {
            self.bump();
            Ok(None)
        } else {
            Ok(Some(self.expr()?))
        }
    }

    fn starts_operand(&self, n: usize) -> bool {
        match self.peek_at(n) {
            Tok::Ident(_) | Tok::Int(_) => true,
            Tok::Kw(k) => matches!(*k, "if" | "match" | "true" | "false" | "not"),
            Tok::Sym(s) => matches!(*s, "(" | "-" | "@"),
            Tok::Eof => false,
        }
    }

    fn patterns(&mut self) -> PResult<Vec<InputPattern>> {
        let mut out = Vec::new();
        loop {
            let (port, _) = self.expect_ident()?;
            let pat = if self.eat_sym("?") {
                match self.peek().clone() {
                    Tok::Ident(v) => {
                        self.bump();
                        PatternDef::Bind(v)
                    }
                    _ => PatternDef::Wildcard,
                }
            } else {
                self.expect_sym("=")?;
                if self.is_sym("-") && !matches!(self.peek_at(1), Tok::Int(_)) {
                    self.bump();
                    PatternDef::Absent
                } else {
                    PatternDef::Literal(self.value_lit()?)
                }
            };
            out.push(InputPattern { port, pat });
            if !self.eat_sym(",") {
                return Ok(out);
            }
        }
    }

    pub(crate) fn value_lit(&mut self) -> PResult<ValueLit> {
        match self.peek().clone() {
            Tok::Sym("-") | Tok::Int(_) => Ok(ValueLit::Int(self.signed_int()?)),
            Tok::Kw("true") => {
                self.bump();
                Ok(ValueLit::Bool(true))
            }
            Tok::Kw("false") => {
                self.bump();
                Ok(ValueLit::Bool(false))
            }
            Tok::Ident(n) => {
                self.bump();
                let args = if self.eat_sym("(") {
                    self.comma_list(")", |p| p.value_lit())?
                } else {
                    Vec::new()
                };
                Ok(ValueLit::Ctor(n, args))
            }
            Tok::Sym("{") => {
                self.bump();
                Ok(ValueLit::Record(self.comma_list("}", |p| {
                    let (f, _) = p.expect_ident()?;
                    p.expect_sym("=")?;
                    Ok((f, p.value_lit()?))
                })?))
            }
            _ => Err(self.error(&["value"])),
        }
    }

    // ----- expressions --------------------------------------------------

    pub(crate) fn expr(&mut self) -> PResult<Expr> {
        self.expr_ns(false)
    }

    fn expr_ns(&mut self, no_struct: bool) -> PResult<Expr> {
        self.or_expr(no_struct)
    }

    fn or_expr(&mut self, ns: bool) -> PResult<Expr> {
        let mut l = self.and_expr(ns)?;
        while self.is_kw("or") {
            let pos = self.bump().pos;
            let r = self.and_expr(ns)?;
            l = Expr::new(ExprKind::Binary(BinOp::Or, Box::new(l), Box::new(r)), pos);
        }
        Ok(l)
    }

    fn and_expr(&mut self, ns: bool) -> PResult<Expr> {
        let mut l = self.not_expr(ns)?;
        while self.is_kw("and") {
            let pos = self.bump().pos;
            let r = self.not_expr(ns)?;
            l = Expr::new(ExprKind::Binary(BinOp::And, Box::new(l), Box::new(r)), pos);
        }
        Ok(l)
    }

    fn not_expr(&mut self, ns: bool) -> PResult<Expr> {
        if self.is_kw("not") {
            let pos = self.bump().pos;
            let e = self.not_expr(ns)?;
            return Ok(Expr::new(ExprKind::Unary(UnOp::Not, Box::new(e)), pos));
        }
        self.cmp_expr(ns)
    }

    fn cmp_expr(&mut self, ns: bool) -> PResult<Expr> {
        let l = self.add_expr(ns)?;
        let op = match self.peek() {
            Tok::Sym("=") => BinOp::Eq,
            Tok::Sym("!=") => BinOp::Ne,
            Tok::Sym("<") => BinOp::Lt,
            Tok::Sym("<=") => BinOp::Le,
            Tok::Sym(">") => BinOp::Gt,
            Tok::Sym(">=") => BinOp::Ge,
            _ => return Ok(l),
        };
        let pos = self.bump().pos;
        let r = self.add_expr(ns)?;
        Ok(Expr::new(ExprKind::Binary(op, Box::new(l), Box::new(r)), pos))
    }

    fn add_expr(&mut self, ns: bool) -> PResult<Expr> {
        let mut l = self.mul_expr(ns)?;
        loop {
            let op = match self.peek() {
                Tok::Sym("+") => BinOp::Add,
                Tok::Sym("-") => BinOp::Sub,
                _ => return Ok(l),
            };
            let pos = self.bump().pos;
            let r = self.mul_expr(ns)?;
            l = Expr::new(ExprKind::Binary(op, Box::new(l), Box::new(r)), pos);
        }
    }

    fn mul_expr(&mut self, ns: bool) -> PResult<Expr> {
        let mut l = self.unary_expr(ns)?;
        loop {
            let op = match self.peek() {
                Tok::Sym("*") => BinOp::Mul,
                Tok::Kw("div") => BinOp::Div,
                Tok::Kw("mod") => BinOp::Mod,
                _ => return Ok(l),
            };
            let pos = self.bump().pos;
            let r = self.unary_expr(ns)?;
            l = Expr::new(ExprKind::Binary(op, Box::new(l), Box::new(r)), pos);
        }
    }

    fn unary_expr(&mut self, ns: bool) -> PResult<Expr> {
        if self.is_sym("-") {
            let pos = self.bump().pos;
            if let Tok::Int(v) = *self.peek() {
                self.bump();
                return self.postfix(Expr::new(ExprKind::Int(-v), pos));
            }
            let e = self.unary_expr(ns)?;
            return Ok(Expr::new(ExprKind::Unary(UnOp::Neg, Box::new(e)), pos));
        }
        let p = self.primary(ns)?;
        self.postfix(p)
    }

    fn postfix(&mut self, mut e: Expr) -> PResult<Expr> {
        while self.is_sym(".") {
            let pos = self.bump().pos;
            let (f, _) = self.expect_ident()?;
            e = Expr::new(ExprKind::Field(Box::new(e), f), pos);
        }
        Ok(e)
    }

    fn primary(&mut self, ns: bool) -> PResult<Expr> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(Expr::new(ExprKind::Int(v), pos))
            }
            Tok::Kw("true") => {
                self.bump();
                Ok(Expr::new(ExprKind::Bool(true), pos))
            }
            Tok::Kw("false") => {
                self.bump();
                Ok(Expr::new(ExprKind::Bool(false), pos))
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Kw("if") => {
                self.bump();
                let c = self.expr()?;
                self.expect_kw("then")?;
                let t = self.expr()?;
                self.expect_kw("else")?;
                let e = self.expr_ns(ns)?;
                Ok(Expr::new(ExprKind::If(Box::new(c), Box::new(t), Box::new(e)), pos))
            }
            Tok::Kw("match") => {
                self.bump();
                let scrut = self.expr_ns(true)?;
                self.expect_sym("{")?;
                let arms = self.comma_list("}", |p| {
                    let (head, _) = p.expect_ident()?;
                    let pat = if head == "_" {
                        MatchPat::Wildcard
                    } else {
                        let binds = if p.eat_sym("(") {
                            p.comma_list(")", |p| {
                                let (b, _) = p.expect_ident()?;
                                Ok(if b == "_" { None } else { Some(b) })
                            })?
                        } else {
                            Vec::new()
                        };
                        MatchPat::Ctor(head, binds)
                    };
                    p.expect_sym("=>")?;
                    Ok(MatchArm {
                        pat,
                        body: p.expr()?,
                    })
                })?;
                Ok(Expr::new(ExprKind::Match(Box::new(scrut), arms), pos))
            }
            Tok::Sym("@") => {
                self.bump();
                let mut path = vec![self.expect_ident()?.0];
                while self.eat_sym(".") {
                    path.push(self.expect_ident()?.0);
                }
                Ok(Expr::new(ExprKind::StateRef(path), pos))
            }
            Tok::Ident(name) => {
                self.bump();
                if self.eat_sym("(") {
                    let args = self.comma_list(")", |p| p.expr())?;
                    Ok(Expr::new(ExprKind::Call(name, args), pos))
                } else if !ns && self.is_sym("{") {
                    self.bump();
                    let fields = self.comma_list("}", |p| {
                        let (f, _) = p.expect_ident()?;
                        p.expect_sym("=")?;
                        Ok((f, p.expr()?))
                    })?;
                    Ok(Expr::new(ExprKind::Record(name, fields), pos))
                } else if self.eat_sym("?") {
                    Ok(Expr::new(ExprKind::Present(name), pos))
                } else {
                    Ok(Expr::new(ExprKind::Name(name), pos))
                }
            }
            _ => Err(self.error(&["expression"])),
        }
    }
}
