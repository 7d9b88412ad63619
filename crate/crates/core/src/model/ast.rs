//! Surface syntax of `.syn` models.
//!
//! The AST is produced by the parser and consumed by the static checks,
//! which resolve names and lower it into [`crate::model::ir::Program`].
//! Nothing here is resolved: types, functions, ports and states are
//! referenced by name.

use std::fmt;

/// A 1-based source position.
///
/// Positions never take part in equality, so two ASTs that differ only in
/// layout compare equal.
#[derive(Clone, Copy, Debug, Default, Hash)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl Pos {
    pub fn new(line: u32, col: u32) -> Self {
        Pos { line, col }
    }
}

impl PartialEq for Pos {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Pos {}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Model {
    pub name: String,
    pub types: Vec<TypeDef>,
    pub funcs: Vec<FuncDef>,
    pub components: Vec<ComponentDef>,
    pub pos: Pos,
}

impl Model {
    pub fn component(&self, name: &str) -> Option<&ComponentDef> {
        self.components.iter().find(|c| c.name == name)
    }

    /// Components that no other component instantiates. A well-formed model
    /// has exactly one.
    pub fn root_candidates(&self) -> Vec<&ComponentDef> {
        self.components
            .iter()
            .filter(|c| {
                !self.components.iter().any(|p| match &p.behavior {
                    BehaviorDef::Composite(comp) => comp.subs.iter().any(|s| s.component == c.name),
                    _ => false,
                })
            })
            .collect()
    }

    /// The root component, if it is unambiguous.
    pub fn root(&self) -> Option<&ComponentDef> {
        match self.root_candidates().as_slice() {
            [one] => Some(one),
            _ => None,
        }
    }
}

/// A type as written at a use site.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TypeExpr {
    Bool,
    /// Bare `Int`, the full 32-bit signed range.
    Int,
    IntRange(i64, i64),
    Named(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeDef {
    pub name: String,
    pub kind: TypeDefKind,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypeDefKind {
    Bool,
    BoundedInt { lo: i64, hi: i64 },
    Enum(Vec<String>),
    Variant(Vec<CtorDef>),
    Record(Vec<FieldDef>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CtorDef {
    pub name: String,
    pub fields: Vec<TypeExpr>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldDef {
    pub name: String,
    pub ty: TypeExpr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FuncDef {
    pub name: String,
    pub params: Vec<(String, TypeExpr)>,
    pub ret: TypeExpr,
    pub body: Expr,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expr {
    pub kind: ExprKind,
    pub pos: Pos,
}

impl Expr {
    pub fn new(kind: ExprKind, pos: Pos) -> Self {
        Expr { kind, pos }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "div",
            BinOp::Mod => "mod",
            BinOp::Eq => "=",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "and",
            BinOp::Or => "or",
        }
    }

    /// Binding strength; higher binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div | BinOp::Mod => 6,
        }
    }

    pub fn is_comparison(self) -> bool {
        self.precedence() == 4
    }

    pub fn is_arithmetic(self) -> bool {
        self.precedence() >= 5
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExprKind {
    Int(i64),
    Bool(bool),
    /// A variable, an enum literal or a nullary constructor.
    Name(String),
    /// A function call or a constructor application.
    Call(String, Vec<Expr>),
    Record(String, Vec<(String, Expr)>),
    Field(Box<Expr>, String),
    Match(Box<Expr>, Vec<MatchArm>),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// `port?`, only meaningful in glossary conditions.
    Present(String),
    /// `@inst.path.State` or `@inst.path.var`, only meaningful in glossary conditions.
    StateRef(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchArm {
    pub pat: MatchPat,
    pub body: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MatchPat {
    Wildcard,
    /// Constructor with one binder per payload field; `None` is `_`.
    Ctor(String, Vec<Option<String>>),
}

/// A constant written in canonical value syntax (port initial values,
/// literal patterns, stimulus cells).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ValueLit {
    Int(i64),
    Bool(bool),
    Ctor(String, Vec<ValueLit>),
    Record(Vec<(String, ValueLit)>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    In,
    Out,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Causality {
    Weak,
    Strong,
}

impl fmt::Display for Causality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Causality::Weak => "weak",
            Causality::Strong => "strong",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PortDecl {
    pub name: String,
    pub dir: Direction,
    pub ty: TypeExpr,
    pub init: ValueLit,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentDef {
    pub name: String,
    pub ports: Vec<PortDecl>,
    pub causality: Causality,
    pub behavior: BehaviorDef,
    pub pos: Pos,
}

impl ComponentDef {
    pub fn port(&self, name: &str) -> Option<&PortDecl> {
        self.ports.iter().find(|p| p.name == name)
    }

    pub fn inputs(&self) -> impl Iterator<Item = &PortDecl> {
        self.ports.iter().filter(|p| p.dir == Direction::In)
    }

    pub fn outputs(&self) -> impl Iterator<Item = &PortDecl> {
        self.ports.iter().filter(|p| p.dir == Direction::Out)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BehaviorDef {
    Automaton(AutomatonDef),
    Table(TableDef),
    Composite(CompositeDef),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AutomatonDef {
    pub states: Vec<StateDecl>,
    pub vars: Vec<VarDecl>,
    pub transitions: Vec<TransitionDef>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateDecl {
    pub name: String,
    pub initial: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarDecl {
    pub name: String,
    pub ty: TypeExpr,
    pub init: ValueLit,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionDef {
    pub source: String,
    pub target: String,
    pub inputs: Vec<InputPattern>,
    pub guard: Option<Expr>,
    pub effects: Vec<EffectDef>,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InputPattern {
    pub port: String,
    pub pat: PatternDef,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PatternDef {
    /// `p?`: any present message.
    Wildcard,
    /// `p = -`
    Absent,
    /// `p = <value>`
    Literal(ValueLit),
    /// `p?x`
    Bind(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EffectDef {
    /// `out = expr` or `out = -`
    Output { port: String, value: Option<Expr> },
    /// `var := expr`
    Assign { var: String, value: Expr },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableDef {
    pub rows: Vec<TableRow>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableRow {
    pub inputs: Vec<InputPattern>,
    pub guard: Option<Expr>,
    pub outputs: Vec<(String, Option<Expr>)>,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompositeDef {
    pub subs: Vec<SubDecl>,
    pub channels: Vec<Connection>,
    pub delegations: Vec<Connection>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubDecl {
    pub name: String,
    pub component: String,
    pub pos: Pos,
}

/// `inst.port`, or a bare `port` of the enclosing component.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Endpoint {
    pub instance: Option<String>,
    pub port: String,
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.instance {
            Some(i) => write!(f, "{}.{}", i, self.port),
            None => f.write_str(&self.port),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Connection {
    pub from: Endpoint,
    pub to: Endpoint,
    pub pos: Pos,
}
