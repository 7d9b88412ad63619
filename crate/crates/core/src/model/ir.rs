//! Resolved, type-checked form of a model.
//!
//! A [`Program`] only exists for models that pass every static check; the
//! simulator, the verification engines and the code generator all consume
//! it. Variables are addressed by frame slot, types by [`TypeId`],
//! functions by [`FuncId`] and component definitions by [`CompId`].

use super::ast::{BinOp, Causality, UnOp};
use super::types::{Ty, TypeId, TypeTable};
use super::value::Value;

pub type Slot = u32;
pub type FuncId = u32;
pub type CompId = u32;
pub type InstId = u32;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TExpr {
    pub kind: ExprKind,
    pub ty: Ty,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExprKind {
    Lit(Value),
    Var(Slot),
    Call(FuncId, Vec<TExpr>),
    Ctor {
        ty: TypeId,
        tag: u32,
        args: Vec<TExpr>,
    },
    Record {
        ty: TypeId,
        fields: Vec<TExpr>,
    },
    Field(Box<TExpr>, u32),
    /// Range check of an integer stored into a narrower location (payload
    /// or record field); `ty` of the node is the location type.
    Narrow(Box<TExpr>),
    Match {
        scrut: Box<TExpr>,
        arms: Vec<Arm>,
    },
    If(Box<TExpr>, Box<TExpr>, Box<TExpr>),
    Unary(UnOp, Box<TExpr>),
    Binary(BinOp, Box<TExpr>, Box<TExpr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arm {
    /// Constructor tag, `None` for a wildcard arm.
    pub tag: Option<u32>,
    /// Slot receiving each payload field; `None` discards it.
    pub binds: Vec<Option<Slot>>,
    pub body: TExpr,
}

impl TExpr {
    pub fn lit(v: Value, ty: Ty) -> TExpr {
        TExpr {
            kind: ExprKind::Lit(v),
            ty,
        }
    }

    /// Visit this node and all sub-expressions, parents first.
    pub fn walk(&self, f: &mut impl FnMut(&TExpr)) {
        f(self);
        match &self.kind {
            ExprKind::Lit(_) | ExprKind::Var(_) => {}
            ExprKind::Call(_, args) => args.iter().for_each(|a| a.walk(f)),
            ExprKind::Ctor { args, .. } => args.iter().for_each(|a| a.walk(f)),
            ExprKind::Record { fields, .. } => fields.iter().for_each(|a| a.walk(f)),
            ExprKind::Field(e, _) | ExprKind::Unary(_, e) | ExprKind::Narrow(e) => e.walk(f),
            ExprKind::Match { scrut, arms } => {
                scrut.walk(f);
                arms.iter().for_each(|a| a.body.walk(f));
            }
            ExprKind::If(c, t, e) => {
                c.walk(f);
                t.walk(f);
                e.walk(f);
            }
            ExprKind::Binary(_, l, r) => {
                l.walk(f);
                r.walk(f);
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Func {
    pub name: String,
    pub params: Vec<(String, Ty)>,
    pub ret: Ty,
    pub body: TExpr,
    /// Frame layout; the first `params.len()` slots hold the arguments.
    pub slots: Vec<Ty>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Port {
    pub name: String,
    pub ty: Ty,
    pub init: Value,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Pattern {
    /// Port not mentioned: matches anything.
    DontCare,
    /// `p?`: any present message.
    Wildcard,
    Absent,
    Literal(Value),
    Bind(Slot),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Effect {
    Emit { port: u32, value: Option<TExpr> },
    Assign { var: u32, value: TExpr },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub source: u32,
    pub target: u32,
    /// One pattern per input port, in port order.
    pub patterns: Vec<Pattern>,
    pub guard: Option<TExpr>,
    /// In written order; evaluation follows this order.
    pub effects: Vec<Effect>,
    pub line: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateVar {
    pub name: String,
    pub ty: Ty,
    pub init: Value,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Automaton {
    pub states: Vec<String>,
    pub initial: u32,
    pub vars: Vec<StateVar>,
    pub transitions: Vec<Transition>,
    /// Frame layout; slot `i < vars.len()` holds state variable `i`.
    pub slots: Vec<Ty>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableRow {
    pub patterns: Vec<Pattern>,
    pub guard: Option<TExpr>,
    pub outputs: Vec<(u32, Option<TExpr>)>,
    pub line: u32,
}

/// A stateless function specification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionTable {
    pub rows: Vec<TableRow>,
    pub slots: Vec<Ty>,
}

impl FunctionTable {
    /// The equivalent automaton: one control state, no variables, one
    /// self-loop per row.
    pub fn to_automaton(&self) -> Automaton {
        Automaton {
            states: vec!["Main".to_string()],
            initial: 0,
            vars: Vec::new(),
            transitions: self
                .rows
                .iter()
                .map(|r| Transition {
                    source: 0,
                    target: 0,
                    patterns: r.patterns.clone(),
                    guard: r.guard.clone(),
                    effects: r
                        .outputs
                        .iter()
                        .map(|(p, e)| Effect::Emit {
                            port: *p,
                            value: e.clone(),
                        })
                        .collect(),
                    line: r.line,
                })
                .collect(),
            slots: self.slots.clone(),
        }
    }
}

/// A port reference inside a composite: `None` is the composite itself.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PortRef {
    pub sub: Option<u32>,
    pub port: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Link {
    pub from: PortRef,
    pub to: PortRef,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sub {
    pub name: String,
    pub comp: CompId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Composite {
    pub subs: Vec<Sub>,
    pub channels: Vec<Link>,
    pub delegations: Vec<Link>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Behavior {
    Automaton(Automaton),
    /// A table together with its derived automaton, which is what gets
    /// executed.
    Table(FunctionTable, Automaton),
    Composite(Composite),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub name: String,
    pub inputs: Vec<Port>,
    pub outputs: Vec<Port>,
    pub causality: Causality,
    pub behavior: Behavior,
}

impl Component {
    /// The executable automaton of an atomic component.
    pub fn automaton(&self) -> Option<&Automaton> {
        match &self.behavior {
            Behavior::Automaton(a) | Behavior::Table(_, a) => Some(a),
            Behavior::Composite(_) => None,
        }
    }

    pub fn is_atomic(&self) -> bool {
        !matches!(self.behavior, Behavior::Composite(_))
    }

    pub fn input_index(&self, name: &str) -> Option<u32> {
        self.inputs.iter().position(|p| p.name == name).map(|i| i as u32)
    }

    pub fn output_index(&self, name: &str) -> Option<u32> {
        self.outputs.iter().position(|p| p.name == name).map(|i| i as u32)
    }
}

/// Where an atomic input (or a root output) gets its message each tick.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Source {
    RootInput(u32),
    Output { inst: InstId, port: u32 },
    Unconnected,
}

/// One atomic component instance of the flattened hierarchy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    /// Dotted sub-instance names below the root; the component name for an
    /// atomic root.
    pub path: String,
    pub comp: CompId,
    pub inputs: Vec<Source>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Network {
    pub instances: Vec<Instance>,
    pub root_outputs: Vec<Source>,
    /// Topological order of the instantaneous-dependency graph.
    pub schedule: Vec<InstId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub name: String,
    pub types: TypeTable,
    /// Callees precede callers.
    pub funcs: Vec<Func>,
    pub components: Vec<Component>,
    pub root: CompId,
    pub network: Network,
}

impl Program {
    pub fn root(&self) -> &Component {
        &self.components[self.root as usize]
    }

    pub fn component_of(&self, inst: InstId) -> &Component {
        &self.components[self.network.instances[inst as usize].comp as usize]
    }

    pub fn automaton_of(&self, inst: InstId) -> &Automaton {
        self.component_of(inst)
            .automaton()
            .expect("flattened instances are atomic")
    }

    pub fn instance_by_path(&self, path: &str) -> Option<InstId> {
        self.network
            .instances
            .iter()
            .position(|i| i.path == path)
            .map(|i| i as InstId)
    }

    /// Component definitions in dependency order: every composite after
    /// the components it instantiates.
    pub fn components_bottom_up(&self) -> Vec<CompId> {
        fn visit(p: &Program, c: CompId, seen: &mut Vec<bool>, out: &mut Vec<CompId>) {
            if seen[c as usize] {
                return;
            }
            seen[c as usize] = true;
            if let Behavior::Composite(comp) = &p.components[c as usize].behavior {
                for s in &comp.subs {
                    visit(p, s.comp, seen, out);
                }
            }
            out.push(c);
        }
        let mut seen = vec![false; self.components.len()];
        let mut out = Vec::new();
        visit(self, self.root, &mut seen, &mut out);
        out
    }
}
