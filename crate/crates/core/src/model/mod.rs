//! Abstract syntax, value domain and expression semantics shared by every
//! stage of the toolchain.

pub mod ast;
pub mod eval;
pub mod ir;
pub mod types;
pub mod value;

use ast::{FuncDef, Model, Pos, TypeDef, TypeDefKind};

pub use eval::{eval_expr, match_pattern, EvalError, Frame};
pub use types::{Ty, TypeTable};
pub use value::{Message, Value};

/// A top-level definition found by [`resolve`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Definition<'a> {
    /// `Bool` or `Int`, which every model has.
    Builtin(TypeDef),
    Type(&'a TypeDef),
    Func(&'a FuncDef),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ResolveError {
    #[error("`{0}` is not defined")]
    NotFound(String),
    #[error("`{0}` is defined more than once")]
    Ambiguous(String),
}

/// Look up a type or function definition by name.
pub fn resolve<'a>(model: &'a Model, name: &str) -> Result<Definition<'a>, ResolveError> {
    let builtin = match name {
        "Bool" => Some(TypeDefKind::Bool),
        "Int" => Some(TypeDefKind::BoundedInt {
            lo: types::INT_MIN,
            hi: types::INT_MAX,
        }),
        _ => None,
    };
    let mut found: Vec<Definition<'a>> = model
        .types
        .iter()
        .filter(|t| t.name == name)
        .map(Definition::Type)
        .chain(model.funcs.iter().filter(|f| f.name == name).map(Definition::Func))
        .collect();
    if let Some(kind) = builtin {
        found.push(Definition::Builtin(TypeDef {
            name: name.to_string(),
            kind,
            pos: Pos::default(),
        }));
    }
    match found.len() {
        0 => Err(ResolveError::NotFound(name.to_string())),
        1 => Ok(found.pop().unwrap()),
        _ => Err(ResolveError::Ambiguous(name.to_string())),
    }
}
