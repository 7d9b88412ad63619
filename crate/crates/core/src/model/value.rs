//! Runtime values, per-tick messages and their canonical text form.
//!
//! The rendering here is shared verbatim by trace files, stimulus files and
//! the generated C harness: integers in base 10, `true`/`false`, enum
//! literals by name, `Ctor` or `Ctor(v1,v2)` for variants, `{f1=v1,f2=v2}`
//! for records and `-` for an absent message.

use std::fmt;

use super::ast::ValueLit;
use super::types::{NominalKind, Ty, TypeId, TypeTable};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Bool(bool),
    Int(i64),
    /// Enum literal or variant instance; `tag` indexes the constructor.
    Ctor {
        ty: TypeId,
        tag: u32,
        args: Box<[Value]>,
    },
    /// Record instance, fields in declaration order.
    Record { ty: TypeId, fields: Box<[Value]> },
}

impl Value {
    pub fn enum_lit(ty: TypeId, tag: u32) -> Value {
        Value::Ctor {
            ty,
            tag,
            args: Box::new([]),
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn display<'a>(&'a self, types: &'a TypeTable) -> ValueDisplay<'a> {
        ValueDisplay { value: self, types }
    }

    /// A fixed, well-typed value of `ty` (false, lowest integer, first
    /// constructor with default payload).
    pub fn default_of(types: &TypeTable, ty: Ty) -> Value {
        match ty {
            Ty::Bool => Value::Bool(false),
            Ty::Int { lo, hi } => Value::Int(0i64.clamp(lo, hi)),
            Ty::Named(id) => match &types.get(id).kind {
                NominalKind::Enum(_) => Value::enum_lit(id, 0),
                NominalKind::Variant(cs) => Value::Ctor {
                    ty: id,
                    tag: 0,
                    args: cs[0]
                        .fields
                        .iter()
                        .map(|f| Value::default_of(types, *f))
                        .collect(),
                },
                NominalKind::Record(fs) => Value::Record {
                    ty: id,
                    fields: fs.iter().map(|f| Value::default_of(types, f.ty)).collect(),
                },
            },
        }
    }

    /// Whether the value inhabits `ty`, including integer ranges.
    pub fn has_type(&self, types: &TypeTable, ty: Ty) -> bool {
        match (self, ty) {
            (Value::Bool(_), Ty::Bool) => true,
            (Value::Int(i), Ty::Int { lo, hi }) => lo <= *i && *i <= hi,
            (Value::Ctor { ty: t, tag, args }, Ty::Named(id)) if *t == id => {
                let nt = types.get(id);
                (*tag as usize) < nt.ctor_count()
                    && !matches!(nt.kind, NominalKind::Record(_))
                    && nt.ctor_fields(*tag).len() == args.len()
                    && args
                        .iter()
                        .zip(nt.ctor_fields(*tag))
                        .all(|(a, f)| a.has_type(types, *f))
            }
            (Value::Record { ty: t, fields }, Ty::Named(id)) if *t == id => {
                match &types.get(id).kind {
                    NominalKind::Record(fs) => {
                        fs.len() == fields.len()
                            && fields.iter().zip(fs).all(|(v, f)| v.has_type(types, f.ty))
                    }
                    _ => false,
                }
            }
            _ => false,
        }
    }

    /// Every value of `ty` in canonical order, or `None` if there are more
    /// than `limit`.
    pub fn enumerate(types: &TypeTable, ty: Ty, limit: u64) -> Option<Vec<Value>> {
        if types.cardinality(ty) > limit {
            return None;
        }
        Some(enumerate_all(types, ty))
    }
}

fn enumerate_all(types: &TypeTable, ty: Ty) -> Vec<Value> {
    match ty {
        Ty::Bool => vec![Value::Bool(false), Value::Bool(true)],
        Ty::Int { lo, hi } => (lo..=hi).map(Value::Int).collect(),
        Ty::Named(id) => match &types.get(id).kind {
            NominalKind::Enum(l) => (0..l.len() as u32).map(|t| Value::enum_lit(id, t)).collect(),
            NominalKind::Variant(cs) => {
                let mut out = Vec::new();
                for (tag, c) in cs.iter().enumerate() {
                    for args in product(types, &c.fields) {
                        out.push(Value::Ctor {
                            ty: id,
                            tag: tag as u32,
                            args: args.into(),
                        });
                    }
                }
                out
            }
            NominalKind::Record(fs) => {
                let tys: Vec<Ty> = fs.iter().map(|f| f.ty).collect();
                product(types, &tys)
                    .into_iter()
                    .map(|fields| Value::Record {
                        ty: id,
                        fields: fields.into(),
                    })
                    .collect()
            }
        },
    }
}

fn product(types: &TypeTable, tys: &[Ty]) -> Vec<Vec<Value>> {
    let mut acc: Vec<Vec<Value>> = vec![Vec::new()];
    for ty in tys {
        let vals = enumerate_all(types, *ty);
        let mut next = Vec::with_capacity(acc.len() * vals.len());
        for prefix in &acc {
            for v in &vals {
                let mut p = prefix.clone();
                p.push(v.clone());
                next.push(p);
            }
        }
        acc = next;
    }
    acc
}

pub struct ValueDisplay<'a> {
    value: &'a Value,
    types: &'a TypeTable,
}

impl fmt::Display for ValueDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Ctor { ty, tag, args } => {
                f.write_str(self.types.get(*ty).ctor_name(*tag))?;
                if !args.is_empty() {
                    f.write_str("(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            f.write_str(",")?;
                        }
                        write!(f, "{}", a.display(self.types))?;
                    }
                    f.write_str(")")?;
                }
                Ok(())
            }
            Value::Record { ty, fields } => {
                let NominalKind::Record(sigs) = &self.types.get(*ty).kind else {
                    return Err(fmt::Error);
                };
                f.write_str("{")?;
                for (i, (v, s)) in fields.iter().zip(sigs).enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{}={}", s.name, v.display(self.types))?;
                }
                f.write_str("}")
            }
        }
    }
}

/// Per-port, per-tick content.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Message {
    #[default]
    Absent,
    Present(Value),
}

impl Message {
    pub fn is_present(&self) -> bool {
        matches!(self, Message::Present(_))
    }

    pub fn value(&self) -> Option<&Value> {
        match self {
            Message::Present(v) => Some(v),
            Message::Absent => None,
        }
    }

    pub fn display<'a>(&'a self, types: &'a TypeTable) -> MessageDisplay<'a> {
        MessageDisplay { msg: self, types }
    }
}

pub struct MessageDisplay<'a> {
    msg: &'a Message,
    types: &'a TypeTable,
}

impl fmt::Display for MessageDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.msg {
            Message::Absent => f.write_str("-"),
            Message::Present(v) => write!(f, "{}", v.display(self.types)),
        }
    }
}

/// Why a literal does not denote a value of the expected type.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum LiteralError {
    #[error("expected a value of type {expected}")]
    Mismatch { expected: String },
    #[error("{value} is outside {lo}..{hi}")]
    OutOfRange { value: i64, lo: i64, hi: i64 },
    #[error("unknown constructor `{0}`")]
    UnknownCtor(String),
    #[error("constructor `{name}` takes {expected} argument(s), got {got}")]
    Arity {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("record fields must be written in declaration order: {0}")]
    Fields(String),
}

/// Interpret a literal against the type it is supposed to inhabit.
pub fn value_from_lit(types: &TypeTable, lit: &ValueLit, ty: Ty) -> Result<Value, LiteralError> {
    let mismatch = || LiteralError::Mismatch {
        expected: types.display(ty).to_string(),
    };
    match (lit, ty) {
        (ValueLit::Bool(b), Ty::Bool) => Ok(Value::Bool(*b)),
        (ValueLit::Int(i), Ty::Int { lo, hi }) => {
            if lo <= *i && *i <= hi {
                Ok(Value::Int(*i))
            } else {
                Err(LiteralError::OutOfRange { value: *i, lo, hi })
            }
        }
        (ValueLit::Ctor(name, args), Ty::Named(id)) => {
            let nt = types.get(id);
            if matches!(nt.kind, NominalKind::Record(_)) {
                return Err(mismatch());
            }
            let tag = nt
                .ctor_tag(name)
                .ok_or_else(|| LiteralError::UnknownCtor(name.clone()))?;
            let fields = nt.ctor_fields(tag);
            if fields.len() != args.len() {
                return Err(LiteralError::Arity {
                    name: name.clone(),
                    expected: fields.len(),
                    got: args.len(),
                });
            }
            let args = args
                .iter()
                .zip(fields)
                .map(|(a, f)| value_from_lit(types, a, *f))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Value::Ctor {
                ty: id,
                tag,
                args: args.into(),
            })
        }
        (ValueLit::Record(fields), Ty::Named(id)) => {
            let NominalKind::Record(sigs) = &types.get(id).kind else {
                return Err(mismatch());
            };
            let names_match = fields.len() == sigs.len()
                && fields.iter().zip(sigs).all(|((n, _), s)| *n == s.name);
            if !names_match {
                let expected: Vec<&str> = sigs.iter().map(|s| s.name.as_str()).collect();
                return Err(LiteralError::Fields(expected.join(",")));
            }
            let vals = fields
                .iter()
                .zip(sigs)
                .map(|((_, v), s)| value_from_lit(types, v, s.ty))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Value::Record {
                ty: id,
                fields: vals.into(),
            })
        }
        _ => Err(mismatch()),
    }
}

/// Convert a value back into literal syntax.
pub fn lit_from_value(types: &TypeTable, v: &Value) -> ValueLit {
    match v {
        Value::Bool(b) => ValueLit::Bool(*b),
        Value::Int(i) => ValueLit::Int(*i),
        Value::Ctor { ty, tag, args } => ValueLit::Ctor(
            types.get(*ty).ctor_name(*tag).to_string(),
            args.iter().map(|a| lit_from_value(types, a)).collect(),
        ),
        Value::Record { ty, fields } => {
            let NominalKind::Record(sigs) = &types.get(*ty).kind else {
                unreachable!("record value of non-record type")
            };
            ValueLit::Record(
                sigs.iter()
                    .zip(fields.iter())
                    .map(|(s, f)| (s.name.clone(), lit_from_value(types, f)))
                    .collect(),
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::types::{CtorSig, FieldSig, NominalType};

    fn table() -> TypeTable {
        TypeTable {
            types: vec![
                NominalType {
                    name: "Mode".into(),
                    kind: NominalKind::Enum(vec!["Off".into(), "On".into()]),
                },
                NominalType {
                    name: "Cmd".into(),
                    kind: NominalKind::Variant(vec![
                        CtorSig {
                            name: "None".into(),
                            fields: vec![],
                        },
                        CtorSig {
                            name: "Set".into(),
                            fields: vec![Ty::Int { lo: 0, hi: 3 }, Ty::Bool],
                        },
                    ]),
                },
                NominalType {
                    name: "Pt".into(),
                    kind: NominalKind::Record(vec![
                        FieldSig {
                            name: "x".into(),
                            ty: Ty::Int { lo: -5, hi: 5 },
                        },
                        FieldSig {
                            name: "m".into(),
                            ty: Ty::Named(0),
                        },
                    ]),
                },
            ],
        }
    }

    #[test]
    fn canonical_rendering() {
        let t = table();
        let v = Value::Ctor {
            ty: 1,
            tag: 1,
            args: vec![Value::Int(2), Value::Bool(true)].into(),
        };
        assert_eq!(v.display(&t).to_string(), "Set(2,true)");
        assert_eq!(Value::Ctor { ty: 1, tag: 0, args: Box::new([]) }.display(&t).to_string(), "None");
        let r = Value::Record {
            ty: 2,
            fields: vec![Value::Int(-3), Value::enum_lit(0, 1)].into(),
        };
        assert_eq!(r.display(&t).to_string(), "{x=-3,m=On}");
        assert_eq!(Message::Absent.display(&t).to_string(), "-");
    }

    #[test]
    fn literal_conversion_checks_ranges_and_order() {
        let t = table();
        assert_eq!(
            value_from_lit(&t, &ValueLit::Int(4), Ty::Int { lo: 0, hi: 3 }),
            Err(LiteralError::OutOfRange { value: 4, lo: 0, hi: 3 })
        );
        let rec = ValueLit::Record(vec![
            ("m".into(), ValueLit::Ctor("Off".into(), vec![])),
            ("x".into(), ValueLit::Int(0)),
        ]);
        assert!(matches!(value_from_lit(&t, &rec, Ty::Named(2)), Err(LiteralError::Fields(_))));
        let ok = ValueLit::Ctor("Set".into(), vec![ValueLit::Int(3), ValueLit::Bool(false)]);
        let v = value_from_lit(&t, &ok, Ty::Named(1)).unwrap();
        assert_eq!(lit_from_value(&t, &v), ok);
    }

    #[test]
    fn enumeration_matches_cardinality() {
        let t = table();
        for ty in [Ty::Bool, Ty::Int { lo: -2, hi: 2 }, Ty::Named(0), Ty::Named(1), Ty::Named(2)] {
            let vals = Value::enumerate(&t, ty, 1000).unwrap();
            assert_eq!(vals.len() as u64, t.cardinality(ty));
            assert!(vals.iter().all(|v| v.has_type(&t, ty)));
        }
        assert_eq!(t.cardinality(Ty::Named(1)), 1 + 4 * 2);
        assert!(Value::enumerate(&t, Ty::INT, 1000).is_none());
    }
}
