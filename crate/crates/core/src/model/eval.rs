//! Reference expression semantics.
//!
//! Integer arithmetic is checked: every intermediate result must fit the
//! 32-bit carrier and every store into a bounded location (function
//! argument and result, constructor payload, record field, state variable,
//! output port) must fit that location's range. `div` and `mod` truncate
//! toward zero. Operands are evaluated left to right and `and`/`or`
//! short-circuit; the generated C and the SMT encoding follow the same
//! order so that all backends report the same first error.

use std::fmt;

use super::ast::{BinOp, UnOp};
use super::ir::{ExprKind, Func, Pattern, Slot, TExpr};
use super::types::{Ty, INT_MAX, INT_MIN};
use super::value::{Message, Value};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("value {value} outside {lo}..{hi}")]
    RangeViolation { value: i64, lo: i64, hi: i64 },
    #[error("unbound variable in slot {0}")]
    UnboundVariable(Slot),
    #[error("no match arm applies")]
    MatchFailure,
}

/// The error classes shared by every backend; rendered in trace error
/// records.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ErrorKind {
    DivisionByZero,
    RangeViolation,
    UnboundVariable,
    MatchFailure,
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorKind::DivisionByZero => "DivisionByZero",
            ErrorKind::RangeViolation => "RangeViolation",
            ErrorKind::UnboundVariable => "UnboundVariable",
            ErrorKind::MatchFailure => "MatchFailure",
        })
    }
}

impl EvalError {
    pub fn kind(&self) -> ErrorKind {
        match self {
            EvalError::DivisionByZero => ErrorKind::DivisionByZero,
            EvalError::RangeViolation { .. } => ErrorKind::RangeViolation,
            EvalError::UnboundVariable(_) => ErrorKind::UnboundVariable,
            EvalError::MatchFailure => ErrorKind::MatchFailure,
        }
    }
}

/// Variable environment of one body (function, automaton, table, atom).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Frame {
    slots: Vec<Option<Value>>,
}

impl Frame {
    pub fn new(size: usize) -> Self {
        Frame {
            slots: vec![None; size],
        }
    }

    pub fn set(&mut self, slot: Slot, v: Value) {
        let i = slot as usize;
        if i >= self.slots.len() {
            self.slots.resize(i + 1, None);
        }
        self.slots[i] = Some(v);
    }

    pub fn get(&self, slot: Slot) -> Option<&Value> {
        self.slots.get(slot as usize).and_then(|v| v.as_ref())
    }
}

fn int_result(v: i64) -> Result<Value, EvalError> {
    if (INT_MIN..=INT_MAX).contains(&v) {
        Ok(Value::Int(v))
    } else {
        Err(EvalError::RangeViolation {
            value: v,
            lo: INT_MIN,
            hi: INT_MAX,
        })
    }
}

/// Check a value about to be stored in a location of type `ty`.
pub fn check_store(v: Value, ty: Ty) -> Result<Value, EvalError> {
    match (&v, ty) {
        (Value::Int(i), Ty::Int { lo, hi }) if *i < lo || *i > hi => {
            Err(EvalError::RangeViolation { value: *i, lo, hi })
        }
        _ => Ok(v),
    }
}

fn int_of(v: &Value) -> i64 {
    v.as_int().expect("well-typed integer operand")
}

fn bool_of(v: &Value) -> bool {
    v.as_bool().expect("well-typed boolean operand")
}

/// Evaluate `e` in `env`. Terminates for every checked program because
/// the call graph is acyclic.
pub fn eval_expr(env: &mut Frame, funcs: &[Func], e: &TExpr) -> Result<Value, EvalError> {
    match &e.kind {
        ExprKind::Lit(v) => Ok(v.clone()),
        ExprKind::Var(s) => env.get(*s).cloned().ok_or(EvalError::UnboundVariable(*s)),
        ExprKind::Call(f, args) => {
            let func = &funcs[*f as usize];
            let mut frame = Frame::new(func.slots.len());
            for (i, (a, (_, pty))) in args.iter().zip(&func.params).enumerate() {
                let v = eval_expr(env, funcs, a)?;
                frame.set(i as Slot, check_store(v, *pty)?);
            }
            let r = eval_expr(&mut frame, funcs, &func.body)?;
            check_store(r, func.ret)
        }
        ExprKind::Ctor { ty, tag, args } => {
            let mut vals = Vec::with_capacity(args.len());
            for a in args {
                vals.push(eval_expr(env, funcs, a)?);
            }
            Ok(Value::Ctor {
                ty: *ty,
                tag: *tag,
                args: vals.into(),
            })
        }
        ExprKind::Record { ty, fields } => {
            let mut vals = Vec::with_capacity(fields.len());
            for a in fields {
                vals.push(eval_expr(env, funcs, a)?);
            }
            Ok(Value::Record {
                ty: *ty,
                fields: vals.into(),
            })
        }
        ExprKind::Narrow(inner) => {
            let v = eval_expr(env, funcs, inner)?;
            check_store(v, e.ty)
        }
        ExprKind::Field(r, idx) => match eval_expr(env, funcs, r)? {
            Value::Record { fields, .. } => Ok(fields[*idx as usize].clone()),
            _ => unreachable!("field access on non-record"),
        },
        ExprKind::Match { scrut, arms } => {
            let v = eval_expr(env, funcs, scrut)?;
            let (tag, args): (u32, &[Value]) = match &v {
                Value::Ctor { tag, args, .. } => (*tag, args),
                _ => unreachable!("match on non-constructor value"),
            };
            for arm in arms {
                match arm.tag {
                    Some(t) if t != tag => continue,
                    Some(_) => {
                        for (b, a) in arm.binds.iter().zip(args.iter()) {
                            if let Some(s) = b {
                                env.set(*s, a.clone());
                            }
                        }
                        return eval_expr(env, funcs, &arm.body);
                    }
                    None => return eval_expr(env, funcs, &arm.body),
                }
            }
            Err(EvalError::MatchFailure)
        }
        ExprKind::If(c, t, f) => {
            if bool_of(&eval_expr(env, funcs, c)?) {
                eval_expr(env, funcs, t)
            } else {
                eval_expr(env, funcs, f)
            }
        }
        ExprKind::Unary(op, a) => {
            let v = eval_expr(env, funcs, a)?;
            match op {
                UnOp::Not => Ok(Value::Bool(!bool_of(&v))),
                UnOp::Neg => int_result(-int_of(&v)),
            }
        }
        ExprKind::Binary(op, l, r) => {
            let lv = eval_expr(env, funcs, l)?;
            match op {
                BinOp::And => {
                    if !bool_of(&lv) {
                        return Ok(Value::Bool(false));
                    }
                    return eval_expr(env, funcs, r);
                }
                BinOp::Or => {
                    if bool_of(&lv) {
                        return Ok(Value::Bool(true));
                    }
                    return eval_expr(env, funcs, r);
                }
                _ => {}
            }
            let rv = eval_expr(env, funcs, r)?;
            match op {
                BinOp::Eq => Ok(Value::Bool(lv == rv)),
                BinOp::Ne => Ok(Value::Bool(lv != rv)),
                BinOp::Lt => Ok(Value::Bool(int_of(&lv) < int_of(&rv))),
                BinOp::Le => Ok(Value::Bool(int_of(&lv) <= int_of(&rv))),
                BinOp::Gt => Ok(Value::Bool(int_of(&lv) > int_of(&rv))),
                BinOp::Ge => Ok(Value::Bool(int_of(&lv) >= int_of(&rv))),
                BinOp::Add => int_result(int_of(&lv) + int_of(&rv)),
                BinOp::Sub => int_result(int_of(&lv) - int_of(&rv)),
                BinOp::Mul => int_result(int_of(&lv) * int_of(&rv)),
                BinOp::Div | BinOp::Mod => {
                    let (a, b) = (int_of(&lv), int_of(&rv));
                    if b == 0 {
                        return Err(EvalError::DivisionByZero);
                    }
                    // i64 `/` and `%` truncate toward zero.
                    int_result(if *op == BinOp::Div { a / b } else { a % b })
                }
                BinOp::And | BinOp::Or => unreachable!(),
            }
        }
    }
}

/// Match one input message against a pattern. `None` is no match; a match
/// yields the (possibly empty) variable binding.
pub fn match_pattern(p: &Pattern, m: &Message) -> Option<Vec<(Slot, Value)>> {
    match (p, m) {
        (Pattern::DontCare, _) => Some(Vec::new()),
        (Pattern::Wildcard, Message::Present(_)) => Some(Vec::new()),
        (Pattern::Absent, Message::Absent) => Some(Vec::new()),
        (Pattern::Literal(l), Message::Present(v)) if l == v => Some(Vec::new()),
        (Pattern::Bind(s), Message::Present(v)) => Some(vec![(*s, v.clone())]),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ast::BinOp;

    fn int(v: i64) -> TExpr {
        TExpr::lit(Value::Int(v), Ty::INT)
    }

    fn var(s: Slot) -> TExpr {
        TExpr {
            kind: ExprKind::Var(s),
            ty: Ty::INT,
        }
    }

    fn bin(op: BinOp, l: TExpr, r: TExpr) -> TExpr {
        let ty = if op.is_arithmetic() { Ty::INT } else { Ty::Bool };
        TExpr {
            kind: ExprKind::Binary(op, Box::new(l), Box::new(r)),
            ty,
        }
    }

    fn ite(c: TExpr, t: TExpr, e: TExpr) -> TExpr {
        TExpr {
            ty: t.ty,
            kind: ExprKind::If(Box::new(c), Box::new(t), Box::new(e)),
        }
    }

    #[test]
    fn literal_evaluates_to_itself() {
        assert_eq!(eval_expr(&mut Frame::new(0), &[], &int(5)), Ok(Value::Int(5)));
    }

    #[test]
    fn conditional_reads_environment() {
        let mut env = Frame::new(1);
        env.set(0, Value::Int(3));
        let e = ite(bin(BinOp::Gt, var(0), int(2)), int(1), int(0));
        assert_eq!(eval_expr(&mut env, &[], &e), Ok(Value::Int(1)));
    }

    #[test]
    fn division_by_zero_is_reported() {
        let mut env = Frame::new(1);
        env.set(0, Value::Int(1));
        let e = bin(BinOp::Div, var(0), int(0));
        assert_eq!(eval_expr(&mut env, &[], &e), Err(EvalError::DivisionByZero));
    }

    #[test]
    fn user_function_call() {
        // max2(x, y) = if x > y then x else y
        let max2 = Func {
            name: "max2".into(),
            params: vec![("x".into(), Ty::INT), ("y".into(), Ty::INT)],
            ret: Ty::INT,
            body: ite(bin(BinOp::Gt, var(0), var(1)), var(0), var(1)),
            slots: vec![Ty::INT, Ty::INT],
        };
        let call = TExpr {
            kind: ExprKind::Call(0, vec![int(2), int(7)]),
            ty: Ty::INT,
        };
        assert_eq!(eval_expr(&mut Frame::new(0), &[max2], &call), Ok(Value::Int(7)));
    }

    #[test]
    fn truncating_division_and_remainder() {
        let cases = [(7, 2, 3, 1), (-7, 2, -3, -1), (7, -2, -3, 1), (-7, -2, 3, -1)];
        for (a, b, q, r) in cases {
            let mut env = Frame::new(0);
            assert_eq!(eval_expr(&mut env, &[], &bin(BinOp::Div, int(a), int(b))), Ok(Value::Int(q)));
            assert_eq!(eval_expr(&mut env, &[], &bin(BinOp::Mod, int(a), int(b))), Ok(Value::Int(r)));
        }
    }

    #[test]
    fn overflow_is_a_range_violation() {
        let e = bin(BinOp::Add, int(INT_MAX), int(1));
        assert!(matches!(
            eval_expr(&mut Frame::new(0), &[], &e),
            Err(EvalError::RangeViolation { .. })
        ));
        let e = bin(BinOp::Div, int(INT_MIN), int(-1));
        assert!(matches!(
            eval_expr(&mut Frame::new(0), &[], &e),
            Err(EvalError::RangeViolation { .. })
        ));
    }

    #[test]
    fn stores_respect_bounds() {
        assert!(check_store(Value::Int(4), Ty::Int { lo: 0, hi: 3 }).is_err());
        assert_eq!(check_store(Value::Int(3), Ty::Int { lo: 0, hi: 3 }), Ok(Value::Int(3)));
    }

    #[test]
    fn and_short_circuits_errors() {
        let f = TExpr::lit(Value::Bool(false), Ty::Bool);
        let boom = bin(BinOp::Eq, bin(BinOp::Div, int(1), int(0)), int(0));
        let e = bin(BinOp::And, f, boom);
        assert_eq!(eval_expr(&mut Frame::new(0), &[], &e), Ok(Value::Bool(false)));
    }

    #[test]
    fn patterns() {
        let three = Message::Present(Value::Int(3));
        assert_eq!(match_pattern(&Pattern::Absent, &Message::Absent), Some(vec![]));
        assert_eq!(match_pattern(&Pattern::Literal(Value::Int(3)), &three), Some(vec![]));
        assert_eq!(
            match_pattern(&Pattern::Literal(Value::Int(3)), &Message::Present(Value::Int(4))),
            None
        );
        assert_eq!(
            match_pattern(&Pattern::Bind(0), &Message::Present(Value::Int(9))),
            Some(vec![(0, Value::Int(9))])
        );
        assert_eq!(match_pattern(&Pattern::Bind(0), &Message::Absent), None);
        assert_eq!(match_pattern(&Pattern::Wildcard, &Message::Absent), None);
        assert_eq!(match_pattern(&Pattern::DontCare, &Message::Absent), Some(vec![]));
    }
}
