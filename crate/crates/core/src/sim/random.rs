//! Random stimuli for differential testing and exploratory simulation.

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::model::ir::Program;
use crate::model::types::{NominalKind, Ty, TypeTable};
use crate::model::value::{Message, Value};
use crate::syntax::Stimulus;

/// A well-typed value of `ty`. Integers hit their bounds and small values
/// more often than a uniform draw would.
pub fn random_value(types: &TypeTable, ty: Ty, rng: &mut impl Rng) -> Value {
    match ty {
        Ty::Bool => Value::Bool(rng.random()),
        Ty::Int { lo, hi } => {
            let v = match rng.random_range(0..8) {
                0 => lo,
                1 => hi,
                2 | 3 => rng.random_range(-3i64..=3).clamp(lo, hi),
                _ => rng.random_range(lo..=hi),
            };
            Value::Int(v)
        }
        Ty::Named(id) => match &types.get(id).kind {
            NominalKind::Enum(cs) => Value::enum_lit(id, rng.random_range(0..cs.len()) as u32),
            NominalKind::Variant(cs) => {
                let tag = rng.random_range(0..cs.len());
                let args = cs[tag].fields.iter().map(|f| random_value(types, *f, rng)).collect();
                Value::Ctor { ty: id, tag: tag as u32, args }
            }
            NominalKind::Record(fs) => Value::Record {
                ty: id,
                fields: fs.iter().map(|f| random_value(types, f.ty, rng)).collect(),
            },
        },
    }
}

/// `ticks` rows for the root inputs; each message is absent with
/// probability `absent`.
pub fn random_stimulus(program: &Program, ticks: usize, absent: f64, seed: u64) -> Stimulus {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let ports = &program.root().inputs;
    let rows = (0..ticks)
        .map(|_| {
            ports
                .iter()
                .map(|p| {
                    if rng.random_bool(absent) {
                        Message::Absent
                    } else {
                        Message::Present(random_value(&program.types, p.ty, &mut rng))
                    }
                })
                .collect()
        })
        .collect();
    Stimulus { rows }
}
