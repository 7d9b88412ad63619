use std::fmt;

/// Lower and upper bound of the bare `Int` type.
pub const INT_MIN: i64 = i32::MIN as i64;
pub const INT_MAX: i64 = i32::MAX as i64;

pub type TypeId = u32;

/// A resolved type. Named types are always enums, variants or records;
/// `Bool` and bounded-integer aliases resolve structurally.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Ty {
    Bool,
    Int { lo: i64, hi: i64 },
    Named(TypeId),
}

impl Ty {
    pub const INT: Ty = Ty::Int {
        lo: INT_MIN,
        hi: INT_MAX,
    };

    pub fn is_int(self) -> bool {
        matches!(self, Ty::Int { .. })
    }

    /// Whether values of `self` and `other` may be compared or stored into
    /// each other (integer ranges are checked at run time).
    pub fn compatible(self, other: Ty) -> bool {
        match (self, other) {
            (Ty::Int { .. }, Ty::Int { .. }) => true,
            (a, b) => a == b,
        }
    }

    /// Least type containing both; only defined for compatible types.
    pub fn join(self, other: Ty) -> Ty {
        match (self, other) {
            (Ty::Int { lo: a, hi: b }, Ty::Int { lo: c, hi: d }) => Ty::Int {
                lo: a.min(c),
                hi: b.max(d),
            },
            (a, _) => a,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CtorSig {
    pub name: String,
    pub fields: Vec<Ty>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldSig {
    pub name: String,
    pub ty: Ty,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NominalKind {
    Enum(Vec<String>),
    Variant(Vec<CtorSig>),
    Record(Vec<FieldSig>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NominalType {
    pub name: String,
    pub kind: NominalKind,
}

impl NominalType {
    pub fn ctor_count(&self) -> usize {
        match &self.kind {
            NominalKind::Enum(l) => l.len(),
            NominalKind::Variant(c) => c.len(),
            NominalKind::Record(_) => 1,
        }
    }

    pub fn ctor_name(&self, tag: u32) -> &str {
        match &self.kind {
            NominalKind::Enum(l) => &l[tag as usize],
            NominalKind::Variant(c) => &c[tag as usize].name,
            NominalKind::Record(_) => &self.name,
        }
    }

    pub fn ctor_fields(&self, tag: u32) -> &[Ty] {
        match &self.kind {
            NominalKind::Variant(c) => &c[tag as usize].fields,
            _ => &[],
        }
    }

    pub fn ctor_tag(&self, name: &str) -> Option<u32> {
        match &self.kind {
            NominalKind::Enum(l) => l.iter().position(|n| n == name).map(|i| i as u32),
            NominalKind::Variant(c) => c.iter().position(|n| n.name == name).map(|i| i as u32),
            NominalKind::Record(_) => None,
        }
    }
}

/// All nominal types of a program, indexed by [`TypeId`]. Types appear in
/// dependency order: a type only refers to types with smaller ids.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TypeTable {
    pub types: Vec<NominalType>,
}

impl TypeTable {
    pub fn get(&self, id: TypeId) -> &NominalType {
        &self.types[id as usize]
    }

    pub fn by_name(&self, name: &str) -> Option<TypeId> {
        self.types
            .iter()
            .position(|t| t.name == name)
            .map(|i| i as TypeId)
    }

    pub fn display(&self, ty: Ty) -> TyDisplay<'_> {
        TyDisplay { table: self, ty }
    }

    /// Number of distinct values of `ty`, saturating at `u64::MAX`.
    pub fn cardinality(&self, ty: Ty) -> u64 {
        match ty {
            Ty::Bool => 2,
            Ty::Int { lo, hi } => (hi - lo + 1) as u64,
            Ty::Named(id) => match &self.get(id).kind {
                NominalKind::Enum(l) => l.len() as u64,
                NominalKind::Variant(cs) => cs.iter().fold(0u64, |acc, c| {
                    let n = c
                        .fields
                        .iter()
                        .fold(1u64, |p, f| p.saturating_mul(self.cardinality(*f)));
                    acc.saturating_add(n)
                }),
                NominalKind::Record(fs) => fs
                    .iter()
                    .fold(1u64, |p, f| p.saturating_mul(self.cardinality(f.ty))),
            },
        }
    }
}

pub struct TyDisplay<'a> {
    table: &'a TypeTable,
    ty: Ty,
}

impl fmt::Display for TyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.ty {
            Ty::Bool => f.write_str("Bool"),
            Ty::Int { lo, hi } if lo == INT_MIN && hi == INT_MAX => f.write_str("Int"),
            Ty::Int { lo, hi } => write!(f, "Int[{lo}..{hi}]"),
            Ty::Named(id) => f.write_str(&self.table.get(id).name),
        }
    }
}
