//! Value sorts and runtime values.
//!
//! The value universe is closed: extended integers, Booleans, fixed-width
//! bitvectors, tuples, and upper-triangular Boolean matrices. Matrices have
//! no static dimension; each example fixes the dimension of every matrix
//! flowing through its evaluation (strings of length `l` become matrices of
//! dimension `l + 1`).

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// Static sort of a value. `BoolMatrix` is dimensionless at the type level;
/// dimensions are checked dynamically per example.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SemType {
    Int,
    Bool,
    BitVec(u32),
    Tuple(Vec<SemType>),
    BoolMatrix,
}

impl SemType {
    pub fn is_valid(&self) -> bool {
        match self {
            SemType::BitVec(w) => (1..=64).contains(w),
            SemType::Tuple(ts) => !ts.is_empty() && ts.iter().all(|t| t.is_valid()),
            _ => true,
        }
    }

    /// Number of distinct values of this sort, capped at `cap`. `None` means
    /// infinite (or matrix-sorted, whose dimension is input-dependent).
    pub fn cardinality(&self, cap: u64) -> Option<u64> {
        match self {
            SemType::Int => None,
            SemType::Bool => Some(2),
            SemType::BitVec(w) => {
                if *w >= 63 {
                    None
                } else {
                    Some((1u64 << w).min(cap))
                }
            }
            SemType::BoolMatrix => None,
            SemType::Tuple(ts) => {
                let mut n: u64 = 1;
                for t in ts {
                    n = n.checked_mul(t.cardinality(cap)?)?;
                    if n > cap {
                        return None;
                    }
                }
                Some(n)
            }
        }
    }
}

impl fmt::Display for SemType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemType::Int => write!(f, "int"),
            SemType::Bool => write!(f, "bool"),
            SemType::BitVec(w) => write!(f, "(bitvec {w})"),
            SemType::BoolMatrix => write!(f, "boolmatrix"),
            SemType::Tuple(ts) => {
                write!(f, "(tuple")?;
                for t in ts {
                    write!(f, " {t}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// FNV-1a hasher for hot small-key maps.
#[derive(Default)]
pub struct FnvHasher(u64);

impl std::hash::Hasher for FnvHasher {
    fn finish(&self) -> u64 {
        self.0
    }
    fn write(&mut self, bytes: &[u8]) {
        let mut h = if self.0 == 0 { 0xcbf2_9ce4_8422_2325 } else { self.0 };
        for &b in bytes {
            h ^= b as u64;
            h = h.wrapping_mul(0x1000_0000_01b3);
        }
        self.0 = h;
    }
}

/// Integer extended with +/- infinity. Infinities only ever appear as
/// interval endpoints; concrete evaluation rejects them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExtInt {
    NegInf,
    Fin(i64),
    PosInf,
}

/// `(+inf) + (-inf)` has no sound resolution at this level; the caller
/// widens the affected interval bound to its top endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Indeterminate;

impl ExtInt {
    pub fn is_finite(&self) -> bool {
        matches!(self, ExtInt::Fin(_))
    }

    pub fn neg(self) -> ExtInt {
        match self {
            ExtInt::NegInf => ExtInt::PosInf,
            ExtInt::PosInf => ExtInt::NegInf,
            ExtInt::Fin(a) => ExtInt::Fin(a.checked_neg().unwrap_or(i64::MAX)),
        }
    }

    pub fn add(self, rhs: ExtInt) -> Result<ExtInt, Indeterminate> {
        use ExtInt::*;
        match (self, rhs) {
            (Fin(a), Fin(b)) => Ok(match a.checked_add(b) {
                Some(c) => Fin(c),
                None if a > 0 => PosInf,
                None => NegInf,
            }),
            (PosInf, NegInf) | (NegInf, PosInf) => Err(Indeterminate),
            (PosInf, _) | (_, PosInf) => Ok(PosInf),
            (NegInf, _) | (_, NegInf) => Ok(NegInf),
        }
    }

    pub fn sub(self, rhs: ExtInt) -> Result<ExtInt, Indeterminate> {
        self.add(rhs.neg())
    }

    pub fn mul(self, rhs: ExtInt) -> ExtInt {
        use ExtInt::*;
        match (self, rhs) {
            (Fin(a), Fin(b)) => match a.checked_mul(b) {
                Some(c) => Fin(c),
                None if (a > 0) == (b > 0) => PosInf,
                None => NegInf,
            },
            // 0 * inf = 0, the usual interval-arithmetic convention.
            (Fin(0), _) | (_, Fin(0)) => Fin(0),
            (a, b) => {
                let pos_a = matches!(a, PosInf) || matches!(a, Fin(x) if x > 0);
                let pos_b = matches!(b, PosInf) || matches!(b, Fin(x) if x > 0);
                if pos_a == pos_b {
                    PosInf
                } else {
                    NegInf
                }
            }
        }
    }
}

impl fmt::Display for ExtInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtInt::NegInf => write!(f, "-inf"),
            ExtInt::PosInf => write!(f, "inf"),
            ExtInt::Fin(a) => write!(f, "{a}"),
        }
    }
}

/// Square Boolean matrix with all entries on or above the diagonal; rows are
/// stored as bitmasks, so `dim <= 64`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BoolMatrix {
    dim: u32,
    rows: Vec<u64>,
}

impl BoolMatrix {
    fn upper_mask(dim: u32, row: u32) -> u64 {
        // bits row..dim set
        let all = if dim >= 64 { u64::MAX } else { (1u64 << dim) - 1 };
        all & !((1u64 << row) - 1)
    }

    pub fn zero(dim: u32) -> BoolMatrix {
        assert!((1..=64).contains(&dim), "matrix dim out of range: {dim}");
        BoolMatrix { dim, rows: vec![0; dim as usize] }
    }

    pub fn identity(dim: u32) -> BoolMatrix {
        let mut m = BoolMatrix::zero(dim);
        for i in 0..dim {
            m.rows[i as usize] = 1 << i;
        }
        m
    }

    /// Upper triangle (diagonal included) all ones.
    pub fn ones(dim: u32) -> BoolMatrix {
        let mut m = BoolMatrix::zero(dim);
        for i in 0..dim {
            m.rows[i as usize] = Self::upper_mask(dim, i);
        }
        m
    }

    /// Matrix of the single character `c` against string `s`:
    /// entry (i, i+1) is set iff `s[i] == c`.
    pub fn char_matrix(s: &[char], c: char) -> BoolMatrix {
        let dim = s.len() as u32 + 1;
        let mut m = BoolMatrix::zero(dim);
        for (i, &sc) in s.iter().enumerate() {
            if sc == c {
                m.rows[i] |= 1 << (i + 1);
            }
        }
        m
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn get(&self, i: u32, j: u32) -> bool {
        (self.rows[i as usize] >> j) & 1 == 1
    }

    pub fn set(&mut self, i: u32, j: u32, v: bool) {
        assert!(i <= j, "lower-triangle write ({i},{j})");
        if v {
            self.rows[i as usize] |= 1 << j;
        } else {
            self.rows[i as usize] &= !(1 << j);
        }
    }

    pub fn is_upper_triangular(&self) -> bool {
        (0..self.dim).all(|i| self.rows[i as usize] & !Self::upper_mask(self.dim, i) == 0)
    }

    /// Entrywise or.
    pub fn add(&self, rhs: &BoolMatrix) -> BoolMatrix {
        assert_eq!(self.dim, rhs.dim);
        BoolMatrix {
            dim: self.dim,
            rows: self.rows.iter().zip(&rhs.rows).map(|(a, b)| a | b).collect(),
        }
    }

    /// Boolean matrix product.
    pub fn mul(&self, rhs: &BoolMatrix) -> BoolMatrix {
        assert_eq!(self.dim, rhs.dim);
        let mut out = BoolMatrix::zero(self.dim);
        for i in 0..self.dim as usize {
            let mut acc = 0u64;
            let mut bits = self.rows[i];
            while bits != 0 {
                let k = bits.trailing_zeros() as usize;
                acc |= rhs.rows[k];
                bits &= bits - 1;
            }
            out.rows[i] = acc;
        }
        out
    }

    /// `I + A + A^2 + ... + A^dim` (reflexive-transitive closure).
    pub fn closure(&self) -> BoolMatrix {
        let mut acc = BoolMatrix::identity(self.dim);
        let mut pow = BoolMatrix::identity(self.dim);
        for _ in 0..self.dim {
            pow = pow.mul(self);
            let next = acc.add(&pow);
            if next == acc {
                break;
            }
            acc = next;
        }
        acc
    }

    /// Entrywise complement restricted to the upper triangle.
    pub fn complement(&self) -> BoolMatrix {
        let mut out = BoolMatrix::zero(self.dim);
        for i in 0..self.dim {
            out.rows[i as usize] = !self.rows[i as usize] & Self::upper_mask(self.dim, i);
        }
        out
    }

    /// Entrywise and (lattice meet).
    pub fn meet(&self, rhs: &BoolMatrix) -> BoolMatrix {
        assert_eq!(self.dim, rhs.dim);
        BoolMatrix {
            dim: self.dim,
            rows: self.rows.iter().zip(&rhs.rows).map(|(a, b)| a & b).collect(),
        }
    }

    /// Entrywise implication: every set entry of `self` is set in `rhs`.
    pub fn le(&self, rhs: &BoolMatrix) -> bool {
        self.dim == rhs.dim && self.rows.iter().zip(&rhs.rows).all(|(a, b)| a & !b == 0)
    }

    /// Iterate set upper-triangle positions.
    pub fn set_bits(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.dim).flat_map(move |i| {
            (i..self.dim).filter_map(move |j| if self.get(i, j) { Some((i, j)) } else { None })
        })
    }

    /// Row bitmasks (for serialization).
    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    pub fn from_rows(dim: u32, rows: Vec<u64>) -> Option<BoolMatrix> {
        if !(1..=64).contains(&dim) || rows.len() != dim as usize {
            return None;
        }
        let m = BoolMatrix { dim, rows };
        m.is_upper_triangular().then_some(m)
    }
}

impl fmt::Display for BoolMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(matrix {}", self.dim)?;
        for i in 0..self.dim {
            write!(f, " ")?;
            for j in 0..self.dim {
                write!(f, "{}", if self.get(i, j) { '1' } else { '0' })?;
            }
        }
        write!(f, ")")
    }
}

/// Runtime value. No floats anywhere, so `Eq`/`Hash` are exact.
#[derive(Debug, Clone, Eq, Hash)]
pub enum Value {
    Int(ExtInt),
    Bool(bool),
    BitVec { width: u32, bits: u64 },
    Tuple(Arc<[Value]>),
    Matrix(Arc<BoolMatrix>),
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => a == b,
            (Value::Bool(a), Value::Bool(b)) => a == b,
            (
                Value::BitVec { width: w1, bits: b1 },
                Value::BitVec { width: w2, bits: b2 },
            ) => w1 == w2 && b1 == b2,
            // shared allocations compare by pointer first
            (Value::Tuple(a), Value::Tuple(b)) => {
                Arc::ptr_eq(a, b) || a.as_ref() == b.as_ref()
            }
            (Value::Matrix(a), Value::Matrix(b)) => Arc::ptr_eq(a, b) || a == b,
            _ => false,
        }
    }
}

impl Value {
    pub fn int(v: i64) -> Value {
        Value::Int(ExtInt::Fin(v))
    }

    pub fn pair(a: i64, b: i64) -> Value {
        Value::tuple(vec![Value::int(a), Value::int(b)])
    }

    pub fn tuple(vs: Vec<Value>) -> Value {
        Value::Tuple(vs.into())
    }

    pub fn pair_of(a: Value, b: Value) -> Value {
        Value::Tuple(Arc::from([a, b]))
    }

    pub fn matrix(m: BoolMatrix) -> Value {
        Value::Matrix(Arc::new(m))
    }

    pub fn bitvec(width: u32, bits: u64) -> Value {
        let mask = if width >= 64 { u64::MAX } else { (1u64 << width) - 1 };
        Value::BitVec { width, bits: bits & mask }
    }

    pub fn sort(&self) -> SemType {
        match self {
            Value::Int(_) => SemType::Int,
            Value::Bool(_) => SemType::Bool,
            Value::BitVec { width, .. } => SemType::BitVec(*width),
            Value::Tuple(vs) => SemType::Tuple(vs.iter().map(Value::sort).collect()),
            Value::Matrix(_) => SemType::BoolMatrix,
        }
    }

    pub fn has_sort(&self, t: &SemType) -> bool {
        match (self, t) {
            (Value::Int(_), SemType::Int) => true,
            (Value::Bool(_), SemType::Bool) => true,
            (Value::BitVec { width, .. }, SemType::BitVec(w)) => width == w,
            (Value::Matrix(_), SemType::BoolMatrix) => true,
            (Value::Tuple(vs), SemType::Tuple(ts)) => {
                vs.len() == ts.len() && vs.iter().zip(ts).all(|(v, t)| v.has_sort(t))
            }
            _ => false,
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            Value::Int(x) => x.is_finite(),
            Value::Tuple(vs) => vs.iter().all(Value::is_finite),
            _ => true,
        }
    }

    /// Dimension of the first matrix occurring in this value, if any.
    pub fn matrix_dim(&self) -> Option<u32> {
        match self {
            Value::Matrix(m) => Some(m.dim()),
            Value::Tuple(vs) => vs.iter().find_map(Value::matrix_dim),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::BitVec { width, bits } => write!(f, "(bv {width} {bits})"),
            Value::Tuple(vs) => {
                write!(f, "(tuple")?;
                for v in vs.iter() {
                    write!(f, " {v}")?;
                }
                write!(f, ")")
            }
            Value::Matrix(m) => write!(f, "{m}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extint_arithmetic() {
        use ExtInt::*;
        assert_eq!(Fin(2).add(Fin(3)), Ok(Fin(5)));
        assert_eq!(PosInf.add(Fin(-7)), Ok(PosInf));
        assert_eq!(NegInf.add(NegInf), Ok(NegInf));
        assert_eq!(PosInf.add(NegInf), Err(Indeterminate));
        assert_eq!(Fin(4).sub(PosInf), Ok(NegInf));
        assert_eq!(Fin(0).mul(PosInf), Fin(0));
        assert_eq!(Fin(-2).mul(PosInf), NegInf);
        assert_eq!(NegInf.neg(), PosInf);
    }

    #[test]
    fn extint_overflow_saturates() {
        use ExtInt::*;
        assert_eq!(Fin(i64::MAX).add(Fin(1)), Ok(PosInf));
        assert_eq!(Fin(i64::MIN).add(Fin(-1)), Ok(NegInf));
        assert_eq!(Fin(i64::MAX).mul(Fin(2)), PosInf);
        assert_eq!(Fin(i64::MAX).mul(Fin(-2)), NegInf);
    }

    #[test]
    fn char_matrix_marks_adjacent_positions() {
        let s: Vec<char> = "101".chars().collect();
        let m = BoolMatrix::char_matrix(&s, '1');
        assert_eq!(m.dim(), 4);
        assert!(m.get(0, 1));
        assert!(!m.get(1, 2));
        assert!(m.get(2, 3));
        assert!(m.is_upper_triangular());
    }

    #[test]
    fn complement_of_identity_zeroes_diagonal() {
        let m = BoolMatrix::identity(3).complement();
        for i in 0..3 {
            assert!(!m.get(i, i));
            for j in (i + 1)..3 {
                assert!(m.get(i, j));
            }
        }
    }

    #[test]
    fn closure_reaches_transitively() {
        // edges 0->1, 1->2; closure must contain 0->2 and the diagonal.
        let mut m = BoolMatrix::zero(3);
        m.set(0, 1, true);
        m.set(1, 2, true);
        let c = m.closure();
        assert!(c.get(0, 2));
        assert!(c.get(0, 0) && c.get(1, 1) && c.get(2, 2));
    }

    #[test]
    fn matrix_ops_stay_upper_triangular() {
        let a = BoolMatrix::ones(4);
        let b = BoolMatrix::identity(4).complement();
        assert!(a.mul(&b).is_upper_triangular());
        assert!(a.add(&b).is_upper_triangular());
        assert!(b.closure().is_upper_triangular());
        assert!(b.complement().is_upper_triangular());
    }

    #[test]
    fn sort_cardinality() {
        assert_eq!(SemType::Bool.cardinality(1000), Some(2));
        assert_eq!(SemType::BitVec(3).cardinality(1000), Some(8));
        assert_eq!(
            SemType::Tuple(vec![SemType::Bool, SemType::BitVec(2)]).cardinality(1000),
            Some(8)
        );
        assert_eq!(SemType::Int.cardinality(1000), None);
    }
}
