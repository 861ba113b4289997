//! The interval abstract domain: pairs of values under an atomic order.
//!
//! `Empty` is bottom. A non-empty interval `[lo, hi]` contains every value
//! v with lo <= v <= hi under its order; for product-style orders the
//! endpoints are lattice bounds rather than members of a chain, so joins
//! are computed structurally (meet of lows, join of highs).

use std::sync::Arc;

use thiserror::Error;

use crate::order::{leq, value_join, value_meet, AtomicOrder, OrderAssignment};
use crate::value::{BoolMatrix, ExtInt, SemType, Value};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Interval {
    Empty,
    Pair { lo: Value, hi: Value, order: Arc<AtomicOrder> },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IntervalError {
    #[error("intervals carry different orders")]
    OrderMismatch,
    #[error("malformed interval: lo is not below hi")]
    Malformed,
}

impl Interval {
    pub fn new(lo: Value, hi: Value, order: Arc<AtomicOrder>) -> Result<Interval, IntervalError> {
        match leq(&order, &lo, &hi) {
            Ok(true) => Ok(Interval::Pair { lo, hi, order }),
            _ => Err(IntervalError::Malformed),
        }
    }

    /// Point interval [v, v].
    pub fn point(v: Value, order: Arc<AtomicOrder>) -> Interval {
        Interval::Pair { lo: v.clone(), hi: v, order }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Interval::Empty)
    }

    pub fn as_point(&self) -> Option<&Value> {
        match self {
            Interval::Pair { lo, hi, .. } if lo == hi => Some(lo),
            _ => None,
        }
    }

    pub fn bounds(&self) -> Option<(&Value, &Value)> {
        match self {
            Interval::Pair { lo, hi, .. } => Some((lo, hi)),
            Interval::Empty => None,
        }
    }

    pub fn order(&self) -> Option<&Arc<AtomicOrder>> {
        match self {
            Interval::Pair { order, .. } => Some(order),
            Interval::Empty => None,
        }
    }
}

/// Membership: lo <= v <= hi. Empty contains nothing.
pub fn member(v: &Value, iv: &Interval) -> bool {
    match iv {
        Interval::Empty => false,
        Interval::Pair { lo, hi, order } => {
            leq(order, lo, v).unwrap_or(false) && leq(order, v, hi).unwrap_or(false)
        }
    }
}

/// Interval order: [a,b] is inside [c,d] iff c <= a and b <= d.
pub fn interval_leq(a: &Interval, b: &Interval) -> Result<bool, IntervalError> {
    match (a, b) {
        (Interval::Empty, _) => Ok(true),
        (_, Interval::Empty) => Ok(false),
        (
            Interval::Pair { lo: al, hi: ah, order: ao },
            Interval::Pair { lo: bl, hi: bh, order: bo },
        ) => {
            if ao != bo {
                return Err(IntervalError::OrderMismatch);
            }
            Ok(leq(ao, bl, al).map_err(|_| IntervalError::OrderMismatch)?
                && leq(ao, ah, bh).map_err(|_| IntervalError::OrderMismatch)?)
        }
    }
}

/// Least upper bound: meet of lower ends, join of upper ends. Empty is the
/// identity.
pub fn interval_join(a: &Interval, b: &Interval) -> Result<Interval, IntervalError> {
    match (a, b) {
        (Interval::Empty, x) | (x, Interval::Empty) => Ok(x.clone()),
        (
            Interval::Pair { lo: al, hi: ah, order: ao },
            Interval::Pair { lo: bl, hi: bh, order: bo },
        ) => {
            if ao != bo {
                return Err(IntervalError::OrderMismatch);
            }
            let lo = value_meet(ao, al, bl).map_err(|_| IntervalError::OrderMismatch)?;
            let hi = value_join(ao, ah, bh).map_err(|_| IntervalError::OrderMismatch)?;
            Ok(Interval::Pair { lo, hi, order: ao.clone() })
        }
    }
}

/// Widest value of a sort under an order assignment. Matrix sorts need the
/// runtime dimension.
pub fn top_value_lo(sort: &SemType, oa: &OrderAssignment, dim: u32) -> Value {
    match sort {
        SemType::Int => Value::Int(ExtInt::NegInf),
        SemType::Bool => Value::Bool(false),
        SemType::BitVec(w) => Value::bitvec(*w, 0),
        SemType::BoolMatrix => Value::matrix(BoolMatrix::zero(dim.max(1))),
        SemType::Tuple(ts) => Value::Tuple(ts.iter().map(|t| top_value_lo(t, oa, dim)).collect()),
    }
}

pub fn top_value_hi(sort: &SemType, oa: &OrderAssignment, dim: u32) -> Value {
    match sort {
        SemType::Int => Value::Int(ExtInt::PosInf),
        SemType::Bool => Value::Bool(true),
        SemType::BitVec(w) => {
            let mask = if *w >= 64 { u64::MAX } else { (1u64 << w) - 1 };
            Value::bitvec(*w, mask)
        }
        SemType::BoolMatrix => Value::matrix(BoolMatrix::ones(dim.max(1))),
        SemType::Tuple(ts) => Value::Tuple(ts.iter().map(|t| top_value_hi(t, oa, dim)).collect()),
    }
}

/// Top interval of the sort: every value of the sort is a member.
pub fn top_interval(sort: &SemType, oa: &OrderAssignment, dim: u32) -> Interval {
    Interval::Pair {
        lo: top_value_lo(sort, oa, dim),
        hi: top_value_hi(sort, oa, dim),
        order: oa.order_for_arc(sort),
    }
}

/// Enumerate the members of an interval when the underlying sort is finite
/// and small; `None` when the space is infinite or exceeds `cap`.
pub fn enumerate_members(iv: &Interval, cap: usize) -> Option<Vec<Value>> {
    let (lo, hi) = match iv {
        Interval::Empty => return Some(vec![]),
        Interval::Pair { lo, hi, .. } => (lo, hi),
    };
    let order = iv.order().unwrap();
    enum_between(order, lo, hi, cap)
}

fn enum_between(o: &AtomicOrder, lo: &Value, hi: &Value, cap: usize) -> Option<Vec<Value>> {
    match (o, lo, hi) {
        (AtomicOrder::BoolImplies, Value::Bool(a), Value::Bool(b)) => Some(if a == b {
            vec![Value::Bool(*a)]
        } else {
            vec![Value::Bool(false), Value::Bool(true)]
        }),
        (AtomicOrder::IntLeq, Value::Int(ExtInt::Fin(a)), Value::Int(ExtInt::Fin(b))) => {
            let n = (b - a).max(0) as usize + 1;
            if n > cap {
                return None;
            }
            Some((*a..=*b).map(Value::int).collect())
        }
        (AtomicOrder::IntLeq, _, _) => None,
        (
            AtomicOrder::BvUnsignedLeq,
            Value::BitVec { width, bits: a },
            Value::BitVec { bits: b, .. },
        ) => {
            let n = (b - a) as usize + 1;
            if n > cap {
                return None;
            }
            Some((*a..=*b).map(|x| Value::bitvec(*width, x)).collect())
        }
        (
            AtomicOrder::BvBitwise,
            Value::BitVec { width, bits: a },
            Value::BitVec { bits: b, .. },
        ) => {
            let free = b & !a;
            let k = free.count_ones();
            if k > 20 || (1usize << k) > cap {
                return None;
            }
            // all supersets of a within b: iterate subsets of the free mask
            let mut out = Vec::with_capacity(1 << k);
            let mut sub: u64 = 0;
            loop {
                out.push(Value::bitvec(*width, a | sub));
                if sub == free {
                    break;
                }
                sub = (sub.wrapping_sub(free)) & free;
            }
            Some(out)
        }
        (AtomicOrder::MatrixEntrywise, Value::Matrix(a), Value::Matrix(b)) => {
            let free: Vec<(u32, u32)> = b.set_bits().filter(|(i, j)| !a.get(*i, *j)).collect();
            let k = free.len();
            if k > 20 || (1usize << k) > cap {
                return None;
            }
            let mut out = Vec::with_capacity(1 << k);
            for bits in 0..(1u64 << k) {
                let mut m = a.as_ref().clone();
                for (idx, (i, j)) in free.iter().enumerate() {
                    if bits >> idx & 1 == 1 {
                        m.set(*i, *j, true);
                    }
                }
                out.push(Value::matrix(m));
            }
            Some(out)
        }
        (AtomicOrder::TuplePointwise(parts), Value::Tuple(ls), Value::Tuple(hs)) => {
            let mut out: Vec<Vec<Value>> = vec![vec![]];
            for ((p, l), h) in parts.iter().zip(ls.iter()).zip(hs.iter()) {
                let vals = enum_between(p, l, h, cap)?;
                let mut next = Vec::new();
                for prefix in &out {
                    for v in &vals {
                        let mut row = prefix.clone();
                        row.push(v.clone());
                        next.push(row);
                        if next.len() > cap {
                            return None;
                        }
                    }
                }
                out = next;
            }
            Some(out.into_iter().map(Value::tuple).collect())
        }
        _ => None,
    }
}
