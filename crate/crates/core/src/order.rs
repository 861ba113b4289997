//! Atomic partial orders, order assignments, and the monotonicity checker.
//!
//! Monotonicity of a rule expression in one argument is established by
//! brute force over finite sample domains: exhaustively when the space is
//! small, otherwise by seeded sampling of comparable pairs. Sampled
//! verdicts are sound only relative to the sample; the analysis artifact
//! records the sample description next to every entry for that reason.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{eval_expr, Env, Expr};
use crate::grammar::Production;
use crate::problem::Problem;
use crate::value::{BoolMatrix, ExtInt, SemType, Value};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AtomicOrder {
    IntLeq,
    BoolImplies,
    BvBitwise,
    BvUnsignedLeq,
    MatrixEntrywise,
    TuplePointwise(Vec<AtomicOrder>),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrderError {
    #[error("value does not match order sort")]
    SortMismatch,
}

impl AtomicOrder {
    pub fn name(&self) -> String {
        match self {
            AtomicOrder::IntLeq => "intLeq".into(),
            AtomicOrder::BoolImplies => "boolImplies".into(),
            AtomicOrder::BvBitwise => "bvBitwise".into(),
            AtomicOrder::BvUnsignedLeq => "bvUnsignedLeq".into(),
            AtomicOrder::MatrixEntrywise => "matrixEntrywise".into(),
            AtomicOrder::TuplePointwise(parts) => {
                let inner: Vec<String> = parts.iter().map(AtomicOrder::name).collect();
                format!("pointwise({})", inner.join(","))
            }
        }
    }
}

/// Partial-order test. Errors only on sort confusion.
pub fn leq(o: &AtomicOrder, a: &Value, b: &Value) -> Result<bool, OrderError> {
    match (o, a, b) {
        (AtomicOrder::IntLeq, Value::Int(x), Value::Int(y)) => Ok(x <= y),
        (AtomicOrder::BoolImplies, Value::Bool(x), Value::Bool(y)) => Ok(!x | y),
        (
            AtomicOrder::BvBitwise,
            Value::BitVec { width: w1, bits: x },
            Value::BitVec { width: w2, bits: y },
        ) if w1 == w2 => Ok(x & !y == 0),
        (
            AtomicOrder::BvUnsignedLeq,
            Value::BitVec { width: w1, bits: x },
            Value::BitVec { width: w2, bits: y },
        ) if w1 == w2 => Ok(x <= y),
        (AtomicOrder::MatrixEntrywise, Value::Matrix(x), Value::Matrix(y)) => {
            if x.dim() != y.dim() {
                return Err(OrderError::SortMismatch);
            }
            Ok(x.le(y))
        }
        (AtomicOrder::TuplePointwise(parts), Value::Tuple(xs), Value::Tuple(ys))
            if parts.len() == xs.len() && xs.len() == ys.len() =>
        {
            for ((p, x), y) in parts.iter().zip(xs.iter()).zip(ys.iter()) {
                if !leq(p, x, y)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        _ => Err(OrderError::SortMismatch),
    }
}

/// Lattice meet of two values under the order (componentwise down).
pub fn value_meet(o: &AtomicOrder, a: &Value, b: &Value) -> Result<Value, OrderError> {
    match (o, a, b) {
        (AtomicOrder::IntLeq, Value::Int(x), Value::Int(y)) => Ok(Value::Int(*x.min(y))),
        (AtomicOrder::BoolImplies, Value::Bool(x), Value::Bool(y)) => Ok(Value::Bool(x & y)),
        (
            AtomicOrder::BvBitwise,
            Value::BitVec { width, bits: x },
            Value::BitVec { bits: y, .. },
        ) => Ok(Value::bitvec(*width, x & y)),
        (
            AtomicOrder::BvUnsignedLeq,
            Value::BitVec { width, bits: x },
            Value::BitVec { bits: y, .. },
        ) => Ok(Value::bitvec(*width, *x.min(y))),
        (AtomicOrder::MatrixEntrywise, Value::Matrix(x), Value::Matrix(y)) => {
            if x.dim() != y.dim() {
                return Err(OrderError::SortMismatch);
            }
            Ok(Value::matrix(x.meet(y)))
        }
        (AtomicOrder::TuplePointwise(parts), Value::Tuple(xs), Value::Tuple(ys))
            if parts.len() == xs.len() && xs.len() == ys.len() =>
        {
            Ok(Value::Tuple(
                parts
                    .iter()
                    .zip(xs.iter())
                    .zip(ys.iter())
                    .map(|((p, x), y)| value_meet(p, x, y))
                    .collect::<Result<_, _>>()?,
            ))
        }
        _ => Err(OrderError::SortMismatch),
    }
}

/// Lattice join of two values under the order (componentwise up).
pub fn value_join(o: &AtomicOrder, a: &Value, b: &Value) -> Result<Value, OrderError> {
    match (o, a, b) {
        (AtomicOrder::IntLeq, Value::Int(x), Value::Int(y)) => Ok(Value::Int(*x.max(y))),
        (AtomicOrder::BoolImplies, Value::Bool(x), Value::Bool(y)) => Ok(Value::Bool(x | y)),
        (
            AtomicOrder::BvBitwise,
            Value::BitVec { width, bits: x },
            Value::BitVec { bits: y, .. },
        ) => Ok(Value::bitvec(*width, x | y)),
        (
            AtomicOrder::BvUnsignedLeq,
            Value::BitVec { width, bits: x },
            Value::BitVec { bits: y, .. },
        ) => Ok(Value::bitvec(*width, *x.max(y))),
        (AtomicOrder::MatrixEntrywise, Value::Matrix(x), Value::Matrix(y)) => {
            if x.dim() != y.dim() {
                return Err(OrderError::SortMismatch);
            }
            Ok(Value::matrix(x.add(y)))
        }
        (AtomicOrder::TuplePointwise(parts), Value::Tuple(xs), Value::Tuple(ys))
            if parts.len() == xs.len() && xs.len() == ys.len() =>
        {
            Ok(Value::Tuple(
                parts
                    .iter()
                    .zip(xs.iter())
                    .zip(ys.iter())
                    .map(|((p, x), y)| value_join(p, x, y))
                    .collect::<Result<_, _>>()?,
            ))
        }
        _ => Err(OrderError::SortMismatch),
    }
}

/// Assignment of one atomic order per base sort; tuple sorts get the
/// pointwise product of their components' orders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderAssignment {
    pub int: AtomicOrder,
    pub boolean: AtomicOrder,
    pub bitvec: AtomicOrder,
    pub matrix: AtomicOrder,
}

impl Default for OrderAssignment {
    fn default() -> Self {
        OrderAssignment {
            int: AtomicOrder::IntLeq,
            boolean: AtomicOrder::BoolImplies,
            bitvec: AtomicOrder::BvBitwise,
            matrix: AtomicOrder::MatrixEntrywise,
        }
    }
}

impl OrderAssignment {
    pub fn order_for(&self, sort: &SemType) -> AtomicOrder {
        match sort {
            SemType::Int => self.int.clone(),
            SemType::Bool => self.boolean.clone(),
            SemType::BitVec(_) => self.bitvec.clone(),
            SemType::BoolMatrix => self.matrix.clone(),
            SemType::Tuple(ts) => {
                AtomicOrder::TuplePointwise(ts.iter().map(|t| self.order_for(t)).collect())
            }
        }
    }

    pub fn order_for_arc(&self, sort: &SemType) -> Arc<AtomicOrder> {
        Arc::new(self.order_for(sort))
    }

    /// Names keyed by base sort shape, for the artifact.
    pub fn describe(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("int".into(), self.int.name());
        m.insert("bool".into(), self.boolean.name());
        m.insert("bitvec".into(), self.bitvec.name());
        m.insert("boolmatrix".into(), self.matrix.name());
        m
    }

    pub fn set_by_name(&mut self, sort: &str, order: &str) -> Result<(), String> {
        let o = order_by_name(order).ok_or_else(|| format!("unknown order {order}"))?;
        match sort {
            "int" => self.int = o,
            "bool" => self.boolean = o,
            "bitvec" => self.bitvec = o,
            "boolmatrix" => self.matrix = o,
            other => return Err(format!("unknown sort shape {other}")),
        }
        Ok(())
    }
}

pub fn order_by_name(name: &str) -> Option<AtomicOrder> {
    Some(match name {
        "intLeq" => AtomicOrder::IntLeq,
        "boolImplies" => AtomicOrder::BoolImplies,
        "bvBitwise" => AtomicOrder::BvBitwise,
        "bvUnsignedLeq" => AtomicOrder::BvUnsignedLeq,
        "matrixEntrywise" => AtomicOrder::MatrixEntrywise,
        _ => return None,
    })
}

/// Candidate order assignments for a problem: the cartesian product of the
/// built-in atomic orders over the base sorts that actually occur,
/// restricted by any order hints in the problem file.
pub fn candidate_assignments(p: &Problem) -> Vec<OrderAssignment> {
    let mut has_bv = false;
    fn walk(t: &SemType, has_bv: &mut bool) {
        match t {
            SemType::BitVec(_) => *has_bv = true,
            SemType::Tuple(ts) => ts.iter().for_each(|t| walk(t, has_bv)),
            _ => {}
        }
    }
    for d in &p.grammar.nonterminals {
        walk(&d.input_type, &mut has_bv);
        walk(&d.output_type, &mut has_bv);
    }

    let bv_candidates: Vec<AtomicOrder> = if let Some(hint) = p.order_hints.get("bitvec") {
        order_by_name(hint).into_iter().collect()
    } else if has_bv {
        vec![AtomicOrder::BvBitwise, AtomicOrder::BvUnsignedLeq]
    } else {
        vec![AtomicOrder::BvBitwise]
    };

    bv_candidates
        .into_iter()
        .map(|bv| {
            let mut oa = OrderAssignment { bitvec: bv, ..OrderAssignment::default() };
            for (sort, order) in &p.order_hints {
                if sort != "bitvec" {
                    let _ = oa.set_by_name(sort, order);
                }
            }
            oa
        })
        .collect()
}

// ---------------------------------------------------------------------------
// monotonicity
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Order-preserving in this argument.
    Inc,
    /// Order-reversing in this argument.
    Dec,
    /// Constant in this argument (both directions hold).
    Both,
    /// Neither direction could be established.
    None,
}

impl Direction {
    pub fn is_monotone(self) -> bool {
        !matches!(self, Direction::None)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum VerifyTag {
    BruteForce,
    Assumed,
    External,
}

/// Sample-domain configuration for the brute-force checker.
#[derive(Debug, Clone)]
pub struct SampleCfg {
    pub int_min: i64,
    pub int_max: i64,
    /// Bitvectors up to this width enumerate exhaustively; wider ones use
    /// corner values plus seeded samples.
    pub bv_exhaustive_width: u32,
    /// Matrices of this dimension are used for analysis; dimensions up to 3
    /// enumerate exhaustively.
    pub matrix_dim: u32,
    /// Cap on (pair, frozen-vector) checks per expression argument and
    /// direction before switching to sampling.
    pub budget: usize,
    pub seed: u64,
}

impl Default for SampleCfg {
    fn default() -> Self {
        SampleCfg {
            int_min: -3,
            int_max: 3,
            bv_exhaustive_width: 3,
            matrix_dim: 3,
            budget: 20_000,
            seed: 7,
        }
    }
}

impl SampleCfg {
    pub fn describe(&self) -> String {
        format!(
            "int[{},{}] bool exhaustive bitvec<=w{} exhaustive matrix dim {} budget {} seed {}",
            self.int_min,
            self.int_max,
            self.bv_exhaustive_width,
            self.matrix_dim,
            self.budget,
            self.seed
        )
    }

    /// Full sample domain for a sort. Empty means the space is too large to
    /// cross and the sampler draws componentwise instead.
    pub fn domain(&self, sort: &SemType) -> Vec<Value> {
        match sort {
            SemType::Int => (self.int_min..=self.int_max).map(Value::int).collect(),
            SemType::Bool => vec![Value::Bool(false), Value::Bool(true)],
            SemType::BitVec(w) => {
                if *w <= self.bv_exhaustive_width {
                    (0..(1u64 << w)).map(|b| Value::bitvec(*w, b)).collect()
                } else {
                    bv_corners(*w)
                }
            }
            SemType::BoolMatrix => {
                let d = self.matrix_dim;
                if d <= 3 {
                    enumerate_matrices(d)
                } else {
                    vec![
                        Value::matrix(BoolMatrix::zero(d)),
                        Value::matrix(BoolMatrix::identity(d)),
                        Value::matrix(BoolMatrix::ones(d)),
                        Value::matrix(BoolMatrix::identity(d).complement()),
                    ]
                }
            }
            SemType::Tuple(ts) => {
                let parts: Vec<Vec<Value>> = ts.iter().map(|t| self.domain(t)).collect();
                if parts.iter().any(Vec::is_empty) {
                    return Vec::new();
                }
                let total = parts
                    .iter()
                    .try_fold(1usize, |acc, p| acc.checked_mul(p.len()))
                    .unwrap_or(usize::MAX);
                if total <= 4096 {
                    cartesian(&parts)
                } else {
                    Vec::new()
                }
            }
        }
    }

    /// Seeded random element of the sort's sample domain.
    pub fn sample_value(&self, sort: &SemType, rng: &mut ChaCha8Rng) -> Value {
        match sort {
            SemType::Int => Value::int(rng.gen_range(self.int_min..=self.int_max)),
            SemType::Bool => Value::Bool(rng.gen()),
            SemType::BitVec(w) => {
                let mask = if *w >= 64 { u64::MAX } else { (1u64 << w) - 1 };
                Value::bitvec(*w, rng.gen::<u64>() & mask)
            }
            SemType::BoolMatrix => {
                let d = self.matrix_dim;
                let mut m = BoolMatrix::zero(d);
                for i in 0..d {
                    for j in i..d {
                        if rng.gen::<bool>() {
                            m.set(i, j, true);
                        }
                    }
                }
                Value::matrix(m)
            }
            SemType::Tuple(ts) => {
                Value::Tuple(ts.iter().map(|t| self.sample_value(t, rng)).collect())
            }
        }
    }

    /// Seeded random value above `v` under `o` (builds comparable pairs).
    pub fn sample_above(&self, o: &AtomicOrder, v: &Value, rng: &mut ChaCha8Rng) -> Value {
        match (o, v) {
            (AtomicOrder::IntLeq, Value::Int(ExtInt::Fin(x))) => {
                Value::int(rng.gen_range(*x..=self.int_max.max(*x)))
            }
            (AtomicOrder::BoolImplies, Value::Bool(b)) => Value::Bool(*b || rng.gen()),
            (AtomicOrder::BvBitwise, Value::BitVec { width, bits }) => {
                let mask = if *width >= 64 { u64::MAX } else { (1u64 << width) - 1 };
                Value::bitvec(*width, bits | (rng.gen::<u64>() & mask))
            }
            (AtomicOrder::BvUnsignedLeq, Value::BitVec { width, bits }) => {
                let max = if *width >= 64 { u64::MAX } else { (1u64 << width) - 1 };
                Value::bitvec(*width, rng.gen_range(*bits..=max))
            }
            (AtomicOrder::MatrixEntrywise, Value::Matrix(m)) => {
                let mut up = m.as_ref().clone();
                for i in 0..m.dim() {
                    for j in i..m.dim() {
                        if rng.gen::<f64>() < 0.25 {
                            up.set(i, j, true);
                        }
                    }
                }
                Value::matrix(up)
            }
            (AtomicOrder::TuplePointwise(parts), Value::Tuple(vs)) => Value::Tuple(
                parts.iter().zip(vs.iter()).map(|(p, v)| self.sample_above(p, v, rng)).collect::<Vec<_>>().into(),
            ),
            _ => v.clone(),
        }
    }
}

fn bv_corners(w: u32) -> Vec<Value> {
    let mask = if w >= 64 { u64::MAX } else { (1u64 << w) - 1 };
    let mut vals: Vec<u64> = vec![0, 1, 2, 3, 5, 7, mask, mask - 1, mask >> 1];
    for k in 0..w.min(16) {
        vals.push(1 << k);
        vals.push((1 << k) - 1);
    }
    vals.push(0x5555_5555_5555_5555 & mask);
    vals.push(0xAAAA_AAAA_AAAA_AAAA & mask);
    vals.push(0x0F0F_0F0F_0F0F_0F0F & mask);
    vals.push(0xF0F0_F0F0_F0F0_F0F0 & mask);
    let mut out: Vec<u64> = vals.into_iter().map(|v| v & mask).collect();
    out.sort_unstable();
    out.dedup();
    out.into_iter().map(|b| Value::bitvec(w, b)).collect()
}

fn enumerate_matrices(dim: u32) -> Vec<Value> {
    let positions: Vec<(u32, u32)> =
        (0..dim).flat_map(|i| (i..dim).map(move |j| (i, j))).collect();
    let n = positions.len();
    (0..(1u64 << n))
        .map(|bits| {
            let mut m = BoolMatrix::zero(dim);
            for (k, (i, j)) in positions.iter().enumerate() {
                if bits >> k & 1 == 1 {
                    m.set(*i, *j, true);
                }
            }
            Value::matrix(m)
        })
        .collect()
}

fn cartesian(parts: &[Vec<Value>]) -> Vec<Value> {
    let mut out: Vec<Vec<Value>> = vec![vec![]];
    for p in parts {
        let mut next = Vec::with_capacity(out.len() * p.len());
        for prefix in &out {
            for v in p {
                let mut row = prefix.clone();
                row.push(v.clone());
                next.push(row);
            }
        }
        out = next;
    }
    out.into_iter().map(Value::tuple).collect()
}

/// Check monotonicity of `e` in argument `arg` (0 = Input, k >= 1 =
/// ChildOut(k)). Deterministic for a fixed cfg and salt.
#[allow(clippy::too_many_arguments)]
pub fn check_monotone(
    e: &Expr,
    arg: usize,
    input_sort: &SemType,
    child_out_sorts: &[SemType],
    out_order: &AtomicOrder,
    oa: &OrderAssignment,
    cfg: &SampleCfg,
    salt: u64,
) -> Direction {
    // An argument the expression never reads is trivially constant.
    if !e.references_arg(arg) {
        return Direction::Both;
    }
    let arg_sort = if arg == 0 { input_sort.clone() } else { child_out_sorts[arg - 1].clone() };
    let arg_order = oa.order_for(&arg_sort);

    let mut inc = true;
    let mut dec = true;
    // frozen sorts: every argument except `arg`; input first when frozen
    let mut frozen_sorts: Vec<SemType> = Vec::new();
    if arg != 0 {
        frozen_sorts.push(input_sort.clone());
    }
    for (k, s) in child_out_sorts.iter().enumerate() {
        if k + 1 != arg {
            frozen_sorts.push(s.clone());
        }
    }

    // one comparable pair against one frozen vector: does each direction hold?
    let run = |a: &Value, b: &Value, frozen: &[Value]| -> (bool, bool) {
        let mut outs_a: Vec<&Value> = Vec::with_capacity(child_out_sorts.len());
        let mut fi = if arg == 0 { 0 } else { 1 };
        for k in 1..=child_out_sorts.len() {
            if k == arg {
                outs_a.push(a);
            } else {
                outs_a.push(&frozen[fi]);
                fi += 1;
            }
        }
        let input_a: &Value = if arg == 0 { a } else { &frozen[0] };
        let dim = input_a.matrix_dim().or(a.matrix_dim()).unwrap_or(cfg.matrix_dim);
        let fa = eval_expr(e, &Env { input: input_a, child_outs: &outs_a, dim });
        let mut outs_b = outs_a.clone();
        if arg >= 1 {
            outs_b[arg - 1] = b;
        }
        let input_b: &Value = if arg == 0 { b } else { &frozen[0] };
        let fb = eval_expr(e, &Env { input: input_b, child_outs: &outs_b, dim });
        match (fa, fb) {
            (Ok(fa), Ok(fb)) => (
                leq(out_order, &fa, &fb).unwrap_or(false),
                leq(out_order, &fb, &fa).unwrap_or(false),
            ),
            // evaluation failure on the sample domain: claim nothing
            _ => (false, false),
        }
    };

    let pair_domain = cfg.domain(&arg_sort);
    let frozen_domains: Vec<Vec<Value>> = frozen_sorts.iter().map(|s| cfg.domain(s)).collect();
    let frozen_total: usize = frozen_domains
        .iter()
        .try_fold(1usize, |acc, d| acc.checked_mul(d.len().max(1)))
        .unwrap_or(usize::MAX);
    let exhaustive = !pair_domain.is_empty()
        && frozen_domains.iter().all(|d| !d.is_empty())
        && pair_domain
            .len()
            .checked_mul(pair_domain.len())
            .and_then(|p| p.checked_mul(frozen_total))
            .map(|total| total <= cfg.budget)
            .unwrap_or(false);

    if exhaustive {
        let mut frozen_vectors: Vec<Vec<Value>> = vec![vec![]];
        for d in &frozen_domains {
            let mut next = Vec::with_capacity(frozen_vectors.len() * d.len());
            for prefix in &frozen_vectors {
                for v in d {
                    let mut row = prefix.clone();
                    row.push(v.clone());
                    next.push(row);
                }
            }
            frozen_vectors = next;
        }
        for a in &pair_domain {
            for b in &pair_domain {
                if leq(&arg_order, a, b) != Ok(true) {
                    continue;
                }
                for fv in &frozen_vectors {
                    let (i_ok, d_ok) = run(a, b, fv);
                    inc &= i_ok;
                    dec &= d_ok;
                    if !inc && !dec {
                        return Direction::None;
                    }
                }
            }
        }
    } else {
        let mut rng =
            ChaCha8Rng::seed_from_u64(cfg.seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        for _ in 0..cfg.budget.min(4000) {
            let a = cfg.sample_value(&arg_sort, &mut rng);
            let b = cfg.sample_above(&arg_order, &a, &mut rng);
            let fv: Vec<Value> =
                frozen_sorts.iter().map(|s| cfg.sample_value(s, &mut rng)).collect();
            let (i_ok, d_ok) = run(&a, &b, &fv);
            inc &= i_ok;
            dec &= d_ok;
            if !inc && !dec {
                return Direction::None;
            }
        }
    }

    match (inc, dec) {
        (true, true) => Direction::Both,
        (true, false) => Direction::Inc,
        (false, true) => Direction::Dec,
        (false, false) => Direction::None,
    }
}

/// Direction vector and verification tag for one rule expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExprDirections {
    /// One direction per argument: Input first, then each child output.
    pub dirs: Vec<Direction>,
    pub tag: VerifyTag,
    pub sample: String,
}

impl ExprDirections {
    pub fn fully_monotone(&self) -> bool {
        self.dirs.iter().all(|d| d.is_monotone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleProfile {
    pub child_inputs: Vec<ExprDirections>,
    pub output: ExprDirections,
}

impl RuleProfile {
    pub fn expressions(&self) -> impl Iterator<Item = &ExprDirections> {
        self.child_inputs.iter().chain(std::iter::once(&self.output))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductionProfile {
    pub operator: String,
    pub rules: Vec<RuleProfile>,
    /// Recursive productions are never claimed monotone.
    pub forced_top: bool,
}

impl ProductionProfile {
    pub fn monotone(&self) -> bool {
        !self.forced_top && self.rules.iter().all(|r| r.expressions().all(|e| e.fully_monotone()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonotonicityProfile {
    pub order: OrderAssignment,
    pub productions: Vec<ProductionProfile>,
}

impl MonotonicityProfile {
    pub fn monotone_count(&self) -> usize {
        self.productions.iter().filter(|p| p.monotone()).count()
    }
}

fn analyze_production(
    g: &crate::grammar::Grammar,
    prod: &Production,
    idx: usize,
    oa: &OrderAssignment,
    cfg: &SampleCfg,
) -> ProductionProfile {
    let input_sort = &g.nt(prod.lhs).input_type;
    let out_sorts: Vec<SemType> =
        prod.children.iter().map(|c| g.nt(*c).output_type.clone()).collect();
    let n_args = 1 + prod.children.len();

    if prod.recursive {
        let mk = || ExprDirections {
            dirs: vec![Direction::None; n_args],
            tag: VerifyTag::BruteForce,
            sample: "recursive production: forced non-monotone".into(),
        };
        return ProductionProfile {
            operator: prod.operator.clone(),
            rules: prod
                .rules
                .iter()
                .map(|r| RuleProfile {
                    child_inputs: r.child_inputs.iter().map(|_| mk()).collect(),
                    output: mk(),
                })
                .collect(),
            forced_top: true,
        };
    }

    let profile_expr = |e: &Expr, out_sort: &SemType, salt: u64| -> ExprDirections {
        let out_order = oa.order_for(out_sort);
        let dirs = (0..n_args)
            .map(|arg| {
                check_monotone(
                    e,
                    arg,
                    input_sort,
                    &out_sorts,
                    &out_order,
                    oa,
                    cfg,
                    salt.wrapping_add(arg as u64),
                )
            })
            .collect();
        ExprDirections { dirs, tag: VerifyTag::BruteForce, sample: cfg.describe() }
    };

    let rules = prod
        .rules
        .iter()
        .enumerate()
        .map(|(ri, rule)| {
            let base = (idx as u64) << 24 | (ri as u64) << 16;
            RuleProfile {
                child_inputs: rule
                    .child_inputs
                    .iter()
                    .enumerate()
                    .map(|(ei, e)| {
                        profile_expr(
                            e,
                            &g.nt(prod.children[ei]).input_type,
                            base | (ei as u64) << 8,
                        )
                    })
                    .collect(),
                output: profile_expr(&rule.output, &g.nt(prod.lhs).output_type, base | 0xFF00),
            }
        })
        .collect();

    ProductionProfile { operator: prod.operator.clone(), rules, forced_top: false }
}

/// Profile every production of the problem under the order assignment.
/// Productions are independent, so the work fans out over the rayon pool.
pub fn analyze(p: &Problem, oa: &OrderAssignment, cfg: &SampleCfg) -> MonotonicityProfile {
    let productions: Vec<ProductionProfile> = p
        .grammar
        .productions
        .par_iter()
        .enumerate()
        .map(|(i, prod)| analyze_production(&p.grammar, prod, i, oa, cfg))
        .collect();
    MonotonicityProfile { order: oa.clone(), productions }
}

/// Enumerate candidate assignments and keep the one making the most
/// productions monotone; ties break toward the earlier candidate.
pub fn synthesize_orders(
    p: &Problem,
    candidates: &[OrderAssignment],
    cfg: &SampleCfg,
) -> (OrderAssignment, MonotonicityProfile) {
    assert!(!candidates.is_empty());
    let mut best: Option<(usize, OrderAssignment, MonotonicityProfile)> = None;
    for oa in candidates {
        let profile = analyze(p, oa, cfg);
        let count = profile.monotone_count();
        match &best {
            Some((c, _, _)) if *c >= count => {}
            _ => best = Some((count, oa.clone(), profile)),
        }
    }
    let (_, oa, profile) = best.unwrap();
    (oa, profile)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders;

    #[test]
    fn leq_basics() {
        assert_eq!(
            leq(&AtomicOrder::BoolImplies, &Value::Bool(false), &Value::Bool(true)),
            Ok(true)
        );
        assert_eq!(
            leq(&AtomicOrder::BoolImplies, &Value::Bool(true), &Value::Bool(false)),
            Ok(false)
        );
        assert_eq!(
            leq(&AtomicOrder::BvBitwise, &Value::bitvec(4, 0b0101), &Value::bitvec(4, 0b0111)),
            Ok(true)
        );
        assert_eq!(
            leq(&AtomicOrder::BvBitwise, &Value::bitvec(4, 0b0101), &Value::bitvec(4, 0b0011)),
            Ok(false)
        );
        // -inf <= v <= +inf under intLeq
        assert_eq!(
            leq(&AtomicOrder::IntLeq, &Value::Int(ExtInt::NegInf), &Value::int(-100)),
            Ok(true)
        );
        assert_eq!(
            leq(&AtomicOrder::IntLeq, &Value::int(100), &Value::Int(ExtInt::PosInf)),
            Ok(true)
        );
        assert!(leq(&AtomicOrder::IntLeq, &Value::Bool(true), &Value::int(0)).is_err());
    }

    #[test]
    fn matrix_order_bounds() {
        let z = Value::matrix(BoolMatrix::zero(3));
        let o = Value::matrix(BoolMatrix::ones(3));
        let i = Value::matrix(BoolMatrix::identity(3));
        assert_eq!(leq(&AtomicOrder::MatrixEntrywise, &z, &o), Ok(true));
        assert_eq!(leq(&AtomicOrder::MatrixEntrywise, &z, &i), Ok(true));
        assert_eq!(leq(&AtomicOrder::MatrixEntrywise, &i, &o), Ok(true));
        assert_eq!(leq(&AtomicOrder::MatrixEntrywise, &o, &i), Ok(false));
    }

    fn sample_values(cfg: &SampleCfg, sort: &SemType, n: usize, seed: u64) -> Vec<Value> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dom = cfg.domain(sort);
        (0..n)
            .map(|_| {
                if dom.is_empty() {
                    cfg.sample_value(sort, &mut rng)
                } else {
                    dom[rng.gen_range(0..dom.len())].clone()
                }
            })
            .collect()
    }

    #[test]
    fn partial_order_axioms_on_samples() {
        let cfg = SampleCfg::default();
        let cases: Vec<(AtomicOrder, SemType)> = vec![
            (AtomicOrder::IntLeq, SemType::Int),
            (AtomicOrder::BoolImplies, SemType::Bool),
            (AtomicOrder::BvBitwise, SemType::BitVec(6)),
            (AtomicOrder::BvUnsignedLeq, SemType::BitVec(6)),
            (AtomicOrder::MatrixEntrywise, SemType::BoolMatrix),
            (
                AtomicOrder::TuplePointwise(vec![AtomicOrder::IntLeq, AtomicOrder::BoolImplies]),
                SemType::Tuple(vec![SemType::Int, SemType::Bool]),
            ),
        ];
        for (order, sort) in cases {
            let vals = sample_values(&cfg, &sort, 10_000, 11);
            for v in &vals {
                assert_eq!(leq(&order, v, v), Ok(true), "{order:?}");
            }
            let mut rng = ChaCha8Rng::seed_from_u64(12);
            for _ in 0..10_000 {
                let a = &vals[rng.gen_range(0..vals.len())];
                let b = &vals[rng.gen_range(0..vals.len())];
                let c = &vals[rng.gen_range(0..vals.len())];
                if leq(&order, a, b) == Ok(true) && leq(&order, b, a) == Ok(true) {
                    assert_eq!(a, b, "antisymmetry under {order:?}");
                }
                if leq(&order, a, b) == Ok(true) && leq(&order, b, c) == Ok(true) {
                    assert_eq!(leq(&order, a, c), Ok(true), "transitivity under {order:?}");
                }
            }
        }
    }

    #[test]
    fn meet_join_are_bounds() {
        let cfg = SampleCfg::default();
        let order =
            AtomicOrder::TuplePointwise(vec![AtomicOrder::IntLeq, AtomicOrder::BvBitwise]);
        let sort = SemType::Tuple(vec![SemType::Int, SemType::BitVec(3)]);
        let vals = sample_values(&cfg, &sort, 500, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..2000 {
            let a = &vals[rng.gen_range(0..vals.len())];
            let b = &vals[rng.gen_range(0..vals.len())];
            let m = value_meet(&order, a, b).unwrap();
            let j = value_join(&order, a, b).unwrap();
            assert_eq!(leq(&order, &m, a), Ok(true));
            assert_eq!(leq(&order, &m, b), Ok(true));
            assert_eq!(leq(&order, a, &j), Ok(true));
            assert_eq!(leq(&order, b, &j), Ok(true));
        }
    }

    #[test]
    fn add_sub_and_ite_directions() {
        let oa = OrderAssignment::default();
        let cfg = SampleCfg::default();
        let state = SemType::Tuple(vec![SemType::Int, SemType::Int]);
        let kids = [SemType::Int, SemType::Int];
        let add = Expr::Add(Box::new(Expr::ChildOut(1)), Box::new(Expr::ChildOut(2)));
        let sub = Expr::Sub(Box::new(Expr::ChildOut(1)), Box::new(Expr::ChildOut(2)));
        let out = AtomicOrder::IntLeq;
        assert_eq!(check_monotone(&add, 1, &state, &kids, &out, &oa, &cfg, 0), Direction::Inc);
        assert_eq!(check_monotone(&add, 0, &state, &kids, &out, &oa, &cfg, 0), Direction::Both);
        assert_eq!(check_monotone(&sub, 2, &state, &kids, &out, &oa, &cfg, 0), Direction::Dec);
        assert_eq!(check_monotone(&sub, 1, &state, &kids, &out, &oa, &cfg, 0), Direction::Inc);

        // ite guard is non-monotone; x*x is non-monotone over [-3,3]
        let ite = Expr::Ite(
            Box::new(Expr::ChildOut(1)),
            Box::new(Expr::ChildOut(2)),
            Box::new(Expr::ChildOut(3)),
        );
        let ite_kids = [SemType::Bool, SemType::Int, SemType::Int];
        assert_eq!(
            check_monotone(&ite, 1, &state, &ite_kids, &out, &oa, &cfg, 0),
            Direction::None
        );
        assert_eq!(check_monotone(&ite, 2, &state, &ite_kids, &out, &oa, &cfg, 0), Direction::Inc);
        let square = Expr::Mul(Box::new(Expr::ChildOut(1)), Box::new(Expr::ChildOut(1)));
        assert_eq!(
            check_monotone(&square, 1, &state, &[SemType::Int], &out, &oa, &cfg, 0),
            Direction::None
        );
    }

    #[test]
    fn fig1_grammar_is_fully_monotone() {
        let p = builders::imp_fig1();
        let profile = analyze(&p, &OrderAssignment::default(), &SampleCfg::default());
        assert_eq!(profile.monotone_count(), 9);
        let sub = profile.productions.iter().find(|pp| pp.operator == "sub").unwrap();
        assert_eq!(
            sub.rules[0].output.dirs,
            vec![Direction::Both, Direction::Inc, Direction::Dec]
        );
    }

    #[test]
    fn bitvec_order_synthesis_prefers_bitwise() {
        let p = builders::bitvec_order_toy();
        let cfg = SampleCfg::default();
        let bw = OrderAssignment { bitvec: AtomicOrder::BvBitwise, ..OrderAssignment::default() };
        let ul =
            OrderAssignment { bitvec: AtomicOrder::BvUnsignedLeq, ..OrderAssignment::default() };
        let prof_bw = analyze(&p, &bw, &cfg);
        let prof_ul = analyze(&p, &ul, &cfg);
        assert_eq!(prof_bw.monotone_count(), 2, "{:?}", prof_bw.productions);
        assert_eq!(prof_ul.monotone_count(), 1, "{:?}", prof_ul.productions);

        let (best, profile) = synthesize_orders(&p, &[bw.clone(), ul], &cfg);
        assert_eq!(best, bw);
        assert_eq!(profile.monotone_count(), 2);
        // optimality is directly assertable by recomputation
        for oa in candidate_assignments(&p) {
            assert!(analyze(&p, &oa, &cfg).monotone_count() <= profile.monotone_count());
        }
    }

    #[test]
    fn boolean_grammar_fully_monotone_including_negated_literals() {
        let table: Vec<(Vec<bool>, bool)> = (0..4u32)
            .map(|b| {
                let x = b & 1 == 1;
                let y = b >> 1 & 1 == 1;
                (vec![x, y], x && !y)
            })
            .collect();
        let p = builders::boolean_problem("cube2", builders::BooleanStyle::Cube, 2, &table);
        let profile = analyze(&p, &OrderAssignment::default(), &SampleCfg::default());
        // literal negation is order-reversing, which still counts as monotone
        assert_eq!(profile.monotone_count(), p.grammar.productions.len());
        let neg = profile.productions.iter().find(|pp| pp.operator == "not-x0").unwrap();
        assert_eq!(neg.rules[0].output.dirs, vec![Direction::Dec]);
    }

    #[test]
    fn regex_grammar_fully_monotone_with_dec_negation() {
        let p = builders::regex_fig5();
        let profile = analyze(&p, &OrderAssignment::default(), &SampleCfg::default());
        assert_eq!(profile.monotone_count(), p.grammar.productions.len());
        let neg = profile.productions.iter().find(|pp| pp.operator == "neg").unwrap();
        assert_eq!(neg.rules[0].output.dirs, vec![Direction::Both, Direction::Dec]);
    }

    #[test]
    fn recursive_productions_are_forced_non_monotone() {
        let p = builders::imp_loop();
        let profile = analyze(&p, &OrderAssignment::default(), &SampleCfg::default());
        let w = profile.productions.iter().find(|pp| pp.operator == "while").unwrap();
        assert!(w.forced_top && !w.monotone());
        assert_eq!(profile.monotone_count(), p.grammar.productions.len() - 1);
    }

    #[test]
    fn verdicts_stable_under_reseeded_second_pass() {
        // sampled verdicts must agree across two independent passes
        let p = builders::bitvec_order_toy();
        for oa in candidate_assignments(&p) {
            let a = analyze(&p, &oa, &SampleCfg { seed: 7, ..SampleCfg::default() });
            let b = analyze(&p, &oa, &SampleCfg { seed: 99, ..SampleCfg::default() });
            for (pa, pb) in a.productions.iter().zip(&b.productions) {
                for (ra, rb) in pa.rules.iter().zip(&pb.rules) {
                    assert_eq!(ra.output.dirs, rb.output.dirs, "{}", pa.operator);
                }
            }
        }
    }
}
