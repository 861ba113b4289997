//! Interval abstract semantics derived from the concrete rules.
//!
//! Every rule expression is compiled to one of three transformers:
//!
//! * `Endpoint` when its direction vector is fully monotone: the concrete
//!   expression is evaluated twice, once at the per-argument lower-bound
//!   endpoints and once at the upper-bound endpoints (increasing arguments
//!   take lo/hi, decreasing arguments hi/lo, constant arguments lo).
//! * `Joined` when the only non-monotone arguments range over small finite
//!   sorts: the endpoint transformer is joined over every concrete
//!   instantiation of those arguments.
//! * `Top` otherwise: the widest interval of the output sort.
//!
//! Abstract evaluation mirrors the concrete evaluator over partial
//! programs; holes read from a `HoleTable` keyed by exact input interval
//! and default to top.

use std::collections::HashMap;
use std::sync::Arc;

use log::debug;

use crate::expr::{eval_expr, Env, EvalError, Expr};
use crate::grammar::{Grammar, NtId, Term};
use crate::interval::{
    enumerate_members, interval_join, member, top_interval, top_value_hi, top_value_lo, Interval,
};
use crate::order::{AtomicOrder, Direction, MonotonicityProfile, OrderAssignment};
use crate::problem::Problem;
use crate::value::{SemType, Value};

/// Compiled abstract transformer for one rule expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AbsExpr {
    Endpoint { dirs: Vec<Direction> },
    Joined { dirs: Vec<Direction>, enum_args: Vec<usize> },
    Top,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbsRule {
    pub child_inputs: Vec<AbsExpr>,
    pub output: AbsExpr,
}

/// The compiled interval semantics of a whole problem.
#[derive(Debug, Clone)]
pub struct AbstractSemantics {
    pub oa: OrderAssignment,
    /// Indexed like `grammar.productions`, then by rule.
    pub rules: Vec<Vec<AbsRule>>,
    /// Cap on instantiations a Joined argument may enumerate.
    pub joined_cap: usize,
    /// Fuel for the concrete fast path on complete subterms.
    pub fast_fuel: u32,
    /// Per-nonterminal input/output orders (indexed by NtId).
    nt_in_orders: Vec<Arc<AtomicOrder>>,
    nt_out_orders: Vec<Arc<AtomicOrder>>,
    /// Hole-top intervals per nonterminal, tagged by matrix dim.
    tops: std::cell::RefCell<Vec<Vec<(u32, Interval)>>>,
}

impl AbstractSemantics {
    pub fn in_order(&self, nt: NtId) -> &Arc<AtomicOrder> {
        &self.nt_in_orders[nt.0 as usize]
    }

    pub fn out_order(&self, nt: NtId) -> &Arc<AtomicOrder> {
        &self.nt_out_orders[nt.0 as usize]
    }

    /// Top interval of a nonterminal's output sort, cached per dimension.
    pub fn hole_top(&self, g: &Grammar, nt: NtId, dim: u32) -> Interval {
        let slot = nt.0 as usize;
        {
            let tops = self.tops.borrow();
            if let Some(bucket) = tops.get(slot) {
                if let Some((_, iv)) = bucket.iter().find(|(d, _)| *d == dim) {
                    return iv.clone();
                }
            }
        }
        let iv = top_interval(&g.nt(nt).output_type, &self.oa, dim);
        let mut tops = self.tops.borrow_mut();
        if tops.len() <= slot {
            tops.resize_with(slot + 1, Vec::new);
        }
        tops[slot].push((dim, iv.clone()));
        iv
    }
}

/// Hole abstractions keyed by (nonterminal, exact input interval).
/// Example inputs enter as point intervals; anything missing reads as top.
/// Tables stay tiny (one entry per nonterminal and example), so lookups are
/// linear scans over per-nonterminal buckets.
#[derive(Debug, Clone, Default)]
pub struct HoleTable {
    buckets: Vec<Vec<(Value, Value, Interval)>>,
}

impl HoleTable {
    pub fn empty() -> HoleTable {
        HoleTable::default()
    }

    pub fn insert(&mut self, nt: NtId, input: &Interval, out: Interval) {
        if let Some((lo, hi)) = input.bounds() {
            let slot = nt.0 as usize;
            if self.buckets.len() <= slot {
                self.buckets.resize_with(slot + 1, Vec::new);
            }
            let bucket = &mut self.buckets[slot];
            if let Some(entry) =
                bucket.iter_mut().find(|(l, h, _)| l == lo && h == hi)
            {
                entry.2 = out;
            } else {
                bucket.push((lo.clone(), hi.clone(), out));
            }
        }
    }

    pub fn get(&self, nt: NtId, input: &Interval) -> Option<&Interval> {
        let (lo, hi) = input.bounds()?;
        let bucket = self.buckets.get(nt.0 as usize)?;
        bucket.iter().find(|(l, h, _)| l == lo && h == hi).map(|(_, _, iv)| iv)
    }

    pub fn len(&self) -> usize {
        self.buckets.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = (NtId, &Value, &Value, &Interval)> {
        self.buckets.iter().enumerate().flat_map(|(slot, bucket)| {
            bucket
                .iter()
                .map(move |(lo, hi, iv)| (NtId(slot as u32), lo, hi, iv))
        })
    }
}

fn classify(
    dirs: &[Direction],
    arg_sort: impl Fn(usize) -> SemType,
    joined_cap: usize,
) -> AbsExpr {
    if dirs.iter().all(|d| d.is_monotone()) {
        return AbsExpr::Endpoint { dirs: dirs.to_vec() };
    }
    let enum_args: Vec<usize> = dirs
        .iter()
        .enumerate()
        .filter(|(_, d)| !d.is_monotone())
        .map(|(i, _)| i)
        .collect();
    let all_finite = enum_args
        .iter()
        .all(|&i| arg_sort(i).cardinality(joined_cap as u64).is_some());
    if all_finite {
        AbsExpr::Joined { dirs: dirs.to_vec(), enum_args }
    } else {
        AbsExpr::Top
    }
}

/// Compile every rule of the problem against a monotonicity profile.
pub fn compile_abstract(
    p: &Problem,
    profile: &MonotonicityProfile,
    joined_cap: usize,
) -> AbstractSemantics {
    let g = &p.grammar;
    let rules = g
        .productions
        .iter()
        .zip(&profile.productions)
        .map(|(prod, pp)| {
            if pp.forced_top || prod.recursive {
                return prod
                    .rules
                    .iter()
                    .map(|r| AbsRule {
                        child_inputs: vec![AbsExpr::Top; r.child_inputs.len()],
                        output: AbsExpr::Top,
                    })
                    .collect();
            }
            let input_sort = &g.nt(prod.lhs).input_type;
            let arg_sort = |i: usize| -> SemType {
                if i == 0 {
                    input_sort.clone()
                } else {
                    g.nt(prod.children[i - 1]).output_type.clone()
                }
            };
            prod.rules
                .iter()
                .zip(&pp.rules)
                .map(|(_, rp)| AbsRule {
                    child_inputs: rp
                        .child_inputs
                        .iter()
                        .map(|ed| classify(&ed.dirs, arg_sort, joined_cap))
                        .collect(),
                    output: classify(&rp.output.dirs, arg_sort, joined_cap),
                })
                .collect()
        })
        .collect();
    let nt_in_orders = g
        .nonterminals
        .iter()
        .map(|d| profile.order.order_for_arc(&d.input_type))
        .collect();
    let nt_out_orders = g
        .nonterminals
        .iter()
        .map(|d| profile.order.order_for_arc(&d.output_type))
        .collect();
    AbstractSemantics {
        oa: profile.order.clone(),
        rules,
        joined_cap,
        fast_fuel: crate::semantics::DEFAULT_FUEL,
        nt_in_orders,
        nt_out_orders,
        tops: Default::default(),
    }
}

fn endpoint_env_value<'a>(d: Direction, lo: &'a Value, hi: &'a Value, upper: bool) -> &'a Value {
    match (d, upper) {
        (Direction::Inc, false) | (Direction::Dec, true) => lo,
        (Direction::Inc, true) | (Direction::Dec, false) => hi,
        // constant arguments read the lower endpoint on both sides
        (Direction::Both, _) => lo,
        (Direction::None, _) => unreachable!("None direction reached endpoint evaluation"),
    }
}

fn eval_at(
    e: &Expr,
    dirs: &[Direction],
    args: &[&Interval],
    upper: bool,
    out_sort: &SemType,
    oa: &OrderAssignment,
    dim: u32,
) -> Value {
    let vals: arrayvec::ArrayVec<&Value, 8> = dirs
        .iter()
        .zip(args)
        .map(|(d, iv)| {
            let (lo, hi) = iv.bounds().expect("empty interval filtered before endpoint eval");
            endpoint_env_value(*d, lo, hi, upper)
        })
        .collect();
    let env = Env { input: vals[0], child_outs: &vals[1..], dim };
    match eval_expr(e, &env) {
        Ok(v) => v,
        Err(EvalError::Indeterminate) => {
            // inf - inf: widen just this bound to the top endpoint
            if upper {
                top_value_hi(out_sort, oa, dim)
            } else {
                top_value_lo(out_sort, oa, dim)
            }
        }
        Err(err) => {
            debug!("abstract endpoint evaluation fell back to top: {err}");
            if upper {
                top_value_hi(out_sort, oa, dim)
            } else {
                top_value_lo(out_sort, oa, dim)
            }
        }
    }
}

/// Endpoint extension of a fully monotone expression. Any empty argument
/// yields the empty interval.
pub fn endpoint_apply(
    e: &Expr,
    dirs: &[Direction],
    args: &[&Interval],
    out_sort: &SemType,
    out_order: &Arc<AtomicOrder>,
    oa: &OrderAssignment,
    dim: u32,
) -> Interval {
    debug_assert_eq!(dirs.len(), args.len());
    if args.iter().any(|iv| iv.is_empty()) {
        return Interval::Empty;
    }
    // all-point arguments collapse both endpoint evaluations into one;
    // evaluation errors (indeterminate endpoint arithmetic) fall through to
    // the two-sided path, which widens each bound separately
    if args.iter().all(|iv| iv.as_point().is_some()) {
        let vals: arrayvec::ArrayVec<&Value, 8> =
            args.iter().map(|iv| iv.as_point().unwrap()).collect();
        let env = Env { input: vals[0], child_outs: &vals[1..], dim };
        if let Ok(v) = eval_expr(e, &env) {
            return Interval::point(v, out_order.clone());
        }
    }
    let lo = eval_at(e, dirs, args, false, out_sort, oa, dim);
    let hi = eval_at(e, dirs, args, true, out_sort, oa, dim);
    let order = out_order.clone();
    match Interval::new(lo.clone(), hi.clone(), order.clone()) {
        Ok(iv) => iv,
        Err(_) => {
            // Only reachable if a sampled direction was wrong; normalize.
            debug!("endpoint bounds out of order for {e}; widening");
            let lo2 = crate::order::value_meet(&order, &lo, &hi).unwrap_or(lo);
            let hi2 = crate::order::value_join(&order, &lo2, &hi).unwrap_or(hi);
            Interval::Pair { lo: lo2, hi: hi2, order }
        }
    }
}

/// Join of endpoint applications over every concrete instantiation of the
/// non-monotone finite arguments. Empty if any enumerated argument interval
/// is empty; `None` when an instantiation set exceeds the cap (caller takes
/// top).
#[allow(clippy::too_many_arguments)]
pub fn joined_apply(
    e: &Expr,
    dirs: &[Direction],
    enum_args: &[usize],
    args: &[&Interval],
    out_sort: &SemType,
    out_order: &Arc<AtomicOrder>,
    oa: &OrderAssignment,
    dim: u32,
    cap: usize,
) -> Option<Interval> {
    if args.iter().any(|iv| iv.is_empty()) {
        return Some(Interval::Empty);
    }
    // candidate values per enumerated argument
    let mut choice_sets: Vec<Vec<Value>> = Vec::with_capacity(enum_args.len());
    for &i in enum_args {
        choice_sets.push(enumerate_members(args[i], cap)?);
    }
    let mut dirs2 = dirs.to_vec();
    for &i in enum_args {
        dirs2[i] = Direction::Both;
    }
    let mut acc = Interval::Empty;
    let mut idx = vec![0usize; enum_args.len()];
    loop {
        let points: Vec<Interval> = enum_args
            .iter()
            .zip(&idx)
            .map(|(&i, &k)| {
                Interval::point(
                    choice_sets[enum_args.iter().position(|&x| x == i).unwrap()][k].clone(),
                    args[i].order().unwrap().clone(),
                )
            })
            .collect();
        let mut inst: Vec<&Interval> = args.to_vec();
        for (slot, &i) in enum_args.iter().enumerate() {
            inst[i] = &points[slot];
        }
        let one = endpoint_apply(e, &dirs2, &inst, out_sort, out_order, oa, dim);
        acc = interval_join(&acc, &one).ok()?;
        // odometer over choice sets
        let mut carry = true;
        for k in (0..idx.len()).rev() {
            if !carry {
                break;
            }
            idx[k] += 1;
            if idx[k] < choice_sets[k].len() {
                carry = false;
            } else {
                idx[k] = 0;
            }
        }
        if carry {
            break;
        }
    }
    Some(acc)
}

/// Apply one compiled transformer to argument intervals.
#[allow(clippy::too_many_arguments)]
pub(crate) fn abs_apply(
    e: &Expr,
    abs: &AbsExpr,
    args: &[&Interval],
    out_sort: &SemType,
    out_order: &Arc<AtomicOrder>,
    oa: &OrderAssignment,
    dim: u32,
    joined_cap: usize,
) -> Interval {
    match abs {
        AbsExpr::Top => {
            if args.iter().any(|iv| iv.is_empty()) {
                Interval::Empty
            } else {
                top_interval(out_sort, oa, dim)
            }
        }
        AbsExpr::Endpoint { dirs } => {
            endpoint_apply(e, &dirs[..args.len()], args, out_sort, out_order, oa, dim)
        }
        AbsExpr::Joined { dirs, enum_args } => {
            debug_assert!(enum_args.iter().all(|&i| i < args.len()));
            joined_apply(
                e,
                &dirs[..args.len()],
                enum_args,
                args,
                out_sort,
                out_order,
                oa,
                dim,
                joined_cap,
            )
            .unwrap_or_else(|| top_interval(out_sort, oa, dim))
        }
    }
}

/// Abstract evaluation of a (partial) program on an input interval.
///
/// Holes read their abstraction from `holes` when the table has an entry
/// for the exact input interval and fall back to the top interval of the
/// hole's output sort. Multiple rules join their results; when the input is
/// a point the guards select rules exactly as concrete evaluation does.
pub fn abstract_eval(
    g: &Grammar,
    abs: &AbstractSemantics,
    t: &Term,
    input: &Interval,
    holes: &HoleTable,
) -> Interval {
    let dim = input
        .bounds()
        .and_then(|(lo, _)| lo.matrix_dim())
        .unwrap_or(0);
    abstract_eval_at(g, abs, t, input, holes, dim)
}

fn abstract_eval_at(
    g: &Grammar,
    abs: &AbstractSemantics,
    t: &Term,
    input: &Interval,
    holes: &HoleTable,
    dim: u32,
) -> Interval {
    if input.is_empty() {
        return Interval::Empty;
    }
    // A complete subterm on a point input abstracts to the exact point of
    // its concrete value; evaluation errors fall through to the sound path.
    if t.is_complete() {
        if let Some(pt) = input.as_point() {
            if let Ok(v) = crate::semantics::eval(g, t, pt, abs.fast_fuel) {
                let order = abs.out_order(t.root_nt(g)).clone();
                return Interval::point(v, order);
            }
        }
    }
    match t {
        Term::Hole(nt) => match holes.get(*nt, input) {
            Some(iv) => iv.clone(),
            None => abs.hole_top(g, *nt, dim),
        },
        Term::Node { prod, children, .. } => {
            let p = g.prod(*prod);
            if p.recursive {
                return abs.hole_top(g, p.lhs, dim);
            }
            let abs_rules = &abs.rules[prod.0 as usize];

            // rule selection: exact on point inputs, join over all otherwise
            let selected: Vec<usize> = if let Some(point) = input.as_point() {
                let env = Env { input: point, child_outs: &[], dim };
                let mut chosen = None;
                for (ri, rule) in p.rules.iter().enumerate() {
                    let applies = match &rule.guard {
                        None => true,
                        Some(gexpr) => {
                            matches!(eval_expr(gexpr, &env), Ok(Value::Bool(true)))
                        }
                    };
                    if applies {
                        chosen = Some(ri);
                        break;
                    }
                }
                match chosen {
                    Some(ri) => vec![ri],
                    None => return Interval::Empty,
                }
            } else {
                (0..p.rules.len()).collect()
            };

            let mut acc = Interval::Empty;
            for ri in selected {
                let rule = &p.rules[ri];
                let abs_rule = &abs_rules[ri];
                let mut child_outs: Vec<Interval> = Vec::with_capacity(children.len());
                let mut empty_cut = false;
                for (i, child) in children.iter().enumerate() {
                    // arguments visible to child i's input wiring
                    let mut args: Vec<&Interval> = Vec::with_capacity(1 + i);
                    args.push(input);
                    args.extend(child_outs.iter().take(i));
                    let child_in_sort = &g.nt(p.children[i]).input_type;
                    let child_input = abs_apply(
                        &rule.child_inputs[i],
                        &abs_rule.child_inputs[i],
                        &args,
                        child_in_sort,
                        abs.in_order(p.children[i]),
                        &abs.oa,
                        dim,
                        abs.joined_cap,
                    );
                    if child_input.is_empty() {
                        empty_cut = true;
                        child_outs.push(Interval::Empty);
                        break;
                    }
                    child_outs.push(abstract_eval_at(g, abs, child, &child_input, holes, dim));
                }
                let result = if empty_cut || child_outs.iter().any(Interval::is_empty) {
                    Interval::Empty
                } else {
                    let mut args: Vec<&Interval> = Vec::with_capacity(1 + children.len());
                    args.push(input);
                    args.extend(child_outs.iter());
                    abs_apply(
                        &rule.output,
                        &abs_rule.output,
                        &args,
                        &g.nt(p.lhs).output_type,
                        abs.out_order(p.lhs),
                        &abs.oa,
                        dim,
                        abs.joined_cap,
                    )
                };
                acc = interval_join(&acc, &result).unwrap_or(result);
            }
            acc
        }
    }
}

/// Point input interval for a concrete example input.
pub fn point_input(input: &Value, oa: &OrderAssignment) -> Interval {
    Interval::point(input.clone(), oa.order_for_arc(&input.sort()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders;
    use crate::grammar::parse_term;
    use crate::order::{analyze, AtomicOrder, SampleCfg};
    use crate::value::ExtInt;

    fn int_iv(a: i64, b: i64) -> Interval {
        Interval::new(Value::int(a), Value::int(b), Arc::new(AtomicOrder::IntLeq)).unwrap()
    }

    fn compiled(p: &Problem) -> AbstractSemantics {
        let profile = analyze(p, &OrderAssignment::default(), &SampleCfg::default());
        compile_abstract(p, &profile, 64)
    }

    #[test]
    fn endpoint_extension_of_subtraction() {
        // f(x, v1, v2) = v1 - v2, directions (Both, Inc, Dec):
        // on ([L,U], [6,7], [1,2]) the most precise interval is [4,6].
        let e = Expr::Sub(Box::new(Expr::ChildOut(1)), Box::new(Expr::ChildOut(2)));
        let oa = OrderAssignment::default();
        let input = int_iv(-100, 100);
        let a = int_iv(6, 7);
        let b = int_iv(1, 2);
        let out = endpoint_apply(
            &e,
            &[Direction::Both, Direction::Inc, Direction::Dec],
            &[&input, &a, &b],
            &SemType::Int,
            &Arc::new(AtomicOrder::IntLeq),
            &oa,
            0,
        );
        assert_eq!(out, int_iv(4, 6));

        let add = Expr::Add(Box::new(Expr::ChildOut(1)), Box::new(Expr::ChildOut(2)));
        let out = endpoint_apply(
            &add,
            &[Direction::Both, Direction::Inc, Direction::Inc],
            &[&input, &int_iv(1, 3), &int_iv(2, 5)],
            &SemType::Int,
            &Arc::new(AtomicOrder::IntLeq),
            &oa,
            0,
        );
        assert_eq!(out, int_iv(3, 8));

        // empty argument annihilates
        let out = endpoint_apply(
            &add,
            &[Direction::Both, Direction::Inc, Direction::Inc],
            &[&input, &Interval::Empty, &int_iv(2, 5)],
            &SemType::Int,
            &Arc::new(AtomicOrder::IntLeq),
            &oa,
            0,
        );
        assert_eq!(out, Interval::Empty);
    }

    #[test]
    fn endpoint_widens_on_indeterminate_arithmetic() {
        // (+inf) + (-inf) on the lower bound only widens that bound
        let e = Expr::Add(Box::new(Expr::ChildOut(1)), Box::new(Expr::ChildOut(2)));
        let oa = OrderAssignment::default();
        let order = Arc::new(AtomicOrder::IntLeq);
        let a = Interval::new(
            Value::Int(ExtInt::PosInf),
            Value::Int(ExtInt::PosInf),
            order.clone(),
        )
        .unwrap();
        let b = Interval::new(Value::Int(ExtInt::NegInf), Value::int(5), order).unwrap();
        let input = int_iv(0, 0);
        let out = endpoint_apply(
            &e,
            &[Direction::Both, Direction::Inc, Direction::Inc],
            &[&input, &a, &b],
            &SemType::Int,
            &Arc::new(AtomicOrder::IntLeq),
            &oa,
            0,
        );
        let (lo, hi) = out.bounds().unwrap();
        assert_eq!(lo, &Value::Int(ExtInt::NegInf));
        assert_eq!(hi, &Value::Int(ExtInt::PosInf));
    }

    #[test]
    fn joined_ite_over_boolean_guard() {
        let e = Expr::Ite(
            Box::new(Expr::ChildOut(1)),
            Box::new(Expr::ChildOut(2)),
            Box::new(Expr::ChildOut(3)),
        );
        let oa = OrderAssignment::default();
        let dirs = [Direction::Both, Direction::None, Direction::Inc, Direction::Inc];
        let input = int_iv(0, 0);
        let bool_order = Arc::new(AtomicOrder::BoolImplies);
        let guard_full =
            Interval::new(Value::Bool(false), Value::Bool(true), bool_order.clone()).unwrap();
        let s1 = int_iv(1, 2);
        let s2 = int_iv(5, 6);
        let out = joined_apply(
            &e,
            &dirs,
            &[1],
            &[&input, &guard_full, &s1, &s2],
            &SemType::Int,
            &Arc::new(AtomicOrder::IntLeq),
            &oa,
            0,
            64,
        )
        .unwrap();
        assert_eq!(out, int_iv(1, 6));

        // concrete guard keeps the taken branch only
        let guard_true = Interval::point(Value::Bool(true), bool_order.clone());
        let out = joined_apply(
            &e,
            &dirs,
            &[1],
            &[&input, &guard_true, &s1, &s2],
            &SemType::Int,
            &Arc::new(AtomicOrder::IntLeq),
            &oa,
            0,
            64,
        )
        .unwrap();
        assert_eq!(out, int_iv(1, 2));

        // empty guard interval annihilates
        let out = joined_apply(
            &e,
            &dirs,
            &[1],
            &[&input, &Interval::Empty, &s1, &s2],
            &SemType::Int,
            &Arc::new(AtomicOrder::IntLeq),
            &oa,
            0,
            64,
        )
        .unwrap();
        assert_eq!(out, Interval::Empty);
    }

    #[test]
    fn compilation_classes() {
        let p = builders::imp_fig1();
        let abs = compiled(&p);
        for rules in &abs.rules {
            for r in rules {
                assert!(matches!(r.output, AbsExpr::Endpoint { .. }));
            }
        }

        let p = builders::imp_ite();
        let abs = compiled(&p);
        let ite_prod = p.grammar.prod_by_operator(p.grammar.nt_by_name("M").unwrap(), "if").unwrap();
        match &abs.rules[ite_prod.0 as usize][0].output {
            AbsExpr::Joined { enum_args, .. } => assert_eq!(enum_args, &vec![1]),
            other => panic!("expected joined ite, got {other:?}"),
        }

        let p = builders::imp_loop();
        let abs = compiled(&p);
        let w = p.grammar.prod_by_operator(p.grammar.nt_by_name("S").unwrap(), "while").unwrap();
        assert_eq!(abs.rules[w.0 as usize][0].output, AbsExpr::Top);
    }

    #[test]
    fn partial_assignment_interval_excludes_target() {
        // x := 0; y := HOLE on point (4,2) with top holes
        let p = builders::imp_fig1();
        let g = &p.grammar;
        let abs = compiled(&p);
        let t = parse_term(g, "(seq (assign-x 0) (assign-y ?E))", g.start).unwrap();
        let input = point_input(&Value::pair(4, 2), &abs.oa);
        let out = abstract_eval(g, &abs, &t, &input, &HoleTable::empty());
        let (lo, hi) = out.bounds().unwrap();
        assert_eq!(
            lo,
            &Value::tuple(vec![Value::int(0), Value::Int(ExtInt::NegInf)])
        );
        assert_eq!(
            hi,
            &Value::tuple(vec![Value::int(0), Value::Int(ExtInt::PosInf)])
        );
        assert!(!member(&Value::pair(2, 4), &out));
        assert!(member(&Value::pair(0, 7), &out));
    }

    #[test]
    fn regex_partial_program_collapses_to_false() {
        // accepts(0 . HOLE_R) on "1" with top holes is [false, false]
        let p = builders::regex_fig5();
        let g = &p.grammar;
        let abs = compiled(&p);
        let t = parse_term(g, "(accepts (concat 0 ?R))", g.start).unwrap();
        let input = point_input(&p.compile_str("1"), &abs.oa);
        let out = abstract_eval(g, &abs, &t, &input, &HoleTable::empty());
        assert_eq!(out.as_point(), Some(&Value::Bool(false)));
        assert!(!member(&Value::Bool(true), &out));
    }

    #[test]
    fn point_abstract_eval_agrees_with_concrete_eval() {
        use rand::{Rng, SeedableRng};
        let problems =
            [builders::imp_fig1(), builders::imp_plus(), builders::regex_tiny(), builders::imp_ite()];
        for p in &problems {
            let g = &p.grammar;
            let abs = compiled(p);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
            let mut seen = 0;
            'outer: while seen < 250 {
                // random complete term by repeated expansion, size-capped
                let mut t = builders::start_hole(g);
                while let Some((_, nt)) = t.leftmost_hole() {
                    if t.size() > 12 {
                        continue 'outer;
                    }
                    let prods: Vec<_> = g.productions_of(nt).collect();
                    let pick = prods[rng.gen_range(0..prods.len())];
                    t = t.expand(g, pick).unwrap();
                }
                seen += 1;
                for ex in &p.examples {
                    let conc = crate::semantics::eval(g, &t, &ex.input, 64);
                    let iv = abstract_eval(
                        g,
                        &abs,
                        &t,
                        &point_input(&ex.input, &abs.oa),
                        &HoleTable::empty(),
                    );
                    if let Ok(v) = conc {
                        assert!(
                            member(&v, &iv),
                            "{}: concrete {v} outside {:?}",
                            t.display(g),
                            iv
                        );
                        // with no top fallback in these grammars, point in = point out
                        assert_eq!(iv.as_point(), Some(&v), "{}", t.display(g));
                    }
                }
            }
        }
    }

    #[test]
    fn abstract_eval_monotone_in_input_and_holes() {
        let p = builders::imp_plus();
        let g = &p.grammar;
        let abs = compiled(&p);
        let e = g.nt_by_name("E").unwrap();
        let t = parse_term(g, "(add ?E x)", e).unwrap();
        let order = abs.oa.order_for_arc(&SemType::Tuple(vec![SemType::Int, SemType::Int]));

        let narrow =
            Interval::new(Value::pair(1, 2), Value::pair(2, 3), order.clone()).unwrap();
        let wide = Interval::new(Value::pair(0, 0), Value::pair(5, 5), order.clone()).unwrap();

        let mut tight = HoleTable::empty();
        tight.insert(e, &narrow, int_iv(0, 4));
        tight.insert(e, &wide, int_iv(0, 4));
        let mut loose = HoleTable::empty();
        loose.insert(e, &narrow, int_iv(-2, 9));
        loose.insert(e, &wide, int_iv(-2, 9));

        let on_narrow_tight = abstract_eval(g, &abs, &t, &narrow, &tight);
        let on_wide_tight = abstract_eval(g, &abs, &t, &wide, &tight);
        let on_narrow_loose = abstract_eval(g, &abs, &t, &narrow, &loose);
        assert!(crate::interval::interval_leq(&on_narrow_tight, &on_wide_tight).unwrap());
        assert!(crate::interval::interval_leq(&on_narrow_tight, &on_narrow_loose).unwrap());
    }

    #[test]
    fn guarded_rules_select_on_point_and_join_on_boxes() {
        let text = r#"(problem
  (name "abs")
  (nonterminal A int int)
  (start A)
  (production A self ()
    (rule (guard (< input 0)) (inputs) (output (- 0 input)))
    (rule (inputs) (output input)))
  (example -3 3))
"#;
        let p = crate::problem::parse_problem(text).unwrap();
        let g = &p.grammar;
        let abs = compiled(&p);
        let t = parse_term(g, "self", g.start).unwrap();
        // point input selects the matching guard exactly
        let out = abstract_eval(g, &abs, &t, &point_input(&Value::int(-3), &abs.oa), &HoleTable::empty());
        assert_eq!(out.as_point(), Some(&Value::int(3)));
        // box input joins both rules
        let out = abstract_eval(g, &abs, &t, &int_iv(-3, 2), &HoleTable::empty());
        let (lo, hi) = out.bounds().unwrap();
        assert_eq!((lo, hi), (&Value::int(-3), &Value::int(3)));
    }
}
