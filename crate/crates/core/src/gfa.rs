//! Per-nonterminal hole abstractions by grammar-flow analysis.
//!
//! For a fixed input, the transfer function maps an assignment of intervals
//! to nonterminals to a new assignment: each nonterminal receives the join,
//! over its productions, of the abstract evaluation of that production with
//! all children as holes reading from the assignment. Any post-fixpoint of
//! this transfer is a sound hole abstraction, so the solver runs an
//! ascending Kleene iteration from bottom, accelerates overlong chains by
//! widening to constant-derived thresholds and then to the top endpoints,
//! optionally narrows, and finally certifies `transfer(T) <= T` pointwise,
//! resetting any entry that fails to top.

use std::collections::HashMap;
use std::rc::Rc;

use crate::absint::{abstract_eval, AbstractSemantics, HoleTable};
use crate::expr::Expr;
use crate::grammar::{NtId, Term};
use crate::interval::{interval_join, interval_leq, top_interval, Interval};
use crate::order::{leq, value_join, value_meet, AtomicOrder};
use crate::problem::Problem;
use crate::value::{BoolMatrix, ExtInt, Value};
#[cfg(test)]
use crate::value::SemType;

#[derive(Debug, Clone)]
pub struct GfaCfg {
    /// Exact-join rounds before widening starts.
    pub widening_delay: usize,
    /// Narrowing rounds after stabilization.
    pub narrowing: usize,
    /// Hard cap on total rounds (safety net; forces top + certificate).
    pub max_rounds: usize,
}

impl Default for GfaCfg {
    fn default() -> Self {
        GfaCfg { widening_delay: 16, narrowing: 4, max_rounds: 4096 }
    }
}

#[derive(Debug, Clone, Default)]
pub struct GfaReport {
    pub rounds: usize,
    pub widened: bool,
    pub narrow_rounds: usize,
    pub certificate_resets: usize,
}

/// Constant pool used as widening thresholds, bucketed by sort shape.
#[derive(Debug, Clone, Default)]
struct Thresholds {
    ints: Vec<i64>,
    bvs: HashMap<u32, Vec<u64>>,
    mats: HashMap<u32, Vec<BoolMatrix>>,
}

impl Thresholds {
    fn add_value(&mut self, v: &Value) {
        match v {
            Value::Int(ExtInt::Fin(i)) => self.ints.push(*i),
            Value::Int(_) => {}
            Value::Bool(_) => {}
            Value::BitVec { width, bits } => self.bvs.entry(*width).or_default().push(*bits),
            Value::Matrix(m) => self.mats.entry(m.dim()).or_default().push(m.as_ref().clone()),
            Value::Tuple(vs) => vs.iter().for_each(|v| self.add_value(v)),
        }
    }

    fn add_expr(&mut self, e: &Expr) {
        match e {
            Expr::IntConst(i) => self.ints.push(*i),
            Expr::BvConst { width, bits } => self.bvs.entry(*width).or_default().push(*bits),
            _ => {}
        }
        for c in e.children() {
            self.add_expr(c);
        }
    }

    fn add_matrix_family(&mut self, dim: u32) {
        let bucket = self.mats.entry(dim).or_default();
        bucket.push(BoolMatrix::zero(dim));
        bucket.push(BoolMatrix::identity(dim));
        bucket.push(BoolMatrix::ones(dim));
    }

    fn finish(&mut self) {
        self.ints.sort_unstable();
        self.ints.dedup();
        for b in self.bvs.values_mut() {
            b.sort_unstable();
            b.dedup();
        }
        for b in self.mats.values_mut() {
            b.sort_by_key(|m| m.rows().to_vec());
            b.dedup();
        }
    }

    fn count(&self) -> usize {
        self.ints.len()
            + self.bvs.values().map(Vec::len).sum::<usize>()
            + self.mats.values().map(Vec::len).sum::<usize>()
    }

    /// Largest threshold combination at or below `x` (top-lo fallback).
    fn widen_lo(&self, order: &AtomicOrder, x: &Value, dim: u32) -> Value {
        match (order, x) {
            (AtomicOrder::IntLeq, Value::Int(ExtInt::Fin(v))) => self
                .ints
                .iter()
                .rev()
                .find(|t| **t <= *v)
                .map(|t| Value::int(*t))
                .unwrap_or(Value::Int(ExtInt::NegInf)),
            (AtomicOrder::IntLeq, x) => (*x).clone(),
            (AtomicOrder::BoolImplies, _) => Value::Bool(false),
            (AtomicOrder::BvBitwise | AtomicOrder::BvUnsignedLeq, Value::BitVec { width, .. }) => {
                let mut acc = Value::bitvec(*width, 0);
                if let Some(cands) = self.bvs.get(width) {
                    for c in cands {
                        let cv = Value::bitvec(*width, *c);
                        if leq(order, &cv, x) == Ok(true) {
                            acc = value_join(order, &acc, &cv).unwrap_or(acc);
                        }
                    }
                }
                acc
            }
            (AtomicOrder::MatrixEntrywise, Value::Matrix(m)) => {
                let mut acc = BoolMatrix::zero(m.dim());
                if let Some(cands) = self.mats.get(&m.dim()) {
                    for c in cands {
                        if c.le(m) {
                            acc = acc.add(c);
                        }
                    }
                }
                Value::matrix(acc)
            }
            (AtomicOrder::TuplePointwise(parts), Value::Tuple(vs)) => Value::Tuple(
                parts.iter().zip(vs.iter()).map(|(p, v)| self.widen_lo(p, v, dim)).collect::<Vec<_>>().into(),
            ),
            _ => (*x).clone(),
        }
    }

    /// Smallest threshold combination at or above `x` (top-hi fallback).
    fn widen_hi(&self, order: &AtomicOrder, x: &Value, dim: u32) -> Value {
        match (order, x) {
            (AtomicOrder::IntLeq, Value::Int(ExtInt::Fin(v))) => self
                .ints
                .iter()
                .find(|t| **t >= *v)
                .map(|t| Value::int(*t))
                .unwrap_or(Value::Int(ExtInt::PosInf)),
            (AtomicOrder::IntLeq, x) => (*x).clone(),
            (AtomicOrder::BoolImplies, _) => Value::Bool(true),
            (
                AtomicOrder::BvBitwise | AtomicOrder::BvUnsignedLeq,
                Value::BitVec { width, .. },
            ) => {
                let mask = if *width >= 64 { u64::MAX } else { (1u64 << width) - 1 };
                let mut acc = Value::bitvec(*width, mask);
                if let Some(cands) = self.bvs.get(width) {
                    let mut found = false;
                    let mut meet_acc = Value::bitvec(*width, mask);
                    for c in cands {
                        let cv = Value::bitvec(*width, *c);
                        if leq(order, x, &cv) == Ok(true) {
                            meet_acc = value_meet(order, &meet_acc, &cv).unwrap_or(meet_acc);
                            found = true;
                        }
                    }
                    if found {
                        acc = meet_acc;
                    }
                }
                acc
            }
            (AtomicOrder::MatrixEntrywise, Value::Matrix(m)) => {
                let mut acc = BoolMatrix::ones(m.dim());
                let mut found = false;
                if let Some(cands) = self.mats.get(&m.dim()) {
                    for c in cands {
                        if m.le(c) {
                            acc = acc.meet(c);
                            found = true;
                        }
                    }
                }
                if !found {
                    acc = BoolMatrix::ones(m.dim());
                }
                Value::matrix(acc)
            }
            (AtomicOrder::TuplePointwise(parts), Value::Tuple(vs)) => Value::Tuple(
                parts.iter().zip(vs.iter()).map(|(p, v)| self.widen_hi(p, v, dim)).collect::<Vec<_>>().into(),
            ),
            _ => (*x).clone(),
        }
    }
}

pub struct GfaSolver<'a> {
    p: &'a Problem,
    abs: &'a AbstractSemantics,
    cfg: GfaCfg,
    /// One term per production: the production applied to bare holes.
    prod_terms: Vec<Rc<Term>>,
    thresholds: Thresholds,
}

impl<'a> GfaSolver<'a> {
    pub fn new(p: &'a Problem, abs: &'a AbstractSemantics, cfg: GfaCfg) -> GfaSolver<'a> {
        let g = &p.grammar;
        let prod_terms = g
            .prod_ids()
            .map(|pid| {
                let prod = g.prod(pid);
                Rc::new(Term::node(
                    pid,
                    prod.children.iter().map(|c| Rc::new(Term::Hole(*c))).collect(),
                ))
            })
            .collect();
        let mut thresholds = Thresholds::default();
        for prod in &g.productions {
            for rule in &prod.rules {
                rule.child_inputs.iter().for_each(|e| thresholds.add_expr(e));
                thresholds.add_expr(&rule.output);
                if let Some(gd) = &rule.guard {
                    thresholds.add_expr(gd);
                }
            }
        }
        for ex in &p.examples {
            thresholds.add_value(&ex.input);
            thresholds.add_value(&ex.output);
        }
        GfaSolver { p, abs, cfg, prod_terms, thresholds }
    }

    /// Nonterminals whose input sort matches the given input value.
    fn participants(&self, input: &Interval) -> Vec<NtId> {
        let lo = match input.bounds() {
            Some((lo, _)) => lo,
            None => return vec![],
        };
        (0..self.p.grammar.nonterminals.len() as u32)
            .map(NtId)
            .filter(|nt| lo.has_sort(&self.p.grammar.nt(*nt).input_type))
            .collect()
    }

    fn dim_of(input: &Interval) -> u32 {
        input.bounds().and_then(|(lo, _)| lo.matrix_dim()).unwrap_or(0)
    }

    /// One transfer step: F(assignment)(N) = join over productions of N of
    /// the abstract value of "N-production applied to holes".
    pub fn transfer(&self, assignment: &HoleTable, input: &Interval) -> HoleTable {
        let g = &self.p.grammar;
        let mut out = HoleTable::empty();
        for nt in self.participants(input) {
            let mut acc = Interval::Empty;
            for pid in g.productions_of(nt) {
                let term = &self.prod_terms[pid.0 as usize];
                let v = abstract_eval(g, self.abs, term, input, assignment);
                acc = interval_join(&acc, &v).unwrap_or_else(|_| {
                    top_interval(&g.nt(nt).output_type, &self.abs.oa, Self::dim_of(input))
                });
            }
            out.insert(nt, input, acc);
        }
        out
    }

    /// Pointwise `transfer(T) <= T` over the participants of `input`.
    pub fn certify(&self, table: &HoleTable, input: &Interval) -> bool {
        let next = self.transfer(table, input);
        self.participants(input).iter().all(|nt| {
            match (next.get(*nt, input), table.get(*nt, input)) {
                (Some(n), Some(t)) => interval_leq(n, t).unwrap_or(false),
                (None, _) => true,
                (Some(_), None) => false,
            }
        })
    }

    /// Plain Kleene iteration from bottom without widening; `None` if it
    /// fails to stabilize within `max_rounds`. On finite lattices this is
    /// the exact least fixpoint.
    pub fn exact_kleene(&self, input: &Interval, max_rounds: usize) -> Option<HoleTable> {
        let participants = self.participants(input);
        let mut table = HoleTable::empty();
        for nt in &participants {
            table.insert(*nt, input, Interval::Empty);
        }
        for _ in 0..max_rounds {
            let next_raw = self.transfer(&table, input);
            let mut next = HoleTable::empty();
            let mut stable = true;
            for nt in &participants {
                let old = table.get(*nt, input).cloned().unwrap_or(Interval::Empty);
                let new = next_raw.get(*nt, input).cloned().unwrap_or(Interval::Empty);
                let joined = interval_join(&old, &new).ok()?;
                if joined != old {
                    stable = false;
                }
                next.insert(*nt, input, joined);
            }
            if stable {
                return Some(table);
            }
            table = next;
        }
        None
    }

    /// Widened, narrowed, certified solve for one input interval.
    pub fn solve(&self, input: &Interval) -> (HoleTable, GfaReport) {
        let g = &self.p.grammar;
        let participants = self.participants(input);
        let dim = Self::dim_of(input);
        let mut thresholds = self.thresholds.clone();
        if let Some((lo, hi)) = input.bounds() {
            thresholds.add_value(lo);
            thresholds.add_value(hi);
        }
        if dim > 0 {
            thresholds.add_matrix_family(dim);
            if let Some((lo, _)) = input.bounds() {
                thresholds.add_value(lo);
            }
        }
        thresholds.finish();

        let mut report = GfaReport::default();
        let mut table = HoleTable::empty();
        for nt in &participants {
            table.insert(*nt, input, Interval::Empty);
        }

        let bound_cap = self.cfg.widening_delay + thresholds.count() + 2 + self.cfg.narrowing;
        let cap = self
            .cfg
            .max_rounds
            .min(bound_cap * (participants.len().max(1) * 2) + 8);

        loop {
            report.rounds += 1;
            let next_raw = self.transfer(&table, input);
            let mut next = HoleTable::empty();
            let mut stable = true;
            for nt in &participants {
                let old = table.get(*nt, input).cloned().unwrap_or(Interval::Empty);
                let grown = interval_join(
                    &old,
                    next_raw.get(*nt, input).unwrap_or(&Interval::Empty),
                )
                .unwrap_or_else(|_| top_interval(&g.nt(*nt).output_type, &self.abs.oa, dim));
                if grown == old {
                    next.insert(*nt, input, old);
                    continue;
                }
                stable = false;
                let chosen = if report.rounds > self.cfg.widening_delay {
                    report.widened = true;
                    widen_interval(&grown, &old, &thresholds, dim)
                } else {
                    grown
                };
                next.insert(*nt, input, chosen);
            }
            table = next;
            if stable {
                break;
            }
            if report.rounds >= cap {
                // safety net: blow every still-unstable entry to top
                for nt in &participants {
                    table.insert(
                        *nt,
                        input,
                        top_interval(&g.nt(*nt).output_type, &self.abs.oa, dim),
                    );
                }
                break;
            }
        }

        // narrowing recovers precision lost to widening while staying a
        // post-fixpoint: T := F(T) as long as F(T) <= T strictly shrinks
        for _ in 0..self.cfg.narrowing {
            let next_raw = self.transfer(&table, input);
            let mut improved = false;
            let mut sound = true;
            for nt in &participants {
                match (next_raw.get(*nt, input), table.get(*nt, input)) {
                    (Some(n), Some(t)) => match interval_leq(n, t) {
                        Ok(true) => improved |= n != t,
                        _ => sound = false,
                    },
                    _ => sound = false,
                }
            }
            if !sound || !improved {
                break;
            }
            report.narrow_rounds += 1;
            table = next_raw;
        }

        // certificate: reset any entry the transfer still escapes
        loop {
            let next_raw = self.transfer(&table, input);
            let mut bad = Vec::new();
            for nt in &participants {
                let holds = match (next_raw.get(*nt, input), table.get(*nt, input)) {
                    (Some(n), Some(t)) => interval_leq(n, t).unwrap_or(false),
                    _ => false,
                };
                if !holds {
                    bad.push(*nt);
                }
            }
            if bad.is_empty() {
                break;
            }
            report.certificate_resets += bad.len();
            for nt in bad {
                table.insert(
                    nt,
                    input,
                    top_interval(&g.nt(nt).output_type, &self.abs.oa, dim),
                );
            }
        }

        (table, report)
    }
}

fn widen_interval(grown: &Interval, old: &Interval, thr: &Thresholds, dim: u32) -> Interval {
    let (glo, ghi) = match grown.bounds() {
        Some(b) => b,
        None => return grown.clone(),
    };
    let order = grown.order().unwrap().clone();
    let (olo, ohi) = match old.bounds() {
        Some(b) => b,
        // old was bottom; nothing to extrapolate against yet
        None => return grown.clone(),
    };
    let lo = if glo == olo { glo.clone() } else { thr.widen_lo(&order, glo, dim) };
    let hi = if ghi == ohi { ghi.clone() } else { thr.widen_hi(&order, ghi, dim) };
    Interval::Pair { lo, hi, order }
}

/// Solve hole abstractions for every example input of the problem and merge
/// the per-input tables. Inputs are keyed as point intervals.
pub fn solve_all_examples(
    p: &Problem,
    abs: &AbstractSemantics,
    cfg: &GfaCfg,
) -> (HoleTable, Vec<GfaReport>) {
    let solver = GfaSolver::new(p, abs, cfg.clone());
    let mut table = HoleTable::empty();
    let mut reports = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for ex in &p.examples {
        if !seen.insert(ex.input.clone()) {
            continue;
        }
        let input = crate::absint::point_input(&ex.input, &abs.oa);
        let (t, rep) = solver.solve(&input);
        for (nt, lo, hi, iv) in t.iter() {
            let key = Interval::Pair {
                lo: lo.clone(),
                hi: hi.clone(),
                order: abs.oa.order_for_arc(&lo.sort()),
            };
            table.insert(nt, &key, iv.clone());
        }
        reports.push(rep);
    }
    (table, reports)
}

/// Top-only hole table: the baseline "holes can be anything" abstraction.
/// An empty table behaves identically (lookups default to top); this exists
/// so callers can be explicit about the mode.
pub fn top_holes() -> HoleTable {
    HoleTable::empty()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::absint::{compile_abstract, point_input};
    use crate::builders;
    use crate::interval::member;
    use crate::order::{analyze, OrderAssignment, SampleCfg};
    use std::sync::Arc;

    fn setup(p: &Problem) -> AbstractSemantics {
        let profile = analyze(p, &OrderAssignment::default(), &SampleCfg::default());
        compile_abstract(p, &profile, 64)
    }

    fn pair_interval(lo: (i64, i64), hi: (i64, i64), abs: &AbstractSemantics) -> Interval {
        let sort = SemType::Tuple(vec![SemType::Int, SemType::Int]);
        Interval::new(
            Value::pair(lo.0, lo.1),
            Value::pair(hi.0, hi.1),
            abs.oa.order_for_arc(&sort),
        )
        .unwrap()
    }

    fn int_iv(a: ExtInt, b: ExtInt) -> Interval {
        Interval::Pair {
            lo: Value::Int(a),
            hi: Value::Int(b),
            order: Arc::new(crate::order::AtomicOrder::IntLeq),
        }
    }

    #[test]
    fn transfer_on_addition_grammar() {
        // assignment E -> [0,5] over input c = [(1,2),(3,5)] steps to [0,10]
        let p = builders::imp_plus();
        let abs = setup(&p);
        let solver = GfaSolver::new(&p, &abs, GfaCfg::default());
        let c = pair_interval((1, 2), (3, 5), &abs);
        let e = p.grammar.nt_by_name("E").unwrap();

        let mut assignment = HoleTable::empty();
        assignment.insert(e, &c, int_iv(ExtInt::Fin(0), ExtInt::Fin(5)));
        let next = solver.transfer(&assignment, &c);
        assert_eq!(next.get(e, &c), Some(&int_iv(ExtInt::Fin(0), ExtInt::Fin(10))));

        // bottom assignment kills only the recursive disjunct
        let mut bottom = HoleTable::empty();
        bottom.insert(e, &c, Interval::Empty);
        let next = solver.transfer(&bottom, &c);
        assert_eq!(next.get(e, &c), Some(&int_iv(ExtInt::Fin(0), ExtInt::Fin(5))));
    }

    #[test]
    fn solve_widens_addition_grammar_to_zero_inf() {
        let p = builders::imp_plus();
        let abs = setup(&p);
        let solver = GfaSolver::new(&p, &abs, GfaCfg::default());
        let c = pair_interval((1, 2), (3, 5), &abs);
        let e = p.grammar.nt_by_name("E").unwrap();

        let (table, report) = solver.solve(&c);
        assert_eq!(table.get(e, &c), Some(&int_iv(ExtInt::Fin(0), ExtInt::PosInf)));
        assert!(report.widened);
        assert!(solver.certify(&table, &c));
        // round count stays within the structural bound
        let cap = GfaCfg::default().widening_delay + 64 + 2 + GfaCfg::default().narrowing;
        assert!(report.rounds <= cap, "rounds {} cap {cap}", report.rounds);
    }

    #[test]
    fn certify_rejects_understated_tables() {
        let p = builders::imp_plus();
        let abs = setup(&p);
        let solver = GfaSolver::new(&p, &abs, GfaCfg::default());
        let c = pair_interval((1, 2), (3, 5), &abs);
        let e = p.grammar.nt_by_name("E").unwrap();

        let mut claimed = HoleTable::empty();
        claimed.insert(e, &c, int_iv(ExtInt::Fin(0), ExtInt::Fin(5)));
        assert!(!solver.certify(&claimed, &c));

        // all-top always certifies
        let mut top = HoleTable::empty();
        top.insert(e, &c, top_interval(&SemType::Int, &abs.oa, 0));
        assert!(solver.certify(&top, &c));
    }

    #[test]
    fn unreal_counting_grammar_gets_zero_to_inf() {
        let p = builders::imp_unreal();
        let abs = setup(&p);
        let solver = GfaSolver::new(&p, &abs, GfaCfg::default());
        let input = point_input(&Value::int(0), &abs.oa);
        let e = p.grammar.nt_by_name("E").unwrap();
        let (table, _) = solver.solve(&input);
        let iv = table.get(e, &input).unwrap();
        assert_eq!(iv, &int_iv(ExtInt::Fin(0), ExtInt::PosInf));
        assert!(!member(&Value::int(-1), iv));
    }

    #[test]
    fn csv_alpha_hole_matches_exact_kleene_and_excludes_digits() {
        let p = builders::csv_canonical();
        let abs = setup(&p);
        let solver = GfaSolver::new(&p, &abs, GfaCfg::default());
        let input = point_input(&p.examples[0].input, &abs.oa);
        let (table, report) = solver.solve(&input);
        let exact = solver.exact_kleene(&input, 64).expect("finite lattice converges");

        for name in ["Row", "Alpha", "Num"] {
            let nt = p.grammar.nt_by_name(name).unwrap();
            assert_eq!(table.get(nt, &input), exact.get(nt, &input), "{name}");
        }
        assert!(!report.widened, "finite matrix lattice must converge before widening");
        assert!(solver.certify(&table, &input));

        // the Alpha upper bound accepts no substring containing '3' or ','
        let alpha = p.grammar.nt_by_name("Alpha").unwrap();
        let iv = table.get(alpha, &input).unwrap();
        let (_, hi) = iv.bounds().unwrap();
        let m = match hi {
            Value::Matrix(m) => m,
            _ => panic!(),
        };
        let s: Vec<char> = "303, name".chars().collect();
        for i in 0..m.dim() {
            for j in i..m.dim() {
                if m.get(i, j) {
                    let sub = &s[i as usize..j as usize];
                    assert!(
                        sub.iter().all(|c| c.is_ascii_lowercase()),
                        "alpha hole admits {sub:?}"
                    );
                }
            }
        }
        // whole-string entry must be off: "303, name" is not alphabetic
        assert!(!m.get(0, m.dim() - 1));
    }

    #[test]
    fn solved_tables_are_sound_for_small_terms() {
        // soundness of hole abstractions: every complete term of N evaluated
        // on a table input lands inside table(N, input)
        for p in [builders::imp_plus(), builders::regex_tiny(), builders::imp_fig1()] {
            let abs = setup(&p);
            let (table, _) = solve_all_examples(&p, &abs, &GfaCfg::default());
            for ex in &p.examples {
                let input = point_input(&ex.input, &abs.oa);
                for nt_idx in 0..p.grammar.nonterminals.len() as u32 {
                    let nt = NtId(nt_idx);
                    let entry = match table.get(nt, &input) {
                        Some(e) => e,
                        None => continue,
                    };
                    for t in crate::grammar::terms_up_to(&p.grammar, nt, 5) {
                        if let Ok(v) = crate::semantics::eval(&p.grammar, &t, &ex.input, 64) {
                            assert!(
                                member(&v, entry),
                                "{}: {} on {} gave {v} outside {:?}",
                                p.name,
                                t.display(&p.grammar),
                                ex.input,
                                entry
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn transfer_is_inflationary_on_ascending_chains() {
        let p = builders::imp_plus();
        let abs = setup(&p);
        let solver = GfaSolver::new(&p, &abs, GfaCfg::default());
        let e = p.grammar.nt_by_name("E").unwrap();
        let input = point_input(&p.examples[0].input, &abs.oa);

        let chain = [
            Interval::Empty,
            int_iv(ExtInt::Fin(0), ExtInt::Fin(1)),
            int_iv(ExtInt::Fin(0), ExtInt::Fin(8)),
            int_iv(ExtInt::NegInf, ExtInt::PosInf),
        ];
        let mut prev: Option<Interval> = None;
        for link in &chain {
            let mut t = HoleTable::empty();
            t.insert(e, &input, link.clone());
            let out = solver.transfer(&t, &input).get(e, &input).cloned().unwrap();
            if let Some(p) = prev {
                assert!(interval_leq(&p, &out).unwrap(), "transfer not monotone");
            }
            prev = Some(out);
        }
    }
}
