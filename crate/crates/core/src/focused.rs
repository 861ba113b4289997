//! Batched pruning for sibling expansions.
//!
//! All one-step expansions of a candidate share everything except the
//! production filling the leftmost hole. This walker evaluates the shared
//! context once per example — the stack of rule frames from the root down
//! to the hole, with the complete left siblings collapsed to their abstract
//! values — and then pushes each candidate production's interval up through
//! the frames. Verdicts are identical to running `prune` on every expansion
//! (there is a cross-check test); any shape this walker does not handle
//! (multi-rule joins on box inputs, recursive nodes on the path,
//! non-bare-hole right siblings) falls back to the naive path.

use std::rc::Rc;

use crate::absint::{abs_apply, abstract_eval, point_input, AbstractSemantics, HoleTable};
use crate::grammar::{Example, Grammar, ProdId, Term};
use crate::interval::{member, Interval};
use crate::problem::Problem;
use crate::search::prune;
use crate::value::Value;

struct Frame<'t> {
    prod: ProdId,
    rule_idx: usize,
    /// Index of the child the path descends into.
    path_child: usize,
    input: Interval,
    /// Start of this frame's left-sibling values in the path's pool.
    outs_start: usize,
    /// The children of this node (right siblings must be bare holes).
    children: &'t [Rc<Term>],
}

struct FramePath<'t> {
    frames: Vec<Frame<'t>>,
    /// Left-sibling values of all frames, flattened.
    outs_pool: Vec<Interval>,
    hole_input: Interval,
    hole_nt: crate::grammar::NtId,
    expected: Value,
    dim: u32,
    /// Whether the root interval can depend on the hole's value at all.
    /// When false, every non-empty candidate shares one verdict.
    sensitive: bool,
}

pub struct ExpansionPruner<'a> {
    g: &'a Grammar,
    abs: &'a AbstractSemantics,
    holes: &'a HoleTable,
    examples: &'a [Example],
    /// Per production: the production applied to bare holes.
    prod_terms: Vec<Rc<Term>>,
    /// Point input intervals per example.
    example_inputs: Vec<Interval>,
    /// Per nonterminal: every hole read of it yields the sort top (no table
    /// entries, or all entries equal top), so such reads are constants.
    nt_masked: Vec<bool>,
    /// Memoization pays off only when rule evaluation is heavyweight
    /// (matrix-sorted outputs); elsewhere recomputing beats hashing.
    use_memo: bool,
    /// Productions whose hole-application can never evaluate to the empty
    /// interval (single unguarded rule, no empty table entries below); on a
    /// value-insensitive path these need no per-candidate work at all.
    never_empty: Vec<bool>,
    /// Memo for production-over-holes abstract values by exact input.
    value_memo: std::cell::RefCell<
        std::collections::HashMap<
            (u32, Value, Value),
            Interval,
            std::hash::BuildHasherDefault<crate::value::FnvHasher>,
        >,
    >,
    /// Complete subtrees are shared (`Rc`) across queue entries and get
    /// re-evaluated by every descendant's batch; this memo keys them by
    /// node pointer plus input and pins the term so pointers stay valid.
    /// Hits verify the stored input for equality, so pointer collisions
    /// after a clear-out only cost a recompute.
    subtree_memo: std::cell::RefCell<
        std::collections::HashMap<
            (usize, u8),
            (Rc<Term>, Interval, Interval),
            std::hash::BuildHasherDefault<crate::value::FnvHasher>,
        >,
    >,
}

impl<'a> ExpansionPruner<'a> {
    pub fn new(
        p: &'a Problem,
        abs: &'a AbstractSemantics,
        holes: &'a HoleTable,
    ) -> ExpansionPruner<'a> {
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
        let example_inputs =
            p.examples.iter().map(|ex| point_input(&ex.input, &abs.oa)).collect();
        // a nonterminal is masked when no hole read of it can ever return
        // anything tighter than top
        let mut nt_masked = vec![true; g.nonterminals.len()];
        for (nt, lo, _hi, iv) in holes.iter() {
            let dim = lo.matrix_dim().unwrap_or(0);
            if *iv != abs.hole_top(g, nt, dim) {
                nt_masked[nt.0 as usize] = false;
            }
        }
        let use_memo = g
            .nonterminals
            .iter()
            .any(|d| matches!(d.output_type, crate::value::SemType::BoolMatrix));
        let mut nt_has_empty = vec![false; g.nonterminals.len()];
        for (nt, _, _, iv) in holes.iter() {
            if iv.is_empty() {
                nt_has_empty[nt.0 as usize] = true;
            }
        }
        let never_empty = g
            .prod_ids()
            .map(|pid| {
                let prod = g.prod(pid);
                !prod.recursive
                    && prod.rules.len() == 1
                    && prod.rules[0].guard.is_none()
                    && prod.children.iter().all(|c| !nt_has_empty[c.0 as usize])
            })
            .collect();
        ExpansionPruner {
            g,
            abs,
            holes,
            examples: &p.examples,
            prod_terms,
            example_inputs,
            nt_masked,
            use_memo,
            never_empty,
            value_memo: Default::default(),
            subtree_memo: Default::default(),
        }
    }

    /// Abstract value of a complete left sibling, memoized across batches
    /// by shared node identity (matrix problems only; integer evaluation is
    /// cheaper than the map traffic).
    fn sibling_value(&self, t: &Rc<Term>, input: &Interval, ex_idx: usize) -> Interval {
        if !self.use_memo {
            return abstract_eval(self.g, self.abs, t, input, self.holes);
        }
        let key = (Rc::as_ptr(t) as usize, ex_idx as u8);
        {
            let memo = self.subtree_memo.borrow();
            if let Some((pinned, stored_input, out)) = memo.get(&key) {
                if Rc::ptr_eq(pinned, t) && stored_input == input {
                    return out.clone();
                }
            }
        }
        let out = abstract_eval(self.g, self.abs, t, input, self.holes);
        let mut memo = self.subtree_memo.borrow_mut();
        if memo.len() >= 500_000 {
            memo.clear();
        }
        memo.insert(key, (t.clone(), input.clone(), out.clone()));
        out
    }

    /// Abstract value of "production over bare holes" on an input interval,
    /// memoized on the exact input. Complete (leaf) productions skip the
    /// memo: their evaluation is already a single concrete step.
    fn child_value(&self, pid: ProdId, input: &Interval) -> Interval {
        let term = &self.prod_terms[pid.0 as usize];
        if term.is_complete() || !self.use_memo {
            return abstract_eval(self.g, self.abs, term, input, self.holes);
        }
        if let Some((lo, hi)) = input.bounds() {
            let key = (pid.0, lo.clone(), hi.clone());
            if let Some(v) = self.value_memo.borrow().get(&key) {
                return v.clone();
            }
            let v = abstract_eval(self.g, self.abs, term, input, self.holes);
            let mut memo = self.value_memo.borrow_mut();
            if memo.len() < 1_000_000 {
                memo.insert(key, v.clone());
            }
            return v;
        }
        Interval::Empty
    }

    /// Prune verdict for each production expanding the leftmost hole of
    /// `parent`, in production order.
    pub fn prune_children(&self, parent: &Rc<Term>, prods: &[ProdId]) -> Vec<bool> {
        let mut verdicts = vec![false; prods.len()];
        let mut outs_scratch: Vec<Interval> = Vec::new();
        for (ex_idx, ex) in self.examples.iter().enumerate() {
            match self.build_path(parent, ex, ex_idx) {
                Some(path) => {
                    // every candidate's interval sits inside the interval
                    // obtained by treating the hole as top, so one failed
                    // membership there prunes the whole batch
                    let top_v = self.abs.hole_top(self.g, path.hole_nt, path.dim);
                    let r_top = self.push_through(&path, top_v.clone(), &mut outs_scratch);
                    if !member(&path.expected, &r_top) {
                        verdicts.iter_mut().for_each(|v| *v = true);
                        return verdicts;
                    }
                    for (k, &pid) in prods.iter().enumerate() {
                        if verdicts[k] {
                            continue;
                        }
                        if !path.sensitive && self.never_empty[pid.0 as usize] {
                            // insensitive result that cannot be empty: the
                            // verdict is r_top's, which passed
                            continue;
                        }
                        let v = self.child_value(pid, &path.hole_input);
                        if v.is_empty() {
                            // no completion of this candidate terminates
                            verdicts[k] = true;
                            continue;
                        }
                        // a candidate whose value is exactly the hole top
                        // reproduces r_top, which already passed membership
                        if !path.sensitive || v == top_v {
                            continue;
                        }
                        let iv = self.push_through(&path, v, &mut outs_scratch);
                        if !member(&path.expected, &iv) {
                            verdicts[k] = true;
                        }
                    }
                }
                None => {
                    // fall back to the naive per-candidate check for this
                    // example (and the remaining ones, via full prune)
                    for (k, &pid) in prods.iter().enumerate() {
                        if verdicts[k] {
                            continue;
                        }
                        let child = parent.expand(self.g, pid).expect("expansion");
                        verdicts[k] =
                            prune(self.g, self.abs, &child, self.examples, self.holes);
                    }
                    return verdicts;
                }
            }
        }
        verdicts
    }

    /// Descend from the root to the leftmost hole, freezing the shared
    /// context. `None` when the shape needs the naive path.
    fn build_path<'t>(
        &self,
        t: &'t Rc<Term>,
        ex: &Example,
        ex_idx: usize,
    ) -> Option<FramePath<'t>> {
        let input = self.example_inputs[ex_idx].clone();
        let dim = ex.input.matrix_dim().unwrap_or(0);
        let mut frames: Vec<Frame<'t>> = Vec::new();
        let mut outs_pool: Vec<Interval> = Vec::new();
        let mut node: &'t Term = t;
        let mut node_input = input;

        loop {
            match node {
                Term::Hole(hole_nt) => {
                    let sensitive = self.path_sensitivity(&frames);
                    return Some(FramePath {
                        frames,
                        outs_pool,
                        hole_input: node_input,
                        hole_nt: *hole_nt,
                        expected: ex.output.clone(),
                        dim,
                        sensitive,
                    });
                }
                Term::Node { prod, children, .. } => {
                    let p = self.g.prod(*prod);
                    if p.recursive {
                        return None;
                    }
                    // single applicable rule only
                    let rule_idx = if let Some(point) = node_input.as_point() {
                        let env = crate::expr::Env { input: point, child_outs: &[], dim };
                        let mut chosen = None;
                        for (ri, rule) in p.rules.iter().enumerate() {
                            let applies = match &rule.guard {
                                None => true,
                                Some(gexpr) => matches!(
                                    crate::expr::eval_expr(gexpr, &env),
                                    Ok(Value::Bool(true))
                                ),
                            };
                            if applies {
                                chosen = Some(ri);
                                break;
                            }
                        }
                        chosen?
                    } else if p.rules.len() == 1 {
                        0
                    } else {
                        return None;
                    };
                    let rule = &p.rules[rule_idx];
                    let abs_rule = &self.abs.rules[prod.0 as usize][rule_idx];

                    let path_child = children.iter().position(|c| !c.is_complete())?;
                    // right siblings must be bare holes (leftmost-first shape)
                    for c in &children[path_child + 1..] {
                        if !matches!(c.as_ref(), Term::Hole(_)) {
                            return None;
                        }
                    }

                    let outs_start = outs_pool.len();
                    for i in 0..path_child {
                        let child_in = {
                            let mut args: arrayvec::ArrayVec<&Interval, 8> =
                                arrayvec::ArrayVec::new();
                            args.push(&node_input);
                            args.extend(outs_pool[outs_start..].iter());
                            abs_apply(
                                &rule.child_inputs[i],
                                &abs_rule.child_inputs[i],
                                &args,
                                &self.g.nt(p.children[i]).input_type,
                                self.abs.in_order(p.children[i]),
                                &self.abs.oa,
                                dim,
                                self.abs.joined_cap,
                            )
                        };
                        if child_in.is_empty() {
                            return None;
                        }
                        let out = self.sibling_value(&children[i], &child_in, ex_idx);
                        if out.is_empty() {
                            return None;
                        }
                        outs_pool.push(out);
                    }

                    // the path child's input under this rule
                    let next_input = {
                        let mut args: arrayvec::ArrayVec<&Interval, 8> =
                            arrayvec::ArrayVec::new();
                        args.push(&node_input);
                        args.extend(outs_pool[outs_start..].iter());
                        abs_apply(
                            &rule.child_inputs[path_child],
                            &abs_rule.child_inputs[path_child],
                            &args,
                            &self.g.nt(p.children[path_child]).input_type,
                            self.abs.in_order(p.children[path_child]),
                            &self.abs.oa,
                            dim,
                            self.abs.joined_cap,
                        )
                    };
                    if next_input.is_empty() {
                        return None;
                    }

                    frames.push(Frame {
                        prod: *prod,
                        rule_idx,
                        path_child,
                        input: node_input,
                        outs_start,
                        children,
                    });
                    node = &children[path_child];
                    node_input = next_input;
                }
            }
        }
    }

    /// Can the root interval depend on the value filling the hole?
    /// Conservative: only says "no" when every route from the hole's slot to
    /// the root output is cut (expression does not mention the slot, the
    /// transformer is constant, or the only uses flow through hole reads of
    /// masked nonterminals).
    fn path_sensitivity(&self, frames: &[Frame]) -> bool {
        for frame in frames.iter().rev() {
            let p = self.g.prod(frame.prod);
            let rule = &p.rules[frame.rule_idx];
            let abs_rule = &self.abs.rules[frame.prod.0 as usize][frame.rule_idx];
            // argument slots (1-based child outs) carrying the hole's value
            let mut mask: u64 = 1 << (frame.path_child + 1);
            for j in frame.path_child + 1..frame.children.len() {
                if matches!(abs_rule.child_inputs[j], crate::absint::AbsExpr::Top) {
                    continue;
                }
                let wiring = &rule.child_inputs[j];
                let feeds = (0..=frame.children.len())
                    .filter(|slot| mask >> slot & 1 == 1)
                    .any(|slot| wiring.references_arg(slot));
                if !feeds {
                    continue;
                }
                let hole_nt = match frame.children[j].as_ref() {
                    Term::Hole(nt) => *nt,
                    _ => return true, // unexpected shape: stay conservative
                };
                if !self.nt_masked[hole_nt.0 as usize] {
                    mask |= 1 << (j + 1);
                }
            }
            if matches!(abs_rule.output, crate::absint::AbsExpr::Top) {
                return false;
            }
            let out_sensitive = (0..=frame.children.len())
                .filter(|slot| mask >> slot & 1 == 1)
                .any(|slot| rule.output.references_arg(slot));
            if !out_sensitive {
                return false;
            }
        }
        true
    }

    /// Interval of the whole candidate when the hole holds `v`, by
    /// propagating through the frozen frames.
    fn push_through(&self, path: &FramePath, v: Interval, outs: &mut Vec<Interval>) -> Interval {
        let mut v = v;
        for frame in path.frames.iter().rev() {
            if v.is_empty() {
                return Interval::Empty;
            }
            let p = self.g.prod(frame.prod);
            let rule = &p.rules[frame.rule_idx];
            let abs_rule = &self.abs.rules[frame.prod.0 as usize][frame.rule_idx];

            outs.clear();
            outs.extend_from_slice(
                &path.outs_pool[frame.outs_start..frame.outs_start + frame.path_child],
            );
            outs.push(v);
            // right siblings: bare holes wired off the outs so far
            let mut empty = false;
            for j in frame.path_child + 1..frame.children.len() {
                let in_j = {
                    let mut args: arrayvec::ArrayVec<&Interval, 8> = arrayvec::ArrayVec::new();
                    args.push(&frame.input);
                    args.extend(outs.iter().take(j));
                    abs_apply(
                        &rule.child_inputs[j],
                        &abs_rule.child_inputs[j],
                        &args,
                        &self.g.nt(p.children[j]).input_type,
                        self.abs.in_order(p.children[j]),
                        &self.abs.oa,
                        path.dim,
                        self.abs.joined_cap,
                    )
                };
                let out_j =
                    abstract_eval(self.g, self.abs, &frame.children[j], &in_j, self.holes);
                if out_j.is_empty() {
                    empty = true;
                }
                outs.push(out_j);
            }
            if empty {
                return Interval::Empty;
            }
            let mut args: arrayvec::ArrayVec<&Interval, 8> = arrayvec::ArrayVec::new();
            args.push(&frame.input);
            args.extend(outs.iter());
            v = abs_apply(
                &rule.output,
                &abs_rule.output,
                &args,
                &self.g.nt(p.lhs).output_type,
                self.abs.out_order(p.lhs),
                &self.abs.oa,
                path.dim,
                self.abs.joined_cap,
            );
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders;
    use crate::gfa::GfaCfg;
    use crate::order::SampleCfg;
    use crate::search::{holes_for_mode, prepare, PruningMode};
    use rand::{Rng, SeedableRng};

    /// Focused verdicts must agree with naive pruning on every expansion of
    /// randomly grown partial programs, across all bundled problem shapes.
    #[test]
    fn focused_pruning_matches_naive() {
        let problems = vec![
            builders::imp_fig1(),
            builders::imp_plus(),
            builders::imp_ite(),
            builders::imp_unreal(),
            builders::imp_loop(),
            builders::regex_fig5(),
            builders::csv_canonical(),
        ];
        for p in &problems {
            let g = &p.grammar;
            let prepared = prepare(&p, &SampleCfg::default(), &GfaCfg::default());
            for mode in [PruningMode::TopHoles, PruningMode::GfaHoles] {
                let holes = holes_for_mode(&prepared, mode);
                let pruner = ExpansionPruner::new(p, &prepared.abs, &holes);
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
                let mut batches = 0;
                while batches < 120 {
                    // random partial by a few leftmost expansions
                    let mut t: Rc<Term> = Rc::new(Term::hole(g.start));
                    for _ in 0..rng.gen_range(0..7) {
                        match t.leftmost_hole() {
                            Some((_, nt)) => {
                                let prods: Vec<_> = g.productions_of(nt).collect();
                                t = t.expand(g, prods[rng.gen_range(0..prods.len())]).unwrap();
                            }
                            None => break,
                        }
                    }
                    let (_, nt) = match t.leftmost_hole() {
                        Some(h) => h,
                        None => continue,
                    };
                    if t.size() > 11 {
                        continue;
                    }
                    batches += 1;
                    let prods: Vec<_> = g.productions_of(nt).collect();
                    let got = pruner.prune_children(&t, &prods);
                    for (k, &pid) in prods.iter().enumerate() {
                        let child = t.expand(g, pid).unwrap();
                        let want = prune(g, &prepared.abs, &child, &p.examples, &holes);
                        assert_eq!(
                            got[k],
                            want,
                            "{} {:?} parent {} child prod {}",
                            p.name,
                            mode,
                            t.display(g),
                            g.prod(pid).operator
                        );
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod timing {
    use super::*;
    use crate::builders;
    use crate::gfa::GfaCfg;
    use crate::order::SampleCfg;
    use crate::search::{holes_for_mode, prepare, PruningMode};
    use std::time::Instant;

    #[test]
    #[ignore]
    fn time_prune_children() {
        let p = builders::imp_fig1();
        let g = &p.grammar;
        let prepared = prepare(&p, &SampleCfg::default(), &GfaCfg::default());
        let holes = holes_for_mode(&prepared, PruningMode::GfaHoles);
        let pruner = ExpansionPruner::new(&p, &prepared.abs, &holes);
        let parent = crate::grammar::parse_term(
            g,
            "(seq (seq (assign-x (sub x y)) (assign-y (add x y))) (assign-x (sub ?E ?E)))",
            g.start,
        )
        .unwrap();
        let (_, nt) = parent.leftmost_hole().unwrap();
        let prods: Vec<_> = g.productions_of(nt).collect();
        let n = 200_000u32;
        let t0 = Instant::now();
        let mut acc = 0usize;
        for _ in 0..n {
            let v = pruner.prune_children(&parent, &prods);
            acc += v.iter().filter(|x| **x).count();
        }
        let per_parent = t0.elapsed().as_nanos() / n as u128;
        println!(
            "prune_children: {}ns/parent ({}ns/child) pruned {}",
            per_parent,
            per_parent / prods.len() as u128,
            acc / n as usize,
        );

        // split: path building alone
        let t0 = Instant::now();
        for _ in 0..n {
            for (i, ex) in pruner.examples.iter().enumerate() {
                let path = pruner.build_path(&parent, ex, i);
                std::hint::black_box(&path);
            }
        }
        println!("build_path both examples: {}ns/parent", t0.elapsed().as_nanos() / n as u128);
    }
}
