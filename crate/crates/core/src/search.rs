//! Top-down enumeration with abstraction-based pruning.
//!
//! The queue holds partial programs bucketed by priority (size by default,
//! depth behind a knob) with FIFO tie-breaking, which makes runs fully
//! deterministic. Dequeued complete programs are checked against the
//! examples; partial programs expand their leftmost hole with every
//! production, and each expansion is dropped when some example output is
//! provably outside its abstract output interval.

use std::collections::VecDeque;
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use crate::absint::{abstract_eval, point_input, AbstractSemantics, HoleTable};
use crate::gfa::{solve_all_examples, GfaCfg, GfaReport};
use crate::grammar::{Example, Grammar, Term};
use crate::interval::member;
use crate::order::{
    candidate_assignments, synthesize_orders, MonotonicityProfile, OrderAssignment, SampleCfg,
};
use crate::problem::Problem;
use crate::semantics::check_examples;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PruningMode {
    /// No pruning: baseline enumeration.
    Off,
    /// Interval pruning with top hole abstractions.
    TopHoles,
    /// Interval pruning with grammar-flow hole abstractions.
    GfaHoles,
}

impl PruningMode {
    pub fn label(self) -> &'static str {
        match self {
            PruningMode::Off => "off",
            PruningMode::TopHoles => "top",
            PruningMode::GfaHoles => "gfa",
        }
    }

    pub fn parse(s: &str) -> Option<PruningMode> {
        Some(match s {
            "off" => PruningMode::Off,
            "top" | "topHoles" => PruningMode::TopHoles,
            "gfa" | "gfaHoles" => PruningMode::GfaHoles,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Priority {
    Size,
    Depth,
}

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub max_size: u32,
    pub max_candidates: u64,
    pub fuel: u32,
    pub pruning_mode: PruningMode,
    pub priority: Priority,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            max_size: 25,
            max_candidates: 1_000_000,
            fuel: crate::semantics::DEFAULT_FUEL,
            pruning_mode: PruningMode::GfaHoles,
            priority: Priority::Size,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub dequeued: u64,
    pub enqueued: u64,
    pub pruned: u64,
    pub complete_checked: u64,
    pub max_size_reached: u32,
    pub solved: bool,
    pub solution_size: u32,
    pub budget_exceeded: bool,
}

/// Can the partial (or complete) program be discarded? True iff some
/// example output falls outside the program's abstract output interval;
/// the empty interval rejects everything (no completion terminates in the
/// modeled semantics).
pub fn prune(
    g: &Grammar,
    abs: &AbstractSemantics,
    t: &Term,
    examples: &[Example],
    holes: &HoleTable,
) -> bool {
    examples.iter().any(|ex| {
        let iv = abstract_eval(g, abs, t, &point_input(&ex.input, &abs.oa), holes);
        !member(&ex.output, &iv)
    })
}

/// Queue entries are unexpanded (parent, production) thunks; terms
/// materialize on dequeue. This keeps a queue entry at pointer size while
/// shared ancestor spines stay alive through the parent references.
enum Entry {
    Root(Rc<Term>),
    Expand { parent: Rc<Term>, prod: crate::grammar::ProdId },
}

/// Priority-bucketed FIFO queue.
struct BucketQueue {
    buckets: Vec<VecDeque<Entry>>,
    current: usize,
}

impl BucketQueue {
    fn new(max_priority: u32) -> BucketQueue {
        BucketQueue {
            buckets: (0..=max_priority as usize).map(|_| VecDeque::new()).collect(),
            current: 0,
        }
    }

    fn push(&mut self, priority: u32, e: Entry) {
        let slot = priority as usize;
        self.buckets[slot].push_back(e);
        self.current = self.current.min(slot);
    }

    fn pop(&mut self) -> Option<Entry> {
        while self.current < self.buckets.len() {
            if let Some(t) = self.buckets[self.current].pop_front() {
                return Some(t);
            }
            self.current += 1;
        }
        None
    }
}

pub fn search(
    p: &Problem,
    abs: &AbstractSemantics,
    holes: &HoleTable,
    cfg: &SearchConfig,
) -> (Option<Rc<Term>>, SearchStats) {
    search_with(p, abs, holes, cfg, |_| {})
}

/// Search with an observer invoked on every dequeued complete candidate
/// (after the abstract reject, before the exact check). Used by tests to
/// audit enumeration completeness.
pub fn search_with<F: FnMut(&Rc<Term>)>(
    p: &Problem,
    abs: &AbstractSemantics,
    holes: &HoleTable,
    cfg: &SearchConfig,
    mut on_complete: F,
) -> (Option<Rc<Term>>, SearchStats) {
    let g = &p.grammar;
    let pruner = crate::focused::ExpansionPruner::new(p, abs, holes);
    let mut stats = SearchStats::default();
    let mut queue = BucketQueue::new(cfg.max_size);

    // per-nonterminal production lists, with arities alongside
    let by_nt: Vec<Vec<(crate::grammar::ProdId, u32)>> = (0..g.nonterminals.len() as u32)
        .map(|nt| {
            g.productions_of(crate::grammar::NtId(nt))
                .map(|pid| (pid, g.prod(pid).children.len() as u32))
                .collect()
        })
        .collect();
    let mut prods_scratch: Vec<crate::grammar::ProdId> = Vec::new();

    let root: Rc<Term> = Rc::new(Term::hole(g.start));
    queue.push(1, Entry::Root(root));
    stats.enqueued = 1;

    while let Some(entry) = queue.pop() {
        if stats.dequeued >= cfg.max_candidates {
            stats.budget_exceeded = true;
            return (None, stats);
        }
        let t = match entry {
            Entry::Root(t) => t,
            Entry::Expand { parent, prod } => {
                parent.expand(g, prod).expect("expansion of matching hole")
            }
        };
        stats.dequeued += 1;
        stats.max_size_reached = stats.max_size_reached.max(t.size());

        if t.is_complete() {
            // expansions were already filtered by prune when enqueued
            on_complete(&t);
            stats.complete_checked += 1;
            if check_examples(g, &t, &p.examples, cfg.fuel) {
                stats.solved = true;
                stats.solution_size = t.size();
                return (Some(t), stats);
            }
        } else {
            let (_, nt) = t.leftmost_hole().expect("incomplete term has a hole");
            prods_scratch.clear();
            prods_scratch.extend(
                by_nt[nt.0 as usize]
                    .iter()
                    .filter(|(_, arity)| t.size() + arity <= cfg.max_size)
                    .map(|(pid, _)| *pid),
            );
            if prods_scratch.is_empty() {
                continue;
            }
            let verdicts = if cfg.pruning_mode != PruningMode::Off {
                pruner.prune_children(&t, &prods_scratch)
            } else {
                vec![false; prods_scratch.len()]
            };
            for (&pid, pruned) in prods_scratch.iter().zip(verdicts) {
                if pruned {
                    stats.pruned += 1;
                    continue;
                }
                let priority = match cfg.priority {
                    Priority::Size => t.size() + g.prod(pid).children.len() as u32,
                    Priority::Depth => t.expand(g, pid).expect("expansion").depth(),
                };
                stats.enqueued += 1;
                queue.push(priority, Entry::Expand { parent: t.clone(), prod: pid });
            }
        }
    }
    (None, stats)
}

/// Everything the analysis phase produces for a problem: the chosen order
/// assignment, the monotonicity profile, the compiled abstract semantics,
/// and the per-example hole table.
pub struct Prepared {
    pub oa: OrderAssignment,
    pub profile: MonotonicityProfile,
    pub abs: AbstractSemantics,
    pub gfa_table: HoleTable,
    pub gfa_reports: Vec<GfaReport>,
}

pub fn prepare(p: &Problem, sample_cfg: &SampleCfg, gfa_cfg: &GfaCfg) -> Prepared {
    let candidates = candidate_assignments(p);
    let (oa, profile) = synthesize_orders(p, &candidates, sample_cfg);
    let abs = crate::absint::compile_abstract(p, &profile, 64);
    let (gfa_table, gfa_reports) = solve_all_examples(p, &abs, gfa_cfg);
    Prepared { oa, profile, abs, gfa_table, gfa_reports }
}

/// Hole table for a pruning mode; `Off` and `TopHoles` both read as top.
pub fn holes_for_mode(prepared: &Prepared, mode: PruningMode) -> HoleTable {
    match mode {
        PruningMode::GfaHoles => prepared.gfa_table.clone(),
        _ => HoleTable::empty(),
    }
}

#[derive(Debug, Clone)]
pub struct ModeOutcome {
    pub mode: PruningMode,
    pub solution: Option<String>,
    pub solution_term: Option<Rc<Term>>,
    pub stats: SearchStats,
}

/// Run the same problem under several pruning modes with one shared
/// analysis; ordering and budgets are identical across modes.
pub fn compare_runs(
    p: &Problem,
    prepared: &Prepared,
    modes: &[PruningMode],
    cfg: &SearchConfig,
) -> Vec<ModeOutcome> {
    modes
        .iter()
        .map(|&mode| {
            let holes = holes_for_mode(prepared, mode);
            let run_cfg = SearchConfig { pruning_mode: mode, ..cfg.clone() };
            let (solution, stats) = search(p, &prepared.abs, &holes, &run_cfg);
            ModeOutcome {
                mode,
                solution: solution.as_ref().map(|t| t.display(&p.grammar).to_string()),
                solution_term: solution,
                stats,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders;
    use crate::grammar::count_terms;

    fn prep(p: &Problem) -> Prepared {
        prepare(p, &SampleCfg::default(), &GfaCfg::default())
    }

    #[test]
    fn prune_worked_examples() {
        let p = builders::imp_fig1();
        let g = &p.grammar;
        let prepared = prep(&p);
        // x := 0; y := HOLE is inconsistent with (4,2) -> (2,4)
        let t = crate::grammar::parse_term(g, "(seq (assign-x 0) (assign-y ?E))", g.start).unwrap();
        assert!(prune(g, &prepared.abs, &t, &p.examples, &HoleTable::empty()));
        // a bare hole with top holes prunes nothing
        let hole = Term::hole(g.start);
        assert!(!prune(g, &prepared.abs, &hole, &p.examples, &HoleTable::empty()));

        let p = builders::regex_fig5();
        let g = &p.grammar;
        let prepared = prep(&p);
        let t = crate::grammar::parse_term(g, "(accepts (concat 0 ?R))", g.start).unwrap();
        assert!(prune(g, &prepared.abs, &t, &p.examples, &HoleTable::empty()));
    }

    #[test]
    fn unrealizable_problem_prunes_whole_space() {
        let p = builders::imp_unreal();
        let prepared = prep(&p);
        let holes = holes_for_mode(&prepared, PruningMode::GfaHoles);
        let cfg = SearchConfig { pruning_mode: PruningMode::GfaHoles, ..Default::default() };
        let (solution, stats) = search(&p, &prepared.abs, &holes, &cfg);
        assert!(solution.is_none());
        assert!(!stats.budget_exceeded, "queue must drain, not time out");
        // both expansions of the root hole are pruned immediately
        assert_eq!(stats.dequeued, 1);
        assert_eq!(stats.pruned, 2);
    }

    #[test]
    fn search_finds_boolean_target_in_all_modes() {
        let table: Vec<(Vec<bool>, bool)> = (0..4u32)
            .map(|b| {
                let x = b & 1 == 1;
                let y = b >> 1 & 1 == 1;
                (vec![x, y], x && !y)
            })
            .collect();
        let p = builders::boolean_problem("cube2", builders::BooleanStyle::Cube, 2, &table);
        let prepared = prep(&p);
        let cfg = SearchConfig { max_size: 12, ..Default::default() };
        let outcomes = compare_runs(
            &p,
            &prepared,
            &[PruningMode::Off, PruningMode::TopHoles, PruningMode::GfaHoles],
            &cfg,
        );
        for o in &outcomes {
            assert!(o.stats.solved, "{:?}", o.mode);
            let term = o.solution_term.as_ref().unwrap();
            assert!(check_examples(&p.grammar, term, &p.examples, 64));
        }
        // identical solutions and the dequeue chain off >= top >= gfa
        assert_eq!(outcomes[0].solution, outcomes[1].solution);
        assert_eq!(outcomes[1].solution, outcomes[2].solution);
        assert!(outcomes[2].stats.dequeued <= outcomes[1].stats.dequeued);
        assert!(outcomes[1].stats.dequeued <= outcomes[0].stats.dequeued);
    }

    #[test]
    fn ite_problem_solves_with_joined_guards() {
        let p = builders::imp_ite();
        let prepared = prep(&p);
        let cfg = SearchConfig { max_size: 8, ..Default::default() };
        let holes = holes_for_mode(&prepared, PruningMode::GfaHoles);
        let (solution, stats) = search(&p, &prepared.abs, &holes, &cfg);
        let t = solution.expect("max-of-two is expressible at size 6");
        assert!(check_examples(&p.grammar, &t, &p.examples, 64));
        assert!(stats.solved);
    }

    #[test]
    fn baseline_enumerates_exactly_the_grammar_terms() {
        // with pruning off, the dequeued complete terms up to size k are
        // exactly the grammar's terms, counted per size by the DP oracle
        for (mut p, k) in [(builders::imp_fig1(), 6u32), (builders::regex_tiny(), 5u32)] {
            // same input demanding two different outputs: no term satisfies
            let ex0 = p.examples[0].clone();
            let other_out = p.examples[1].output.clone();
            assert_ne!(ex0.output, other_out);
            p.examples = vec![
                ex0.clone(),
                crate::grammar::Example { input: ex0.input, output: other_out },
            ];
            let prepared = prep(&p);
            let g = &p.grammar;
            let mut by_size: std::collections::HashMap<u32, u64> = Default::default();
            let cfg = SearchConfig {
                max_size: k,
                max_candidates: 10_000_000,
                pruning_mode: PruningMode::Off,
                ..Default::default()
            };
            let (sol, _) = search_with(&p, &prepared.abs, &HoleTable::empty(), &cfg, |t| {
                *by_size.entry(t.size()).or_default() += 1;
            });
            assert!(sol.is_none(), "budget problems must not have tiny solutions");
            for size in 1..=k {
                assert_eq!(
                    by_size.get(&size).copied().unwrap_or(0),
                    count_terms(g, g.start, size),
                    "{} at size {size}",
                    p.name
                );
            }
        }
    }

    #[test]
    fn determinism_two_runs_bitwise_equal() {
        let p = builders::regex_tiny();
        let prepared = prep(&p);
        let cfg = SearchConfig::default();
        let holes = holes_for_mode(&prepared, PruningMode::GfaHoles);
        let (s1, st1) = search(&p, &prepared.abs, &holes, &cfg);
        let (s2, st2) = search(&p, &prepared.abs, &holes, &cfg);
        assert_eq!(st1, st2);
        assert_eq!(
            s1.map(|t| t.display(&p.grammar).to_string()),
            s2.map(|t| t.display(&p.grammar).to_string())
        );
    }

    #[test]
    fn depth_priority_is_available() {
        let p = builders::regex_tiny();
        let prepared = prep(&p);
        let cfg = SearchConfig { priority: Priority::Depth, ..Default::default() };
        let holes = holes_for_mode(&prepared, PruningMode::GfaHoles);
        let (sol, _) = search(&p, &prepared.abs, &holes, &cfg);
        let t = sol.expect("accepts(1) solves regex_tiny");
        assert!(check_examples(&p.grammar, &t, &p.examples, 64));
    }
}
