use monosynth::gfa::GfaCfg;
use monosynth::order::SampleCfg;
use monosynth::problem::parse_problem;
use monosynth::search::{holes_for_mode, prepare, search, PruningMode, SearchConfig};
use std::time::Instant;

fn imp_with_order(s_prods: &[&str], e_prods: &[&str]) -> monosynth::Problem {
    let defs = [
        ("assign-x", "  (production S assign-x (E)\n    (rule (inputs input) (output (tuple (child 1) (proj input 1)))))\n"),
        ("assign-y", "  (production S assign-y (E)\n    (rule (inputs input) (output (tuple (proj input 0) (child 1)))))\n"),
        ("seq", "  (production S seq (S S)\n    (rule (inputs input (child 1)) (output (child 2))))\n"),
        ("0", "  (production E 0 ()\n    (rule (inputs) (output 0)))\n"),
        ("1", "  (production E 1 ()\n    (rule (inputs) (output 1)))\n"),
        ("x", "  (production E x ()\n    (rule (inputs) (output (proj input 0))))\n"),
        ("y", "  (production E y ()\n    (rule (inputs) (output (proj input 1))))\n"),
        ("add", "  (production E add (E E)\n    (rule (inputs input input) (output (+ (child 1) (child 2)))))\n"),
        ("sub", "  (production E sub (E E)\n    (rule (inputs input input) (output (- (child 1) (child 2)))))\n"),
    ];
    let mut text = String::from("(problem\n  (name \"imp_swap\")\n  (nonterminal S (tuple int int) (tuple int int))\n  (nonterminal E (tuple int int) int)\n  (start S)\n");
    for op in s_prods.iter().chain(e_prods) {
        text.push_str(defs.iter().find(|(k, _)| k == op).unwrap().1);
    }
    text.push_str("  (example (tuple 4 2) (tuple 2 4))\n  (example (tuple 3 3) (tuple 3 3)))\n");
    parse_problem(&text).unwrap()
}

#[test]
fn order_scan() {
    let cases: Vec<(&str, Vec<&str>, Vec<&str>)> = vec![
        ("vars-first0", vec!["assign-x", "assign-y", "seq"], vec!["x", "y", "0", "1", "add", "sub"]),
        ("paper", vec!["assign-x", "assign-y", "seq"], vec!["0", "1", "x", "y", "add", "sub"]),
        ("seq-first", vec!["seq", "assign-x", "assign-y"], vec!["0", "1", "x", "y", "add", "sub"]),
        ("vars-first", vec!["assign-x", "assign-y", "seq"], vec!["x", "y", "0", "1", "add", "sub"]),
        ("seq+vars", vec!["seq", "assign-x", "assign-y"], vec!["x", "y", "0", "1", "add", "sub"]),
        ("ops-first", vec!["assign-x", "assign-y", "seq"], vec!["add", "sub", "x", "y", "0", "1"]),
    ];
    for (label, sp, ep) in cases {
        let p = imp_with_order(&sp, &ep);
        let prepared = prepare(&p, &SampleCfg::default(), &GfaCfg::default());
        let holes = holes_for_mode(&prepared, PruningMode::GfaHoles);
        let cfg = SearchConfig {
            max_size: 14,
            max_candidates: 40_000_000,
            pruning_mode: PruningMode::GfaHoles,
            ..Default::default()
        };
        let t0 = Instant::now();
        let (sol, stats) = search(&p, &prepared.abs, &holes, &cfg);
        println!(
            "{label}: {}ms dequeued={} solved={} sol={:?}",
            t0.elapsed().as_millis(),
            stats.dequeued,
            stats.solved,
            sol.map(|t| t.display(&p.grammar).to_string())
        );
    }
}
