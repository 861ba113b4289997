use monosynth::builders;
use monosynth::gfa::GfaCfg;
use monosynth::order::SampleCfg;
use monosynth::search::{holes_for_mode, prepare, search, PruningMode, SearchConfig};

#[test]
fn short_swap() {
    let p = builders::imp_fig1();
    let prepared = prepare(&p, &SampleCfg::default(), &GfaCfg::default());
    let cfg = SearchConfig {
        max_size: 14,
        max_candidates: 150_000,
        pruning_mode: PruningMode::GfaHoles,
        ..Default::default()
    };
    let holes = holes_for_mode(&prepared, PruningMode::GfaHoles);
    let (sol, stats) = search(&p, &prepared.abs, &holes, &cfg);
    println!("short: dequeued={} sol={:?}", stats.dequeued, sol.is_some());
}
