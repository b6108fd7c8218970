//! One PASS/FAIL line per acceptance criterion. Runs without the libtest
//! harness so the lines always print. Only failures outside
//! `KNOWN_SHORTFALLS` fail the target.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use common::{complete, dataset, gnp, integer_features, path, spmm, star, zoo, DATASETS};
use islandize::baseline::{
    island_trace, region_capacities, run_strategy, Strategy, REGION_WORKING,
};
use islandize::consumer::{
    aggregate_all, column_groups, consume_island, plan_island, window_cost, ConsumerConfig,
    HubAccumulator, OpLedger, Precombined, WindowPolicy,
};
use islandize::engine::{
    reference_forward, relative_error, run_inference, seeded_layers, synthetic_features,
    InferenceOptions, Normalization,
};
use islandize::graph::{generate_sbm, CsrGraph, SbmParams};
use islandize::locator::{
    islandize, region_violations, verify_islandization, Island, IslandizationResult, LocatorConfig,
};
use islandize::memory::{Matrix, MemoryModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria expected to fail; see the README.
const KNOWN_SHORTFALLS: &[u32] = &[5];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> (Outcome, Duration) {
    let t = Instant::now();
    let mut o = f();
    let took = t.elapsed();
    if let Some(limit) = limit {
        if took > limit {
            o.pass = false;
            o.detail += &format!("; over the {:?} budget", limit);
        }
    }
    (o, took)
}

fn random_graphs(count: u64) -> Vec<CsrGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    (0..count)
        .map(|i| {
            let n = rng.gen_range(2..=200);
            let p = [0.005, 0.02, 0.05, 0.1, 0.3][i as usize % 5];
            gnp(n, p, i)
        })
        .collect()
}

fn sbm(islands: usize, size: usize, hubs: usize, p_in: f64, attach: usize, seed: u64) -> CsrGraph {
    generate_sbm(&SbmParams {
        num_islands: islands,
        island_size: size,
        num_hubs: hubs,
        p_in,
        hub_attach: attach,
        seed,
    })
    .unwrap()
    .graph
}

fn invariants_hold(g: &CsrGraph, r: &IslandizationResult, c_max: usize) -> Result<(), String> {
    verify_islandization(g, r, Some(c_max)).map_err(|e| e.to_string())?;
    match region_violations(g, r) {
        Ok(0) => Ok(()),
        Ok(v) => Err(format!("{v} non-zeros outside the L-shapes and blocks")),
        Err(e) => Err(e.to_string()),
    }
}

fn criterion_1() -> Outcome {
    let (b, c) = (0, 1);
    let g = CsrGraph::from_edges(
        6,
        [b, c].into_iter().flat_map(|h| (2..6).map(move |n| (h, n))),
    )
    .unwrap();
    let island = Island::build(&g, 1, vec![2, 3, 4, 5, b, c], vec![]);
    let xw = integer_features(6, 8, 1);
    let conf = ConsumerConfig {
        k: 4,
        ..Default::default()
    };
    let mut acc = HubAccumulator::new(&[], 8);
    let mut l = OpLedger::default();
    let (rows, _) =
        consume_island(&island, &Precombined(xw.view()), &conf, &mut acc, &mut l).unwrap();
    let exact = rows == spmm(&g, &xw).select(ndarray::Axis(0), &island.nodes);
    let pass =
        exact && l.baseline_adds == 16 && l.aggregation_ops() == 10 && l.pruning_rate() == 0.375;
    outcome(
        pass,
        format!(
            "baseline {} ops, reuse {} ops ({} add/sub + {} formation), pruning {:.1}%",
            l.baseline_adds,
            l.aggregation_ops(),
            l.actual_adds + l.actual_subs,
            l.preagg_formation_adds,
            100.0 * l.pruning_rate()
        ),
    )
}

fn lossless_on(graphs: &[CsrGraph], loc: &LocatorConfig) -> Result<f64, String> {
    let mut worst = 0.0f64;
    for (i, g) in graphs.iter().enumerate() {
        let n = g.num_nodes();
        let x = synthetic_features(n, 6, i as u64);
        let norm = if i % 2 == 0 {
            Normalization::Sym
        } else {
            Normalization::None
        };
        let specs = seeded_layers(&[6, 4, 3], norm, i as u64).unwrap();
        let want = reference_forward(g, x.view(), &specs).unwrap();
        for k in [2, 4, 8] {
            for policy in [WindowPolicy::MinCost, WindowPolicy::PaperThreshold] {
                let c = ConsumerConfig {
                    k,
                    window_policy: policy,
                    ..Default::default()
                };
                let opts = InferenceOptions {
                    streaming: i % 3 == 0,
                    buffer_words: 0,
                };
                let got = run_inference(g, x.view(), &specs, loc, &c, &opts)
                    .map_err(|e| e.to_string())?;
                let err = relative_error(got.output.view(), want.view());
                worst = worst.max(err);
                if err > 1e-10 {
                    return Err(format!(
                        "graph {i} k {k} {policy:?}: relative error {err:e}"
                    ));
                }
            }
        }
    }
    Ok(worst)
}

fn cora_lossless(loc: &LocatorConfig) -> Result<f64, String> {
    let g = dataset("cora");
    let x = synthetic_features(g.num_nodes(), 1433, 3);
    let specs = seeded_layers(&[1433, 16, 7], Normalization::Sym, 3).unwrap();
    let want = reference_forward(&g, x.view(), &specs).unwrap();
    let opts = InferenceOptions {
        streaming: false,
        buffer_words: 0,
    };
    let got = run_inference(&g, x.view(), &specs, loc, &ConsumerConfig::default(), &opts)
        .map_err(|e| e.to_string())?;
    let err = relative_error(got.output.view(), want.view());
    if err > 1e-6 {
        return Err(format!("cora relative error {err:e}"));
    }
    Ok(err)
}

fn criterion_2() -> Outcome {
    let loc = LocatorConfig::default();
    match lossless_on(&random_graphs(100), &loc).and_then(|w| Ok((w, cora_lossless(&loc)?))) {
        Ok((w, c)) => outcome(
            true,
            format!("100 graphs x 6 configs worst {w:.1e}; cora {c:.1e}"),
        ),
        Err(e) => outcome(false, e),
    }
}

fn structural_suite() -> Vec<(String, CsrGraph)> {
    let mut all = zoo();
    for (i, g) in random_graphs(100).into_iter().enumerate() {
        all.push((format!("gnp{i}"), g));
    }
    for seed in 0..5 {
        all.push((format!("sbm{seed}"), sbm(6, 8, 3, 0.4, 2, seed)));
    }
    all.push(("star40".into(), star(40)));
    all.push(("path100".into(), path(100)));
    all.push(("k12".into(), complete(12)));
    // isolated nodes 10..20
    all.push((
        "isolated".into(),
        CsrGraph::from_edges(20, [(0, 1), (1, 2), (2, 0), (3, 4), (5, 6), (6, 7)]).unwrap(),
    ));
    for (name, _, _) in DATASETS {
        all.push((name.to_string(), dataset(name)));
    }
    all
}

fn structure_holds(loc: &LocatorConfig, graphs: &[(String, CsrGraph)]) -> Result<(), String> {
    for c_max in [4, loc.c_max] {
        let cfg = LocatorConfig {
            c_max,
            ..loc.clone()
        };
        for (name, g) in graphs {
            let r = islandize(g, &cfg).map_err(|e| format!("{name}: {e}"))?;
            invariants_hold(g, &r, c_max).map_err(|e| format!("{name} c_max {c_max}: {e}"))?;
        }
    }
    Ok(())
}

fn criterion_3() -> Outcome {
    let graphs = structural_suite();
    match structure_holds(&LocatorConfig::default(), &graphs) {
        Ok(()) => outcome(
            true,
            format!(
                "{} graphs at c_max 4 and 64, zero off-region non-zeros",
                graphs.len()
            ),
        ),
        Err(e) => outcome(false, e),
    }
}

fn criterion_4() -> Outcome {
    let p = generate_sbm(&SbmParams {
        num_islands: 4,
        island_size: 6,
        num_hubs: 2,
        p_in: 1.0,
        hub_attach: 1,
        seed: 7,
    })
    .unwrap();
    let g = &p.graph;
    let block_deg = p
        .planted
        .blocks
        .iter()
        .flatten()
        .map(|&u| g.degree(u))
        .max()
        .unwrap();
    let hub_deg = p.planted.hubs.iter().map(|&h| g.degree(h)).min().unwrap();
    let planted: BTreeSet<Vec<usize>> = p
        .planted
        .blocks
        .iter()
        .map(|b| {
            let mut b = b.clone();
            b.sort_unstable();
            b
        })
        .collect();
    let hubs: BTreeSet<usize> = p.planted.hubs.iter().copied().collect();
    for th in block_deg + 1..=hub_deg {
        let r = islandize(
            g,
            &LocatorConfig {
                th_init: Some(th),
                ..Default::default()
            },
        )
        .unwrap();
        let found: BTreeSet<Vec<usize>> = r
            .islands
            .iter()
            .map(|i| {
                let mut n = i.nodes.clone();
                n.sort_unstable();
                n
            })
            .collect();
        if r.hubs.iter().copied().collect::<BTreeSet<_>>() != hubs || found != planted {
            return outcome(false, format!("th_init {th}: recovered partition differs"));
        }
    }
    outcome(
        true,
        format!("exact at every th_init in {}..={hub_deg}", block_deg + 1),
    )
}

fn criterion_5() -> Outcome {
    let mut rates = Vec::new();
    let mut positive = true;
    let mut windows = Vec::new();
    for (name, _, _) in DATASETS {
        let g = dataset(name);
        let r = islandize(&g, &LocatorConfig::default()).unwrap();
        let xw = ndarray::Array2::<f64>::zeros((g.num_nodes(), 1));
        for k in [2, 4] {
            let c = ConsumerConfig {
                k,
                ..Default::default()
            };
            let rate = aggregate_all(&r, &Precombined(xw.view()), &c)
                .unwrap()
                .ledger
                .pruning_rate();
            positive &= rate > 0.0;
            rates.push(format!("{name} k{k} {:+.1}%", 100.0 * rate));
            for island in r.islands.iter().take(300) {
                windows.push((island.clone(), k));
            }
        }
    }

    // exhaustive minimum over {add each, subtract the rest} per sampled window
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    let mut mismatched = 0;
    while checked < 1000 {
        let (island, k) = &windows[rng.gen_range(0..windows.len())];
        let plan = plan_island(island, *k, WindowPolicy::MinCost);
        let groups = column_groups(island.num_local(), *k);
        let row = rng.gen_range(0..island.num_local());
        let g = rng.gen_range(0..groups.len());
        let cols = groups[g].clone();
        let s = cols.len();
        let nnz = cols.filter(|&c| island.local_edge(row, c)).count();
        let brute = if nnz == 0 { 0 } else { nnz.min(1 + s - nnz) };
        let planned = plan.rows[row]
            .windows
            .iter()
            .find(|w| w.group == g)
            .map_or(0, |w| w.cost);
        if planned != brute || window_cost(nnz, s, WindowPolicy::MinCost).1 != brute {
            mismatched += 1;
        }
        checked += 1;
    }
    let pass = positive && mismatched == 0;
    outcome(
        pass,
        format!(
            "{}; {checked} sampled windows, {mismatched} off the exhaustive minimum; published average 38%",
            rates.join(", ")
        ),
    )
}

fn criterion_6() -> Outcome {
    let width = 16;
    let cases = [
        ("cora", dataset("cora")),
        ("sbm32x32", sbm(32, 32, 8, 0.5, 2, 1)),
    ];
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, g) in &cases {
        let loc = LocatorConfig::default();
        let r = islandize(g, &loc).unwrap();
        let xw = integer_features(g.num_nodes(), width, 1);
        let buffer = (g.num_nodes() * width / 16) as u64;
        let c = ConsumerConfig::default();
        let reads = |s: Strategy| {
            run_strategy(g, xw.view(), s, Some((&r, &c, loc.c_max)), buffer)
                .unwrap()
                .1
                .reads_words
        };
        let (island, pull, push) = (
            reads(Strategy::Island),
            reads(Strategy::PullRowWise),
            reads(Strategy::PushOuterProduct),
        );
        let mut mem = MemoryModel::new(&region_capacities(
            Strategy::Island,
            buffer,
            width,
            loc.c_max,
        ));
        island_trace(g, &r, width, &mut mem).unwrap();
        let misses = mem.region_counters(REGION_WORKING, Matrix::XW).read_misses as usize;
        let once = misses == r.num_island_nodes();
        pass &= island < pull && island < push && once;
        parts.push(format!(
            "{name}: island {island} vs pull-row {pull} / push-outer {push} words, island-node misses {misses}/{}",
            r.num_island_nodes()
        ));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_7() -> Outcome {
    for seed in 0..20u64 {
        let g = gnp(40 + 8 * seed as usize, 0.06, seed);
        let xw = integer_features(g.num_nodes(), 5, seed);
        let loc = LocatorConfig {
            c_max: 16,
            ..Default::default()
        };
        let r = islandize(&g, &loc).unwrap();
        let c = ConsumerConfig::default();
        let outs: Vec<_> = Strategy::ALL
            .iter()
            .map(|&s| {
                run_strategy(&g, xw.view(), s, Some((&r, &c, loc.c_max)), 512)
                    .unwrap()
                    .0
            })
            .collect();
        if outs.iter().any(|o| *o != outs[0]) {
            return outcome(false, format!("graph {seed}: strategies disagree"));
        }
    }
    outcome(true, "20 graphs, five strategies bit-equal")
}

fn criterion_8() -> Outcome {
    for (name, _, _) in DATASETS {
        let g = dataset(name);
        let first = islandize(&g, &LocatorConfig::default()).unwrap();
        for _ in 1..5 {
            if islandize(&g, &LocatorConfig::default()).unwrap() != first {
                return outcome(false, format!("{name}: sequential runs differ"));
            }
        }
    }
    let graphs = structural_suite();
    let lossless: Vec<CsrGraph> = random_graphs(100);
    for seed in 0..3 {
        let loc = LocatorConfig::parallel(8, seed);
        if let Err(e) = structure_holds(&loc, &graphs) {
            return outcome(false, format!("parallel seed {seed}: {e}"));
        }
        if let Err(e) = lossless_on(&lossless, &loc).and_then(|_| cora_lossless(&loc)) {
            return outcome(false, format!("parallel seed {seed}: {e}"));
        }
    }
    outcome(
        true,
        "5 identical sequential runs per dataset; 3 seeded 8-worker runs pass 2 and 3",
    )
}

fn criterion_9() -> Outcome {
    let g = dataset("cora");
    let n = g.num_nodes() as u64;
    let dims = [1433, 16, 7];
    let x = synthetic_features(g.num_nodes(), dims[0], 9);
    let specs = seeded_layers(&dims, Normalization::Sym, 9).unwrap();
    let opts = InferenceOptions {
        streaming: false,
        buffer_words: 0,
    };
    let inf = run_inference(
        &g,
        x.view(),
        &specs,
        &LocatorConfig::default(),
        &ConsumerConfig::default(),
        &opts,
    )
    .unwrap();
    let t = &inf.report.total;
    let macs: u64 = dims.windows(2).map(|d| n * (d[0] * d[1]) as u64).sum();
    let adds = (dims.len() as u64 - 1) * g.nnz() as u64;
    outcome(
        t.combination_macs == macs && t.baseline_adds == adds,
        format!(
            "macs {} (expect {macs}), baseline adds {} (expect {adds}); aggregation share {:.2}% with reuse, {:.2}% without; published average 23%",
            t.combination_macs,
            t.baseline_adds,
            100.0 * inf.report.aggregation_share,
            100.0 * inf.report.baseline_aggregation_share
        ),
    )
}

fn main() {
    let secs = |s| Some(Duration::from_secs(s));
    type Criterion = (u32, Option<Duration>, fn() -> Outcome);
    let criteria: Vec<Criterion> = vec![
        (1, secs(1), criterion_1),
        (2, secs(120), criterion_2),
        (3, secs(60), criterion_3),
        (4, None, criterion_4),
        (5, None, criterion_5),
        (6, secs(60), criterion_6),
        (7, None, criterion_7),
        (8, None, criterion_8),
        (9, None, criterion_9),
    ];
    let mut unexpected = Vec::new();
    for (id, limit, run) in criteria {
        let (o, took) = timed(limit, run);
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {id}: {verdict} ({:.2}s) {}",
            took.as_secs_f64(),
            o.detail
        );
        if !o.pass && !KNOWN_SHORTFALLS.contains(&id) {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
