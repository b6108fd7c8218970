#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use islandize::graph::{load_edge_list, CsrGraph, IngestOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Name, node count, and the nnz counted by the fetch script's set-based pass.
pub const DATASETS: [(&str, usize, usize); 3] = [
    ("cora", 2708, 10556),
    ("citeseer", 3327, 9104),
    ("pubmed", 19717, 88648),
];

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(format!("{name}.edges"))
}

pub fn dataset(name: &str) -> CsrGraph {
    let (_, n, _) = DATASETS
        .iter()
        .find(|d| d.0 == name)
        .expect("known dataset");
    load_edge_list(
        data_path(name),
        &IngestOptions {
            num_nodes: Some(*n),
            ..Default::default()
        },
    )
    .unwrap_or_else(|e| panic!("{name}: {e} (run scripts/fetch_datasets.py)"))
}

/// Erdős–Rényi graph with edge probability `p`.
pub fn gnp(n: usize, p: f64, seed: u64) -> CsrGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    CsrGraph::from_edges(n, edges).unwrap()
}

pub fn star(leaves: usize) -> CsrGraph {
    CsrGraph::from_edges(leaves + 1, (1..=leaves).map(|l| (0, l))).unwrap()
}

pub fn path(n: usize) -> CsrGraph {
    CsrGraph::from_edges(n, (1..n).map(|i| (i - 1, i))).unwrap()
}

pub fn complete(n: usize) -> CsrGraph {
    CsrGraph::from_edges(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)))).unwrap()
}

/// A mix of shapes used by several invariant sweeps.
pub fn zoo() -> Vec<(String, CsrGraph)> {
    let mut out = vec![
        ("star8".to_string(), star(8)),
        ("path40".to_string(), path(40)),
        ("path200".to_string(), path(200)),
        ("k12".to_string(), complete(12)),
        ("isolated".to_string(), CsrGraph::empty(5)),
        (
            "mixed-isolated".to_string(),
            CsrGraph::from_edges(10, [(0, 1), (1, 2), (2, 0), (5, 6)]).unwrap(),
        ),
    ];
    for seed in 0..20u64 {
        let n = 20 + (seed as usize * 9) % 180;
        let p = [0.01, 0.03, 0.08, 0.2][seed as usize % 4];
        out.push((format!("gnp{n}-{p}-{seed}"), gnp(n, p, seed)));
    }
    out
}

/// Brute-force `A · X` over the binary adjacency.
pub fn spmm(graph: &CsrGraph, x: &ndarray::Array2<f64>) -> ndarray::Array2<f64> {
    let mut out = ndarray::Array2::zeros(x.dim());
    for u in 0..graph.num_nodes() {
        for &v in graph.neighbors(u) {
            for c in 0..x.ncols() {
                out[[u, c]] += x[[v, c]];
            }
        }
    }
    out
}

/// Small-integer features, so every summation order is exact.
pub fn integer_features(rows: usize, cols: usize, seed: u64) -> ndarray::Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ndarray::Array2::from_shape_simple_fn((rows, cols), || rng.gen_range(-8i32..=8) as f64)
}

/// Components of the graph restricted to `keep`, by union-find.
pub fn components(graph: &CsrGraph, keep: &[bool]) -> Vec<BTreeSet<usize>> {
    let n = graph.num_nodes();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for u in 0..n {
        if !keep[u] {
            continue;
        }
        for &v in graph.neighbors(u) {
            if keep[v] {
                let (a, b) = (find(&mut parent, u), find(&mut parent, v));
                parent[a] = b;
            }
        }
    }
    let mut groups = std::collections::BTreeMap::<usize, BTreeSet<usize>>::new();
    for u in (0..n).filter(|&u| keep[u]) {
        let r = find(&mut parent, u);
        groups.entry(r).or_default().insert(u);
    }
    groups.into_values().collect()
}
