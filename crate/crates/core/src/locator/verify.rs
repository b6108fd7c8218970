//! Mechanical checks of an [`IslandizationResult`] against its source graph.

use std::collections::HashSet;

use super::islandize::{IslandizationResult, NodeClass};
use crate::error::{Error, Result};
use crate::graph::{spy_coordinates, CsrGraph};

fn violation(msg: String) -> Error {
    Error::Contract(msg)
}

/// Checks partition, bitmap fidelity, closure, size bound, inter-hub
/// completeness and exact edge cover. `c_max` is checked when given.
pub fn verify_islandization(
    graph: &CsrGraph,
    result: &IslandizationResult,
    c_max: Option<usize>,
) -> Result<()> {
    let n = graph.num_nodes();
    if result.num_nodes != n {
        return Err(violation(format!(
            "result covers {} nodes, graph has {n}",
            result.num_nodes
        )));
    }

    // partition: every node exactly once
    let mut seen = vec![0u8; n];
    for &h in &result.hubs {
        seen[h] += 1;
    }
    for island in &result.islands {
        for &u in &island.nodes {
            seen[u] += 1;
        }
    }
    if let Some(u) = seen.iter().position(|&c| c != 1) {
        return Err(violation(format!("node {u} classified {} times", seen[u])));
    }
    let class = result.classification();
    let is_hub = |u: usize| class[u] == Some(NodeClass::Hub);

    let mut covered = 0usize;
    for (idx, island) in result.islands.iter().enumerate() {
        if island.nodes.is_empty() {
            return Err(violation(format!("island {idx} is empty")));
        }
        if let Some(cap) = c_max {
            if island.nodes.len() > cap {
                return Err(violation(format!(
                    "island {idx} has {} nodes > c_max {cap}",
                    island.nodes.len()
                )));
            }
        }
        if island.bitmap.rows() != island.num_local() || island.bitmap.cols() != island.nodes.len()
        {
            return Err(violation(format!(
                "island {idx} bitmap has the wrong shape"
            )));
        }
        let members: HashSet<usize> = island.nodes.iter().copied().collect();
        let hubs: HashSet<usize> = island.hubs.iter().copied().collect();
        if let Some(&h) = island.hubs.iter().find(|&&h| !is_hub(h)) {
            return Err(violation(format!(
                "island {idx} lists non-hub {h} as a hub"
            )));
        }
        for &u in &island.nodes {
            for &v in graph.neighbors(u) {
                if !members.contains(&v) && !hubs.contains(&v) {
                    return Err(violation(format!(
                        "island {idx} not closed: {u} -> {v} leaves the island"
                    )));
                }
            }
        }
        let local: Vec<usize> = island.local_nodes().collect();
        for (row, &a) in local.iter().enumerate() {
            for (col, &b) in island.nodes.iter().enumerate() {
                if island.bitmap.get(row, col) != graph.has_edge(a, b) {
                    return Err(violation(format!(
                        "island {idx} bitmap ({row}, {col}) disagrees with edge ({a}, {b})"
                    )));
                }
            }
        }
        let hub_rows: usize = (0..island.hubs.len())
            .map(|r| island.bitmap.row_count_ones(r))
            .sum();
        if island
            .hubs
            .iter()
            .enumerate()
            .any(|(r, _)| island.bitmap.row_count_ones(r) == 0)
        {
            return Err(violation(format!(
                "island {idx} lists a hub with no edge into it"
            )));
        }
        let inner = island.bitmap.count_ones() - hub_rows;
        covered += hub_rows + inner / 2;
    }

    let mut inter = HashSet::new();
    for &(a, b) in &result.inter_hub_edges {
        if !is_hub(a) || !is_hub(b) || !graph.has_edge(a, b) {
            return Err(violation(format!("({a}, {b}) is not a hub-hub edge")));
        }
        if !inter.insert((a.min(b), a.max(b))) {
            return Err(violation(format!("inter-hub edge ({a}, {b}) listed twice")));
        }
    }
    let hub_hub = graph
        .undirected_edges()
        .filter(|&(a, b)| is_hub(a) && is_hub(b))
        .count();
    if hub_hub != inter.len() {
        return Err(violation(format!(
            "{hub_hub} hub-hub edges but {} inter-hub entries",
            inter.len()
        )));
    }
    covered += inter.len();
    if covered != graph.num_edges() {
        return Err(violation(format!(
            "islands and inter-hub edges cover {covered} of {} edges",
            graph.num_edges()
        )));
    }
    Ok(())
}

/// Counts non-zeros of the islandization-permuted adjacency matrix lying
/// outside hub rows, hub columns and the diagonal island blocks.
pub fn region_violations(graph: &CsrGraph, result: &IslandizationResult) -> Result<usize> {
    let perm = result.permutation()?;
    let coords = spy_coordinates(graph, &perm)?;
    // label each position: None for a hub, Some(block) for an island
    let mut label: Vec<Option<usize>> = vec![None; perm.len()];
    let mut pos = 0;
    let mut hub_cursor = 0;
    let mut island_cursor = 0;
    for (r, rec) in result.rounds.iter().enumerate() {
        pos += rec.num_hubs;
        hub_cursor += rec.num_hubs;
        while island_cursor < result.islands.len() && result.islands[island_cursor].round == r + 1 {
            for _ in &result.islands[island_cursor].nodes {
                label[pos] = Some(island_cursor);
                pos += 1;
            }
            island_cursor += 1;
        }
    }
    debug_assert_eq!(hub_cursor, result.hubs.len());
    Ok(coords
        .iter()
        .filter(|&&(r, c)| match (label[r], label[c]) {
            (None, _) | (_, None) => false,
            (Some(a), Some(b)) => a != b,
        })
        .count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::locator::{islandize, LocatorConfig};

    #[test]
    fn accepts_valid_and_rejects_tampered() {
        let g = CsrGraph::from_edges(
            7,
            [
                (0, 1),
                (0, 2),
                (0, 3),
                (0, 4),
                (1, 2),
                (3, 4),
                (4, 5),
                (5, 6),
            ],
        )
        .unwrap();
        let cfg = LocatorConfig {
            th_init: Some(3),
            ..Default::default()
        };
        let r = islandize(&g, &cfg).unwrap();
        verify_islandization(&g, &r, Some(cfg.c_max)).unwrap();
        assert_eq!(region_violations(&g, &r).unwrap(), 0);

        let mut broken = r.clone();
        broken.inter_hub_edges.push((0, 0));
        assert!(verify_islandization(&g, &broken, None).is_err());

        let mut broken = r.clone();
        let moved = broken.islands[0].nodes.pop().unwrap();
        broken.hubs.push(moved);
        assert!(verify_islandization(&g, &broken, None).is_err());
    }

    #[test]
    fn region_test_detects_cross_block_entries() {
        // two islands joined by an edge that the result pretends is absent
        let g = CsrGraph::from_edges(2, [(0, 1)]).unwrap();
        let r = IslandizationResult {
            num_nodes: 2,
            hubs: vec![],
            islands: vec![
                crate::locator::Island {
                    round: 1,
                    nodes: vec![0],
                    hubs: vec![],
                    bitmap: crate::locator::BitMatrix::new(1, 1),
                },
                crate::locator::Island {
                    round: 1,
                    nodes: vec![1],
                    hubs: vec![],
                    bitmap: crate::locator::BitMatrix::new(1, 1),
                },
            ],
            inter_hub_edges: vec![],
            rounds: vec![crate::locator::RoundRecord {
                threshold: 1,
                num_hubs: 0,
                num_islands: 2,
                num_tasks: 0,
                aborted_overlap: 0,
                aborted_size: 0,
                forced_decay: false,
            }],
            adjacency_reads: 0,
        };
        assert_eq!(region_violations(&g, &r).unwrap(), 2);
        assert!(verify_islandization(&g, &r, None).is_err());
    }
}
