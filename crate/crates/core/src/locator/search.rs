//! The three per-round stages: hub detection, BFS task generation and
//! threshold-bounded BFS.

use std::collections::HashSet;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bitmap::BitMatrix;
use crate::graph::{CsrGraph, NodeId};

/// A closed group of nodes whose only outside neighbors are its hubs.
///
/// `bitmap` has one row per hub followed by one row per island node and one
/// column per island node; bit `(r, c)` is set iff the row node and column
/// node are adjacent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Island {
    pub round: usize,
    /// In BFS visit order.
    pub nodes: Vec<NodeId>,
    pub hubs: Vec<NodeId>,
    #[serde(rename = "bitmap_rle")]
    pub bitmap: BitMatrix,
}

impl Island {
    pub fn num_local(&self) -> usize {
        self.hubs.len() + self.nodes.len()
    }

    /// Local column order: hubs first, then island nodes.
    pub fn local_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.hubs.iter().chain(self.nodes.iter()).copied()
    }

    /// Adjacency between two local positions (hubs then nodes). Hub-hub pairs
    /// are never part of an island and read as zero.
    #[inline]
    pub fn local_edge(&self, a: usize, b: usize) -> bool {
        let h = self.hubs.len();
        match (a >= h, b >= h) {
            (_, true) => self.bitmap.get(a, b - h),
            (true, false) => self.bitmap.get(b, a - h),
            (false, false) => false,
        }
    }

    /// Builds the bitmap of `nodes` and `hubs` from `graph`.
    pub fn build(graph: &CsrGraph, round: usize, nodes: Vec<NodeId>, hubs: Vec<NodeId>) -> Self {
        let mut bitmap = BitMatrix::new(hubs.len() + nodes.len(), nodes.len());
        let mut row_of = std::collections::HashMap::with_capacity(hubs.len() + nodes.len());
        for (i, &v) in hubs.iter().chain(nodes.iter()).enumerate() {
            row_of.insert(v, i);
        }
        for (col, &u) in nodes.iter().enumerate() {
            for &n in graph.neighbors(u) {
                if let Some(&row) = row_of.get(&n) {
                    bitmap.set(row, col);
                }
            }
        }
        Self {
            round,
            nodes,
            hubs,
            bitmap,
        }
    }
}

/// Starting point for one BFS: a hub and one of its non-hub neighbors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Task {
    pub hub: NodeId,
    pub start: NodeId,
}

pub type SearchId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Claim {
    Acquired,
    AlreadyMine,
    Taken(SearchId),
}

/// Shared visit set: each node is free or owned by exactly one search.
/// Completed islands keep their claims, so a claimed node is either in an
/// island or inside a search still running.
///
/// Nodes seen by a search that aborted on size are also tagged with the
/// round: their below-threshold component is too large for this round, so
/// any later search reaching them is bound to abort the same way.
#[derive(Debug)]
pub struct ClaimTable {
    owners: Vec<AtomicUsize>,
    oversized: Vec<AtomicUsize>,
}

const FREE: usize = 0;

impl ClaimTable {
    pub fn new(num_nodes: usize) -> Self {
        Self {
            owners: (0..num_nodes).map(|_| AtomicUsize::new(FREE)).collect(),
            oversized: (0..num_nodes).map(|_| AtomicUsize::new(0)).collect(),
        }
    }

    /// `search` must be non-zero.
    #[inline]
    pub fn try_claim(&self, node: NodeId, search: SearchId) -> Claim {
        debug_assert_ne!(search, FREE);
        match self.owners[node].compare_exchange(FREE, search, Ordering::AcqRel, Ordering::Acquire)
        {
            Ok(_) => Claim::Acquired,
            Err(owner) if owner == search => Claim::AlreadyMine,
            Err(owner) => Claim::Taken(owner),
        }
    }

    pub fn owner(&self, node: NodeId) -> Option<SearchId> {
        match self.owners[node].load(Ordering::Acquire) {
            FREE => None,
            s => Some(s),
        }
    }

    pub fn release(&self, nodes: &[NodeId], search: SearchId) {
        for &n in nodes {
            let _ =
                self.owners[n].compare_exchange(search, FREE, Ordering::AcqRel, Ordering::Relaxed);
        }
    }

    pub fn mark_oversized(&self, nodes: &[NodeId], round: usize) {
        for &n in nodes {
            self.oversized[n].store(round, Ordering::Release);
        }
    }

    #[inline]
    pub fn is_oversized(&self, node: NodeId, round: usize) -> bool {
        self.oversized[node].load(Ordering::Acquire) == round
    }

    pub fn count_owned_by(&self, search: SearchId) -> usize {
        self.owners
            .iter()
            .filter(|o| o.load(Ordering::Acquire) == search)
            .count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BfsOutcome {
    Completed(Island),
    /// Reached a node owned by another search, or the task went stale.
    AbortedOverlap,
    /// Island would exceed `c_max` nodes.
    AbortedSize,
}

/// Unclassified nodes with `degree >= threshold`, ascending.
pub fn detect_hubs(graph: &CsrGraph, threshold: usize, classified: &[bool]) -> Vec<NodeId> {
    (0..graph.num_nodes())
        .filter(|&u| !classified[u] && graph.degree(u) >= threshold)
        .collect()
}

/// Same result as [`detect_hubs`], sweeping `lanes` node ranges in parallel.
pub fn detect_hubs_parallel(
    graph: &CsrGraph,
    threshold: usize,
    classified: &[bool],
    lanes: usize,
) -> Vec<NodeId> {
    let n = graph.num_nodes();
    let chunk = n.div_ceil(lanes.max(1)).max(1);
    (0..n.div_ceil(chunk))
        .into_par_iter()
        .flat_map_iter(|lane| {
            let lo = lane * chunk;
            (lo..(lo + chunk).min(n))
                .filter(|&u| !classified[u] && graph.degree(u) >= threshold)
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Splits each hub's adjacency into BFS tasks and inter-hub edges.
/// `is_hub` must already include `hubs`. Inter-hub pairs are returned once as
/// `(min, max)` in first-seen order.
pub fn assign_tasks(
    graph: &CsrGraph,
    hubs: &[NodeId],
    is_hub: &[bool],
) -> (Vec<Task>, Vec<(NodeId, NodeId)>) {
    let mut tasks = Vec::new();
    let mut inter = Vec::new();
    let mut seen = HashSet::new();
    for &h in hubs {
        for &n in graph.neighbors(h) {
            if is_hub[n] {
                let pair = (h.min(n), h.max(n));
                if seen.insert(pair) {
                    inter.push(pair);
                }
            } else {
                tasks.push(Task { hub: h, start: n });
            }
        }
    }
    (tasks, inter)
}

#[derive(Debug, Clone, Copy)]
pub struct BfsLimits {
    pub threshold: usize,
    pub c_max: usize,
    pub round: usize,
}

/// Threshold-bounded BFS from `task.start`.
///
/// Nodes with `degree >= threshold` are collected as hubs and not traversed.
/// Every other node reached is claimed for `search`; on either abort path all
/// claims taken by this search are released before returning. Reaching a node
/// tagged oversized in this round aborts on size at once. `adjacency_reads`
/// grows by the length of every adjacency list fetched.
pub fn tp_bfs(
    graph: &CsrGraph,
    task: Task,
    limits: BfsLimits,
    claims: &ClaimTable,
    search: SearchId,
    adjacency_reads: &mut u64,
) -> BfsOutcome {
    let BfsLimits {
        threshold,
        c_max,
        round,
    } = limits;
    if graph.degree(task.start) >= threshold {
        return BfsOutcome::AbortedOverlap;
    }
    if claims.is_oversized(task.start, round) && claims.owner(task.start).is_none() {
        return BfsOutcome::AbortedSize;
    }
    if claims.try_claim(task.start, search) != Claim::Acquired {
        return BfsOutcome::AbortedOverlap;
    }

    let mut local = vec![task.start];
    let mut hubs = Vec::new();
    let mut hub_seen = HashSet::new();
    if graph.has_edge(task.hub, task.start) {
        hubs.push(task.hub);
        hub_seen.insert(task.hub);
    }

    let mut query = 0;
    while query < local.len() {
        let node = local[query];
        let neighbors = graph.neighbors(node);
        *adjacency_reads += neighbors.len() as u64;
        for &n in neighbors {
            if graph.degree(n) >= threshold {
                if hub_seen.insert(n) {
                    hubs.push(n);
                }
                continue;
            }
            match claims.try_claim(n, search) {
                Claim::AlreadyMine => {}
                Claim::Acquired => {
                    local.push(n);
                    if local.len() > c_max || claims.is_oversized(n, round) {
                        claims.mark_oversized(&local, round);
                        claims.release(&local, search);
                        return BfsOutcome::AbortedSize;
                    }
                }
                Claim::Taken(_) => {
                    claims.release(&local, search);
                    return BfsOutcome::AbortedOverlap;
                }
            }
        }
        query += 1;
    }
    BfsOutcome::Completed(Island::build(graph, round, local, hubs))
}
