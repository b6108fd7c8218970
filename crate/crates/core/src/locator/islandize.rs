//! Round driver: detect hubs, generate tasks, run TP-BFS, decay, repeat.

use log::{debug, warn};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bitmap::BitMatrix;
use super::config::{LocatorConfig, LocatorMode};
use super::search::{
    assign_tasks, detect_hubs, detect_hubs_parallel, tp_bfs, BfsLimits, BfsOutcome, ClaimTable,
    Island, Task,
};
use crate::error::{Error, Result};
use crate::graph::{CsrGraph, NodeId, NodePermutation};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub threshold: usize,
    pub num_hubs: usize,
    pub num_islands: usize,
    pub num_tasks: usize,
    pub aborted_overlap: usize,
    pub aborted_size: usize,
    /// The decay rule could not lower the threshold after this round and a
    /// decrement by one was forced instead.
    #[serde(default)]
    pub forced_decay: bool,
}

/// Hub/island decomposition of a graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IslandizationResult {
    pub num_nodes: usize,
    /// In detection order; round `r` contributed `rounds[r - 1].num_hubs`
    /// consecutive entries.
    pub hubs: Vec<NodeId>,
    pub islands: Vec<Island>,
    pub inter_hub_edges: Vec<(NodeId, NodeId)>,
    pub rounds: Vec<RoundRecord>,
    pub adjacency_reads: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeClass {
    Hub,
    Island(usize),
}

impl IslandizationResult {
    /// Class of each node, or `None` for a node the result does not cover.
    pub fn classification(&self) -> Vec<Option<NodeClass>> {
        let mut class = vec![None; self.num_nodes];
        for &h in &self.hubs {
            class[h] = Some(NodeClass::Hub);
        }
        for (i, island) in self.islands.iter().enumerate() {
            for &u in &island.nodes {
                class[u] = Some(NodeClass::Island(i));
            }
        }
        class
    }

    pub fn num_island_nodes(&self) -> usize {
        self.islands.iter().map(|i| i.nodes.len()).sum()
    }

    /// Round by round: that round's hubs, then the nodes of that round's
    /// islands in completion order and BFS order.
    pub fn permutation(&self) -> Result<NodePermutation> {
        let mut order = Vec::with_capacity(self.num_nodes);
        let mut hub_cursor = 0;
        let mut island_cursor = 0;
        for (r, rec) in self.rounds.iter().enumerate() {
            order.extend_from_slice(&self.hubs[hub_cursor..hub_cursor + rec.num_hubs]);
            hub_cursor += rec.num_hubs;
            while island_cursor < self.islands.len() && self.islands[island_cursor].round == r + 1 {
                order.extend_from_slice(&self.islands[island_cursor].nodes);
                island_cursor += 1;
            }
        }
        if hub_cursor != self.hubs.len() || island_cursor != self.islands.len() {
            return Err(Error::Contract(
                "round records do not account for every hub and island".into(),
            ));
        }
        NodePermutation::new(order)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Argument(format!("bad result JSON: {e}")))
    }
}

pub fn islandization_permutation(result: &IslandizationResult) -> Result<NodePermutation> {
    result.permutation()
}

pub fn islandize(graph: &CsrGraph, cfg: &LocatorConfig) -> Result<IslandizationResult> {
    islandize_streaming(graph, cfg, |_| {})
}

/// As [`islandize`], handing every island to `sink` as soon as it is final.
/// Sequential mode emits islands in completion order; parallel mode emits a
/// round's islands at the round barrier.
pub fn islandize_streaming<F>(
    graph: &CsrGraph,
    cfg: &LocatorConfig,
    mut sink: F,
) -> Result<IslandizationResult>
where
    F: FnMut(&Island),
{
    cfg.validate()?;
    let n = graph.num_nodes();
    let mut result = IslandizationResult {
        num_nodes: n,
        hubs: Vec::new(),
        islands: Vec::new(),
        inter_hub_edges: Vec::new(),
        rounds: Vec::new(),
        adjacency_reads: 0,
    };
    if n == 0 {
        return Ok(result);
    }

    let pool = match cfg.mode {
        LocatorMode::Sequential => None,
        LocatorMode::Parallel => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.p1.max(cfg.p2))
                .build()
                .map_err(|e| Error::Argument(format!("thread pool: {e}")))?,
        ),
    };

    let claims = ClaimTable::new(n);
    let mut classified = vec![false; n];
    let mut is_hub = vec![false; n];
    let mut remaining = n;
    let mut threshold = cfg.initial_threshold(graph.max_degree());
    let mut next_search = 1usize;

    while remaining > 0 {
        let round = result.rounds.len() + 1;
        let hubs = match &pool {
            None => detect_hubs(graph, threshold, &classified),
            Some(pool) => {
                pool.install(|| detect_hubs_parallel(graph, threshold, &classified, cfg.p1))
            }
        };
        for &h in &hubs {
            is_hub[h] = true;
            classified[h] = true;
        }
        remaining -= hubs.len();
        result.hubs.extend_from_slice(&hubs);

        let (tasks, inter) = assign_tasks(graph, &hubs, &is_hub);
        result.adjacency_reads += hubs.iter().map(|&h| graph.degree(h) as u64).sum::<u64>();
        result.inter_hub_edges.extend(inter);

        let limits = BfsLimits {
            threshold,
            c_max: cfg.c_max,
            round,
        };
        let mut record = RoundRecord {
            threshold,
            num_hubs: hubs.len(),
            num_islands: 0,
            num_tasks: tasks.len(),
            aborted_overlap: 0,
            aborted_size: 0,
            forced_decay: false,
        };

        let mut accept = |island: Island,
                          result: &mut IslandizationResult,
                          classified: &mut [bool],
                          record: &mut RoundRecord| {
            for &u in &island.nodes {
                classified[u] = true;
            }
            remaining -= island.nodes.len();
            record.num_islands += 1;
            sink(&island);
            result.islands.push(island);
        };

        match &pool {
            None => {
                for task in tasks {
                    let search = next_search;
                    next_search += 1;
                    match tp_bfs(
                        graph,
                        task,
                        limits,
                        &claims,
                        search,
                        &mut result.adjacency_reads,
                    ) {
                        BfsOutcome::Completed(island) => {
                            accept(island, &mut result, &mut classified, &mut record)
                        }
                        BfsOutcome::AbortedOverlap => record.aborted_overlap += 1,
                        BfsOutcome::AbortedSize => record.aborted_size += 1,
                    }
                }
            }
            Some(pool) => {
                let mut order: Vec<(usize, Task)> = tasks.into_iter().enumerate().collect();
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (round as u64).rotate_left(32));
                order.shuffle(&mut rng);
                let base = next_search;
                next_search += order.len();
                let mut outcomes: Vec<(usize, BfsOutcome, u64)> = pool.install(|| {
                    order
                        .par_iter()
                        .map(|&(idx, task)| {
                            let mut reads = 0u64;
                            let out = tp_bfs(graph, task, limits, &claims, base + idx, &mut reads);
                            (idx, out, reads)
                        })
                        .collect()
                });
                outcomes.sort_by_key(|o| o.0);
                for (_, outcome, reads) in outcomes {
                    result.adjacency_reads += reads;
                    match outcome {
                        BfsOutcome::Completed(island) => {
                            accept(island, &mut result, &mut classified, &mut record)
                        }
                        BfsOutcome::AbortedOverlap => record.aborted_overlap += 1,
                        BfsOutcome::AbortedSize => record.aborted_size += 1,
                    }
                }
            }
        }

        if threshold == 1 {
            // every remaining node has no neighbors at all
            for u in 0..n {
                if !classified[u] {
                    debug_assert_eq!(graph.degree(u), 0);
                    claims.try_claim(u, next_search);
                    next_search += 1;
                    let island = Island {
                        round,
                        nodes: vec![u],
                        hubs: Vec::new(),
                        bitmap: BitMatrix::new(1, 1),
                    };
                    accept(island, &mut result, &mut classified, &mut record);
                }
            }
        }

        #[cfg(debug_assertions)]
        check_claims(&claims, &classified, &is_hub)?;

        debug!(
            "round {round}: threshold {threshold}, {} hubs, {} islands, {} overlap / {} size aborts",
            record.num_hubs, record.num_islands, record.aborted_overlap, record.aborted_size
        );
        if remaining > 0 {
            let (next, forced) = cfg.decay.apply(threshold);
            if forced {
                warn!("decay rule stalled at threshold {threshold}; forcing {next}");
            }
            record.forced_decay = forced;
            threshold = next;
        }
        result.rounds.push(record);
    }
    Ok(result)
}

/// After a round barrier every claim must belong to a completed island.
#[cfg(debug_assertions)]
fn check_claims(claims: &ClaimTable, classified: &[bool], is_hub: &[bool]) -> Result<()> {
    for u in 0..classified.len() {
        let island_node = classified[u] && !is_hub[u];
        if claims.owner(u).is_some() != island_node {
            return Err(Error::Contract(format!(
                "node {u}: claim state disagrees with classification after round barrier"
            )));
        }
    }
    Ok(())
}
