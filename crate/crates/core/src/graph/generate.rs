//! Planted hub/island graphs.
//!
//! Blocks occupy ids `[b * size, (b + 1) * size)`; hubs follow all blocks.
//! Block `b` is always wired to hub `b % num_hubs`, plus `hub_attach - 1`
//! further hubs drawn from the seeded generator. Every member of a block is
//! adjacent to every hub the block is wired to. Hubs form a path (two hubs)
//! or a ring (three or more).

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::csr::{CsrGraph, NodeId};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SbmParams {
    pub num_islands: usize,
    pub island_size: usize,
    pub num_hubs: usize,
    pub p_in: f64,
    pub hub_attach: usize,
    pub seed: u64,
}

/// Ground truth of a generated graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlantedPartition {
    pub blocks: Vec<Vec<NodeId>>,
    pub hubs: Vec<NodeId>,
    /// Hubs each block is wired to, ascending.
    pub block_hubs: Vec<Vec<NodeId>>,
}

#[derive(Debug, Clone)]
pub struct PlantedGraph {
    pub graph: CsrGraph,
    pub planted: PlantedPartition,
}

pub fn generate_sbm(params: &SbmParams) -> Result<PlantedGraph> {
    let SbmParams {
        num_islands,
        island_size,
        num_hubs,
        p_in,
        hub_attach,
        seed,
    } = *params;
    if num_islands == 0 || island_size == 0 {
        return Err(Error::Argument(
            "num_islands and island_size must be positive".into(),
        ));
    }
    if !(0.0..=1.0).contains(&p_in) {
        return Err(Error::Argument(format!(
            "p_in = {p_in} is not a probability"
        )));
    }
    if num_hubs > 0 && (hub_attach == 0 || hub_attach > num_hubs) {
        return Err(Error::Argument(format!(
            "hub_attach must be in 1..={num_hubs}, got {hub_attach}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first_hub = num_islands * island_size;
    let hubs: Vec<NodeId> = (first_hub..first_hub + num_hubs).collect();
    let mut edges = Vec::new();
    let mut blocks = Vec::with_capacity(num_islands);
    let mut block_hubs = Vec::with_capacity(num_islands);

    for b in 0..num_islands {
        let base = b * island_size;
        let block: Vec<NodeId> = (base..base + island_size).collect();
        for i in 0..island_size {
            for j in i + 1..island_size {
                if p_in >= 1.0 || rng.gen_bool(p_in) {
                    edges.push((block[i], block[j]));
                }
            }
        }

        let mut attached = Vec::new();
        if num_hubs > 0 {
            let primary = b % num_hubs;
            attached.push(primary);
            // draw the extra hubs from the others, order-stable for a fixed seed
            let extra = sample(&mut rng, num_hubs - 1, hub_attach - 1);
            for k in extra.iter() {
                attached.push(if k >= primary { k + 1 } else { k });
            }
            attached.sort_unstable();
        }
        let attached: Vec<NodeId> = attached.into_iter().map(|h| hubs[h]).collect();
        for &h in &attached {
            for &u in &block {
                edges.push((u, h));
            }
        }
        blocks.push(block);
        block_hubs.push(attached);
    }

    match num_hubs {
        0 | 1 => {}
        2 => edges.push((hubs[0], hubs[1])),
        _ => {
            for i in 0..num_hubs {
                edges.push((hubs[i], hubs[(i + 1) % num_hubs]));
            }
        }
    }

    let graph = CsrGraph::from_edges(first_hub + num_hubs, edges)?;
    Ok(PlantedGraph {
        graph,
        planted: PlantedPartition {
            blocks,
            hubs,
            block_hubs,
        },
    })
}
