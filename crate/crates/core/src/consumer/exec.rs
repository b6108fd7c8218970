use ndarray::Array2;
use rayon::prelude::*;

use super::accumulator::{finalize_hubs, HubAccumulator};
use super::combine::CombinedSource;
use super::island::{aggregate_inter_hub, consume_island, ConsumerConfig};
use super::ledger::OpLedger;
use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::locator::{Island, IslandizationResult};

/// Binary-adjacency aggregation `A · XW` of a full graph, with its ledger.
#[derive(Debug, Clone)]
pub struct Aggregation {
    pub rows: Array2<f64>,
    /// The XW rows the consumer was served, one per node.
    pub combined: Array2<f64>,
    pub ledger: OpLedger,
}

/// Sequential consumer fed one island at a time, in any order.
pub struct IslandAggregator<'a, S: CombinedSource + ?Sized> {
    source: &'a S,
    cfg: ConsumerConfig,
    acc: HubAccumulator,
    ledger: OpLedger,
    out: Array2<f64>,
    combined: Array2<f64>,
}

impl<'a, S: CombinedSource + ?Sized> IslandAggregator<'a, S> {
    /// `hubs` must list every hub any island or inter-hub edge will reference.
    pub fn new(
        num_nodes: usize,
        hubs: &[NodeId],
        source: &'a S,
        cfg: ConsumerConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            source,
            cfg,
            acc: HubAccumulator::new(hubs, source.width()),
            ledger: OpLedger::default(),
            out: Array2::zeros((num_nodes, source.width())),
            combined: Array2::zeros((num_nodes, source.width())),
        })
    }

    /// Registers hubs discovered after construction (streaming use).
    pub fn add_hubs(&mut self, hubs: &[NodeId]) {
        self.acc.register(hubs);
    }

    pub fn process(&mut self, island: &Island) -> Result<()> {
        let (rows, columns) = consume_island(
            island,
            self.source,
            &self.cfg,
            &mut self.acc,
            &mut self.ledger,
        )?;
        scatter_nodes(&mut self.combined, island, columns)?;
        scatter(&mut self.out, &island.nodes, rows)
    }

    pub fn finish(self, hubs: &[NodeId], inter_hub: &[(NodeId, NodeId)]) -> Result<Aggregation> {
        complete(
            self.source,
            hubs,
            inter_hub,
            self.acc,
            self.ledger,
            self.out,
            self.combined,
        )
    }
}

fn complete<S: CombinedSource + ?Sized>(
    source: &S,
    hubs: &[NodeId],
    inter_hub: &[(NodeId, NodeId)],
    mut acc: HubAccumulator,
    mut ledger: OpLedger,
    mut out: Array2<f64>,
    mut combined: Array2<f64>,
) -> Result<Aggregation> {
    aggregate_inter_hub(inter_hub, source, &mut acc, &mut ledger)?;
    scatter(&mut out, hubs, finalize_hubs(&acc, hubs))?;
    scatter(&mut combined, hubs, source.gather(hubs, &mut ledger))?;
    ledger.combination_macs += source.shared_macs();
    Ok(Aggregation {
        rows: out,
        combined,
        ledger,
    })
}

/// Scatters the island-node part of gathered columns.
fn scatter_nodes(combined: &mut Array2<f64>, island: &Island, columns: Array2<f64>) -> Result<()> {
    let h = island.hubs.len();
    scatter(
        combined,
        &island.nodes,
        columns.slice_move(ndarray::s![h.., ..]),
    )
}

fn scatter(out: &mut Array2<f64>, nodes: &[NodeId], rows: Array2<f64>) -> Result<()> {
    for (&u, row) in nodes.iter().zip(rows.rows()) {
        if u >= out.nrows() {
            return Err(Error::Contract(format!(
                "node {u} outside {} rows",
                out.nrows()
            )));
        }
        out.row_mut(u).assign(&row);
    }
    Ok(())
}

/// Aggregates every island and inter-hub edge of `result`. With more than one
/// worker, islands are spread over a thread pool with per-worker hub shards
/// reduced at the end.
pub fn aggregate_all<S: CombinedSource + ?Sized>(
    result: &IslandizationResult,
    source: &S,
    cfg: &ConsumerConfig,
) -> Result<Aggregation> {
    cfg.validate()?;
    if cfg.num_workers == 1 {
        let mut agg = IslandAggregator::new(result.num_nodes, &result.hubs, source, *cfg)?;
        for island in &result.islands {
            agg.process(island)?;
        }
        return agg.finish(&result.hubs, &result.inter_hub_edges);
    }

    let width = source.width();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.num_workers)
        .build()
        .map_err(|e| Error::Argument(format!("thread pool: {e}")))?;
    type Shard = (
        HubAccumulator,
        OpLedger,
        Vec<(usize, Array2<f64>, Array2<f64>)>,
    );
    let empty = || -> Shard {
        (
            HubAccumulator::new(&result.hubs, width),
            OpLedger::default(),
            Vec::new(),
        )
    };
    let (acc, ledger, parts) = pool.install(|| {
        result
            .islands
            .par_iter()
            .enumerate()
            .try_fold(empty, |(mut acc, mut ledger, mut parts), (idx, island)| {
                let (rows, columns) = consume_island(island, source, cfg, &mut acc, &mut ledger)?;
                parts.push((idx, rows, columns));
                Ok::<_, Error>((acc, ledger, parts))
            })
            .try_reduce(empty, |(mut a, mut la, mut pa), (b, lb, pb)| {
                a.merge(b)?;
                la.merge(&lb);
                pa.extend(pb);
                Ok((a, la, pa))
            })
    })?;

    let mut out = Array2::zeros((result.num_nodes, width));
    let mut combined = Array2::zeros((result.num_nodes, width));
    for (idx, rows, columns) in parts {
        let island = &result.islands[idx];
        scatter(&mut out, &island.nodes, rows)?;
        scatter_nodes(&mut combined, island, columns)?;
    }
    complete(
        source,
        &result.hubs,
        &result.inter_hub_edges,
        acc,
        ledger,
        out,
        combined,
    )
}
