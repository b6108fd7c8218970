//! PULL/PUSH reference loop orders and the island order, each computing
//! `A · XW` while emitting its off-chip access trace.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::consumer::{aggregate_all, Aggregation, ConsumerConfig, Precombined};
use crate::error::{Error, Result};
use crate::graph::CsrGraph;
use crate::locator::IslandizationResult;
use crate::memory::{AccessEvent, AccessKind, Matrix, MemoryModel, MemoryReport, TraceSink};

/// Default total buffer, in words.
pub const DEFAULT_BUFFER_WORDS: u64 = 1 << 20;

/// Region 0 of every layout: uncached streaming traffic.
pub const REGION_STREAM: usize = 0;
pub const REGION_FEATURES: usize = 1;
pub const REGION_RESULTS: usize = 2;
pub const REGION_HUB_XW: usize = 1;
pub const REGION_HUB_PARTIAL: usize = 2;
pub const REGION_WORKING: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    #[serde(rename = "pull-row")]
    PullRowWise,
    #[serde(rename = "pull-inner")]
    PullInnerProduct,
    #[serde(rename = "push-col")]
    PushColumnWise,
    #[serde(rename = "push-outer")]
    PushOuterProduct,
    Island,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::PullRowWise,
        Strategy::PullInnerProduct,
        Strategy::PushColumnWise,
        Strategy::PushOuterProduct,
        Strategy::Island,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::PullRowWise => "pull-row",
            Strategy::PullInnerProduct => "pull-inner",
            Strategy::PushColumnWise => "push-col",
            Strategy::PushOuterProduct => "push-outer",
            Strategy::Island => "island",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::Argument(format!("unknown strategy {s:?}")))
    }
}

/// Region capacities for `strategy` out of `total` words.
///
/// PULL/PUSH split the buffer evenly between features and results. The
/// island order only needs one island's rows in its working region
/// (`c_max` nodes, XW and Xo, at most a quarter of the buffer); the rest
/// is shared evenly by the hub XW cache and the hub partial results.
pub fn region_capacities(strategy: Strategy, total: u64, width: usize, c_max: usize) -> Vec<u64> {
    match strategy {
        Strategy::Island => {
            let working = (2 * c_max as u64 * width as u64).min(total / 4);
            let hubs = total - working;
            vec![0, hubs / 2, hubs - hubs / 2, working]
        }
        _ => vec![0, total / 2, total - total / 2],
    }
}

fn emit(
    sink: &mut dyn TraceSink,
    region: usize,
    matrix: Matrix,
    row: usize,
    words: usize,
    kind: AccessKind,
) -> Result<()> {
    if words == 0 {
        return Ok(());
    }
    sink.access(AccessEvent {
        region,
        matrix,
        row: row as u64,
        words: words as u64,
        kind,
    })
}

fn check(graph: &CsrGraph, combined: ArrayView2<f64>) -> Result<()> {
    if combined.nrows() != graph.num_nodes() {
        return Err(Error::Shape(format!(
            "{} combined rows for {} nodes",
            combined.nrows(),
            graph.num_nodes()
        )));
    }
    Ok(())
}

/// Runs one PULL/PUSH variant over the unrestructured graph.
/// `Strategy::Island` needs an islandization; use [`run_island`].
pub fn run_baseline(
    graph: &CsrGraph,
    combined: ArrayView2<f64>,
    strategy: Strategy,
    sink: &mut dyn TraceSink,
) -> Result<Array2<f64>> {
    check(graph, combined)?;
    let n = graph.num_nodes();
    let f = combined.ncols();
    let mut out = Array2::zeros((n, f));
    match strategy {
        Strategy::PullRowWise => {
            for u in 0..n {
                emit(
                    sink,
                    REGION_STREAM,
                    Matrix::A,
                    u,
                    graph.degree(u),
                    AccessKind::Read,
                )?;
                let mut dest = out.row_mut(u);
                for &v in graph.neighbors(u) {
                    emit(sink, REGION_FEATURES, Matrix::XW, v, f, AccessKind::Read)?;
                    dest += &combined.row(v);
                }
                emit(sink, REGION_RESULTS, Matrix::Xo, u, f, AccessKind::Write)?;
            }
        }
        Strategy::PullInnerProduct => {
            for c in 0..f {
                for u in 0..n {
                    emit(
                        sink,
                        REGION_STREAM,
                        Matrix::A,
                        u,
                        graph.degree(u),
                        AccessKind::Read,
                    )?;
                    let mut acc = 0.0;
                    for &v in graph.neighbors(u) {
                        emit(
                            sink,
                            REGION_FEATURES,
                            Matrix::XW,
                            v * f + c,
                            1,
                            AccessKind::Read,
                        )?;
                        acc += combined[[v, c]];
                    }
                    out[[u, c]] = acc;
                    emit(
                        sink,
                        REGION_RESULTS,
                        Matrix::Xo,
                        u * f + c,
                        1,
                        AccessKind::Write,
                    )?;
                }
            }
        }
        Strategy::PushColumnWise => {
            for c in 0..f {
                for v in 0..n {
                    if graph.degree(v) == 0 {
                        continue;
                    }
                    emit(
                        sink,
                        REGION_FEATURES,
                        Matrix::XW,
                        v * f + c,
                        1,
                        AccessKind::Read,
                    )?;
                    emit(
                        sink,
                        REGION_STREAM,
                        Matrix::A,
                        v,
                        graph.degree(v),
                        AccessKind::Read,
                    )?;
                    let x = combined[[v, c]];
                    for &u in graph.neighbors(v) {
                        out[[u, c]] += x;
                        emit(
                            sink,
                            REGION_RESULTS,
                            Matrix::Xo,
                            u * f + c,
                            1,
                            AccessKind::Update,
                        )?;
                    }
                }
            }
        }
        Strategy::PushOuterProduct => {
            for v in 0..n {
                if graph.degree(v) == 0 {
                    continue;
                }
                emit(sink, REGION_FEATURES, Matrix::XW, v, f, AccessKind::Read)?;
                emit(
                    sink,
                    REGION_STREAM,
                    Matrix::A,
                    v,
                    graph.degree(v),
                    AccessKind::Read,
                )?;
                for &u in graph.neighbors(v) {
                    let mut dest = out.row_mut(u);
                    dest += &combined.row(v);
                    emit(sink, REGION_RESULTS, Matrix::Xo, u, f, AccessKind::Update)?;
                }
            }
        }
        Strategy::Island => {
            return Err(Error::Argument(
                "the island strategy needs an islandization result".into(),
            ))
        }
    }
    Ok(out)
}

/// Emits the island-order trace: locator adjacency reads as one A stream,
/// then per island its node rows through the working region, its hub rows
/// through the hub regions, then inter-hub edges grouped by source hub.
pub fn island_trace(
    graph: &CsrGraph,
    result: &IslandizationResult,
    width: usize,
    sink: &mut dyn TraceSink,
) -> Result<()> {
    if result.num_nodes != graph.num_nodes() {
        return Err(Error::Contract(format!(
            "islandization of {} nodes applied to a graph of {}",
            result.num_nodes,
            graph.num_nodes()
        )));
    }
    if result.adjacency_reads > 0 {
        sink.access(AccessEvent {
            region: REGION_STREAM,
            matrix: Matrix::A,
            row: 0,
            words: result.adjacency_reads,
            kind: AccessKind::Read,
        })?;
    }
    for island in &result.islands {
        for &h in &island.hubs {
            emit(sink, REGION_HUB_XW, Matrix::XW, h, width, AccessKind::Read)?;
        }
        for &u in &island.nodes {
            emit(sink, REGION_WORKING, Matrix::XW, u, width, AccessKind::Read)?;
        }
        for &h in &island.hubs {
            emit(
                sink,
                REGION_HUB_PARTIAL,
                Matrix::Xo,
                h,
                width,
                AccessKind::Update,
            )?;
        }
        for &u in &island.nodes {
            emit(
                sink,
                REGION_WORKING,
                Matrix::Xo,
                u,
                width,
                AccessKind::Write,
            )?;
        }
    }
    let mut pairs: Vec<(usize, usize)> = result
        .inter_hub_edges
        .iter()
        .flat_map(|&(a, b)| [(a, b), (b, a)])
        .collect();
    pairs.sort_unstable();
    let mut last = None;
    for (src, dst) in pairs {
        if last != Some(src) {
            emit(
                sink,
                REGION_HUB_XW,
                Matrix::XW,
                src,
                width,
                AccessKind::Read,
            )?;
            last = Some(src);
        }
        emit(
            sink,
            REGION_HUB_PARTIAL,
            Matrix::Xo,
            dst,
            width,
            AccessKind::Update,
        )?;
    }
    Ok(())
}

/// Island-order execution: consumer arithmetic plus its trace.
pub fn run_island(
    graph: &CsrGraph,
    result: &IslandizationResult,
    combined: ArrayView2<f64>,
    cfg: &ConsumerConfig,
    sink: &mut dyn TraceSink,
) -> Result<Aggregation> {
    check(graph, combined)?;
    island_trace(graph, result, combined.ncols(), sink)?;
    aggregate_all(result, &Precombined(combined), cfg)
}

/// Runs `strategy` against a fresh memory model of `total_words` and
/// returns the output with its flushed report.
pub fn run_strategy(
    graph: &CsrGraph,
    combined: ArrayView2<f64>,
    strategy: Strategy,
    islands: Option<(&IslandizationResult, &ConsumerConfig, usize)>,
    total_words: u64,
) -> Result<(Array2<f64>, MemoryReport)> {
    let width = combined.ncols();
    let c_max = islands.map_or(0, |(_, _, c)| c);
    let mut mem = MemoryModel::new(&region_capacities(strategy, total_words, width, c_max));
    let out = match (strategy, islands) {
        (Strategy::Island, Some((result, cfg, _))) => {
            run_island(graph, result, combined, cfg, &mut mem)?.rows
        }
        _ => run_baseline(graph, combined, strategy, &mut mem)?,
    };
    Ok((out, mem.report(strategy.name())))
}
