//! Multi-layer GCN inference on top of the locator and consumer, plus a
//! dense reference implementation.

use ndarray::{Array2, ArrayView2, Zip};
use rand::distributions::Uniform;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::baseline::{island_trace, region_capacities, Strategy, DEFAULT_BUFFER_WORDS};
use crate::consumer::{
    aggregate_all, Aggregation, ConsumerConfig, HubXwCache, IslandAggregator, LedgerExport,
    OpLedger,
};
use crate::error::{Error, Result};
use crate::graph::CsrGraph;
use crate::locator::{islandize, islandize_streaming, IslandizationResult, LocatorConfig};
use crate::memory::{MemoryModel, MemoryReport};

/// Largest graph `reference_forward` will densify.
pub const DENSE_NODE_LIMIT: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Relu,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    None,
    #[default]
    Sym,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerSpec {
    /// `in_dim × out_dim`.
    pub weight: Array2<f64>,
    pub activation: Activation,
    pub normalize: Normalization,
}

impl LayerSpec {
    pub fn in_dim(&self) -> usize {
        self.weight.nrows()
    }

    pub fn out_dim(&self) -> usize {
        self.weight.ncols()
    }
}

/// Uniform features in [-1, 1].
pub fn synthetic_features(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = Uniform::new_inclusive(-1.0, 1.0);
    Array2::from_shape_simple_fn((rows, cols), || rng.sample(dist))
}

/// Glorot-uniform weights.
pub fn glorot_weights(in_dim: usize, out_dim: usize, seed: u64) -> Array2<f64> {
    let limit = (6.0 / (in_dim + out_dim).max(1) as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = Uniform::new_inclusive(-limit, limit);
    Array2::from_shape_simple_fn((in_dim, out_dim), || rng.sample(dist))
}

/// Seeded layer stack for `dims = [d0, d1, ..]`: relu between layers, none
/// after the last.
pub fn seeded_layers(
    dims: &[usize],
    normalize: Normalization,
    seed: u64,
) -> Result<Vec<LayerSpec>> {
    if dims.len() < 2 || dims.contains(&0) {
        return Err(Error::Argument(format!(
            "layer dims need at least two positive entries, got {dims:?}"
        )));
    }
    let last = dims.len() - 2;
    Ok(dims
        .windows(2)
        .enumerate()
        .map(|(l, d)| LayerSpec {
            weight: glorot_weights(d[0], d[1], seed.wrapping_add(l as u64 + 1)),
            activation: if l == last {
                Activation::None
            } else {
                Activation::Relu
            },
            normalize,
        })
        .collect())
}

/// `(degree + 1)^(-1/2)` per node.
pub fn sym_scale(graph: &CsrGraph) -> Vec<f64> {
    graph
        .degrees()
        .iter()
        .map(|&d| 1.0 / ((d + 1) as f64).sqrt())
        .collect()
}

fn activate(m: &mut Array2<f64>, act: Activation) {
    if act == Activation::Relu {
        m.mapv_inplace(|v| v.max(0.0));
    }
}

fn check_layer(graph: &CsrGraph, x: ArrayView2<f64>, spec: &LayerSpec) -> Result<()> {
    if x.nrows() != graph.num_nodes() {
        return Err(Error::Shape(format!(
            "{} feature rows for {} nodes",
            x.nrows(),
            graph.num_nodes()
        )));
    }
    if x.ncols() != spec.in_dim() {
        return Err(Error::Shape(format!(
            "feature width {} but layer expects {}",
            x.ncols(),
            spec.in_dim()
        )));
    }
    Ok(())
}

fn check_islands(graph: &CsrGraph, islands: &IslandizationResult) -> Result<()> {
    if islands.num_nodes != graph.num_nodes() {
        return Err(Error::Contract(format!(
            "islandization covers {} nodes, graph has {}",
            islands.num_nodes,
            graph.num_nodes()
        )));
    }
    Ok(())
}

/// Post-processing shared by batch and streaming paths: self term,
/// post-scale, activation, and a check that every adjacency entry was used.
fn finish_layer(
    graph: &CsrGraph,
    spec: &LayerSpec,
    scale: Option<&[f64]>,
    agg: Aggregation,
) -> Result<(Array2<f64>, OpLedger)> {
    if agg.ledger.baseline_adds != graph.nnz() as u64 {
        return Err(Error::Contract(format!(
            "aggregation consumed {} adjacency entries, graph has {}",
            agg.ledger.baseline_adds,
            graph.nnz()
        )));
    }
    let mut out = agg.rows;
    if let Some(s) = scale {
        Zip::from(out.rows_mut())
            .and(agg.combined.rows())
            .and(s)
            .for_each(|mut row, own, &su| {
                row += &own;
                row *= su;
            });
    }
    activate(&mut out, spec.activation);
    Ok((out, agg.ledger))
}

/// One layer `σ(Â · X · W)` through the island consumer, combination first.
/// With `Sym`, rows of XW are pre-scaled, aggregated over the binary
/// adjacency, given their own (self-loop) term and post-scaled.
pub fn layer_forward(
    graph: &CsrGraph,
    islands: &IslandizationResult,
    x: ArrayView2<f64>,
    spec: &LayerSpec,
    cfg: &ConsumerConfig,
) -> Result<(Array2<f64>, OpLedger)> {
    check_layer(graph, x, spec)?;
    check_islands(graph, islands)?;
    let scale = (spec.normalize == Normalization::Sym).then(|| sym_scale(graph));
    let source = HubXwCache::new(
        x.view(),
        spec.weight.view(),
        scale.as_deref(),
        &islands.hubs,
    )?;
    let agg = aggregate_all(islands, &source, cfg)?;
    finish_layer(graph, spec, scale.as_deref(), agg)
}

/// Dense evaluation of the layer stack.
pub fn reference_forward(
    graph: &CsrGraph,
    x: ArrayView2<f64>,
    specs: &[LayerSpec],
) -> Result<Array2<f64>> {
    let n = graph.num_nodes();
    if n > DENSE_NODE_LIMIT {
        return Err(Error::Capacity(format!(
            "{n} nodes exceed the dense reference limit of {DENSE_NODE_LIMIT}"
        )));
    }
    let mut h = x.to_owned();
    for spec in specs {
        check_layer(graph, h.view(), spec)?;
        let mut a = Array2::<f64>::zeros((n, n));
        for u in 0..n {
            for &v in graph.neighbors(u) {
                a[[u, v]] = 1.0;
            }
        }
        if spec.normalize == Normalization::Sym {
            let s = sym_scale(graph);
            for u in 0..n {
                a[[u, u]] = 1.0;
            }
            for ((u, v), e) in a.indexed_iter_mut() {
                *e *= s[u] * s[v];
            }
        }
        h = a.dot(&h.dot(&spec.weight));
        activate(&mut h, spec.activation);
    }
    Ok(h)
}

/// `max |a - b| / max |reference|`, or the plain difference when the
/// reference is all zero.
pub fn relative_error(a: ArrayView2<f64>, reference: ArrayView2<f64>) -> f64 {
    let diff = Zip::from(&a)
        .and(&reference)
        .fold(0.0f64, |m, &p, &q| m.max((p - q).abs()));
    let scale = reference.fold(0.0f64, |m, &v| m.max(v.abs()));
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InferenceOptions {
    /// Feed first-layer islands to the consumer as the locator completes them.
    pub streaming: bool,
    /// Off-chip counting for each layer's island trace; 0 disables it.
    pub buffer_words: u64,
}

impl Default for InferenceOptions {
    fn default() -> Self {
        Self {
            streaming: false,
            buffer_words: DEFAULT_BUFFER_WORDS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerReport {
    pub in_dim: usize,
    pub out_dim: usize,
    pub ledger: LedgerExport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub memory: Option<MemoryReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocatorSummary {
    pub num_hubs: usize,
    pub num_islands: usize,
    pub num_island_nodes: usize,
    pub num_inter_hub_edges: usize,
    pub num_rounds: usize,
    pub adjacency_reads: u64,
}

impl LocatorSummary {
    pub fn of(result: &IslandizationResult) -> Self {
        Self {
            num_hubs: result.hubs.len(),
            num_islands: result.islands.len(),
            num_island_nodes: result.num_island_nodes(),
            num_inter_hub_edges: result.inter_hub_edges.len(),
            num_rounds: result.rounds.len(),
            adjacency_reads: result.adjacency_reads,
        }
    }
}

/// Operation and traffic totals of one inference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub locator: LocatorSummary,
    pub layers: Vec<LayerReport>,
    pub total: LedgerExport,
    /// Scalar aggregation ops over scalar aggregation ops plus MACs, with reuse.
    pub aggregation_share: f64,
    /// The same share without reuse (every adjacency entry one vector add).
    pub baseline_aggregation_share: f64,
}

#[derive(Debug, Clone)]
pub struct Inference {
    pub output: Array2<f64>,
    pub islands: IslandizationResult,
    pub report: CostReport,
}

fn layer_memory(
    graph: &CsrGraph,
    islands: &IslandizationResult,
    width: usize,
    c_max: usize,
    buffer_words: u64,
    include_locator: bool,
) -> Result<MemoryReport> {
    let mut mem = MemoryModel::new(&region_capacities(
        Strategy::Island,
        buffer_words,
        width,
        c_max,
    ));
    if include_locator {
        island_trace(graph, islands, width, &mut mem)?;
    } else {
        let mut quiet = islands.clone();
        quiet.adjacency_reads = 0;
        island_trace(graph, &quiet, width, &mut mem)?;
    }
    Ok(mem.report(Strategy::Island.name()))
}

fn first_layer_streaming(
    graph: &CsrGraph,
    x: ArrayView2<f64>,
    spec: &LayerSpec,
    locator_cfg: &LocatorConfig,
    consumer_cfg: &ConsumerConfig,
) -> Result<(IslandizationResult, Array2<f64>, OpLedger)> {
    check_layer(graph, x, spec)?;
    let scale = (spec.normalize == Normalization::Sym).then(|| sym_scale(graph));
    let source = HubXwCache::new(x.view(), spec.weight.view(), scale.as_deref(), &[])?;
    let mut agg = IslandAggregator::new(graph.num_nodes(), &[], &source, *consumer_cfg)?;
    let mut failure = None;
    let islands = islandize_streaming(graph, locator_cfg, |island| {
        if failure.is_some() {
            return;
        }
        let step = source.mark_hubs(&island.hubs).and_then(|_| {
            agg.add_hubs(&island.hubs);
            agg.process(island)
        });
        if let Err(e) = step {
            failure = Some(e);
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    source.mark_hubs(&islands.hubs)?;
    agg.add_hubs(&islands.hubs);
    let aggregation = agg.finish(&islands.hubs, &islands.inter_hub_edges)?;
    let (out, ledger) = finish_layer(graph, spec, scale.as_deref(), aggregation)?;
    Ok((islands, out, ledger))
}

/// Islandizes once and runs every layer over the same decomposition.
pub fn run_inference(
    graph: &CsrGraph,
    x: ArrayView2<f64>,
    specs: &[LayerSpec],
    locator_cfg: &LocatorConfig,
    consumer_cfg: &ConsumerConfig,
    opts: &InferenceOptions,
) -> Result<Inference> {
    consumer_cfg.validate()?;
    if specs.is_empty() {
        return Err(Error::Argument("no layers".into()));
    }
    let mut ledgers = Vec::with_capacity(specs.len());
    let (islands, mut h) = if opts.streaming {
        let (islands, out, ledger) =
            first_layer_streaming(graph, x, &specs[0], locator_cfg, consumer_cfg)?;
        ledgers.push(ledger);
        (islands, out)
    } else {
        let islands = islandize(graph, locator_cfg)?;
        let (out, ledger) = layer_forward(graph, &islands, x, &specs[0], consumer_cfg)?;
        ledgers.push(ledger);
        (islands, out)
    };
    for spec in &specs[1..] {
        let (out, ledger) = layer_forward(graph, &islands, h.view(), spec, consumer_cfg)?;
        ledgers.push(ledger);
        h = out;
    }

    let mut layers = Vec::with_capacity(specs.len());
    let mut total = OpLedger::default();
    let (mut agg_scalar, mut base_scalar, mut macs) = (0u128, 0u128, 0u128);
    for (l, (spec, ledger)) in specs.iter().zip(&ledgers).enumerate() {
        total.merge(ledger);
        let w = spec.out_dim() as u128;
        agg_scalar += ledger.aggregation_ops() as u128 * w;
        base_scalar += ledger.baseline_adds as u128 * w;
        macs += ledger.combination_macs as u128;
        let memory = if opts.buffer_words > 0 {
            Some(layer_memory(
                graph,
                &islands,
                spec.out_dim(),
                locator_cfg.c_max,
                opts.buffer_words,
                l == 0,
            )?)
        } else {
            None
        };
        layers.push(LayerReport {
            in_dim: spec.in_dim(),
            out_dim: spec.out_dim(),
            ledger: ledger.export(),
            memory,
        });
    }
    let share = |ops: u128| {
        if ops + macs == 0 {
            0.0
        } else {
            ops as f64 / (ops + macs) as f64
        }
    };
    let report = CostReport {
        locator: LocatorSummary::of(&islands),
        layers,
        total: total.export(),
        aggregation_share: share(agg_scalar),
        baseline_aggregation_share: share(base_scalar),
    };
    Ok(Inference {
        output: h,
        islands,
        report,
    })
}
