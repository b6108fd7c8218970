//! Graph representation, ingestion, synthetic generation and spy plots.

mod csr;
mod generate;
mod ingest;
mod spy;

pub use csr::{CsrGraph, NodeId, NodePermutation};
pub use generate::{generate_sbm, PlantedGraph, PlantedPartition, SbmParams};
pub use ingest::{
    load_edge_list, load_edge_list_compacted, read_edge_list, write_edge_list, IdMap, IngestOptions,
};
pub use spy::{
    emit_spy, rasterize, spy_coordinates, write_pgm, write_spy_csv, SpyOutput, DEFAULT_SPY_SIDE,
};
