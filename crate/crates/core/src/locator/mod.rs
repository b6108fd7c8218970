//! Runtime restructuring of a graph into hubs and islands.
//!
//! Each round lowers a degree threshold; unclassified nodes at or above it
//! become hubs, each hub's remaining neighbors seed a bounded BFS, and a BFS
//! that closes before reaching `c_max` nodes without touching another
//! search's territory yields an island. Rounds continue until every node is
//! a hub or an island member.

mod bitmap;
mod config;
mod islandize;
mod search;
mod verify;

pub use bitmap::BitMatrix;
pub use config::{Decay, LocatorConfig, LocatorMode, DEFAULT_C_MAX};
pub use islandize::{
    islandization_permutation, islandize, islandize_streaming, IslandizationResult, NodeClass,
    RoundRecord,
};
pub use search::{
    assign_tasks, detect_hubs, detect_hubs_parallel, tp_bfs, BfsLimits, BfsOutcome, Claim,
    ClaimTable, Island, SearchId, Task,
};
pub use verify::{region_violations, verify_islandization};
