//! Hub/island restructuring of sparse graphs and island-wise GCN inference.

pub mod baseline;
pub mod consumer;
pub mod engine;
pub mod error;
pub mod graph;
pub mod locator;
pub mod memory;

pub use error::{Error, Result};
