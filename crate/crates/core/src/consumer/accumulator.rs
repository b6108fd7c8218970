use std::collections::BTreeMap;

use ndarray::{Array1, Array2, ArrayViewMut1};

use crate::error::{Error, Result};
use crate::graph::NodeId;

/// Partial aggregation results of hub rows, keyed by hub id.
#[derive(Debug, Clone, PartialEq)]
pub struct HubAccumulator {
    width: usize,
    rows: BTreeMap<NodeId, (Array1<f64>, u64)>,
}

impl HubAccumulator {
    /// Zero rows for every hub in `hubs`. Other ids are rejected later.
    pub fn new(hubs: &[NodeId], width: usize) -> Self {
        Self {
            width,
            rows: hubs
                .iter()
                .map(|&h| (h, (Array1::zeros(width), 0)))
                .collect(),
        }
    }

    /// Adds zero rows for hubs not yet present.
    pub fn register(&mut self, hubs: &[NodeId]) {
        for &h in hubs {
            self.rows
                .entry(h)
                .or_insert_with(|| (Array1::zeros(self.width), 0));
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn contains(&self, hub: NodeId) -> bool {
        self.rows.contains_key(&hub)
    }

    /// Row of `hub` for in-place accumulation, crediting `contributions`.
    pub fn row_mut(&mut self, hub: NodeId, contributions: u64) -> Result<ArrayViewMut1<'_, f64>> {
        match self.rows.get_mut(&hub) {
            Some((row, count)) => {
                *count += contributions;
                Ok(row.view_mut())
            }
            None => Err(Error::Contract(format!("{hub} is not a registered hub"))),
        }
    }

    pub fn row(&self, hub: NodeId) -> Option<(&Array1<f64>, u64)> {
        self.rows.get(&hub).map(|(r, c)| (r, *c))
    }

    /// Adds another shard into this one. Hubs present only in `other` are adopted.
    pub fn merge(&mut self, other: HubAccumulator) -> Result<()> {
        if other.width != self.width {
            return Err(Error::Shape(format!(
                "merging width {} into width {}",
                other.width, self.width
            )));
        }
        for (h, (row, count)) in other.rows {
            match self.rows.get_mut(&h) {
                Some((mine, c)) => {
                    *mine += &row;
                    *c += count;
                }
                None => {
                    self.rows.insert(h, (row, count));
                }
            }
        }
        Ok(())
    }
}

/// Final hub rows in the order of `hubs`; hubs that received nothing are zero.
pub fn finalize_hubs(acc: &HubAccumulator, hubs: &[NodeId]) -> Array2<f64> {
    let mut out = Array2::zeros((hubs.len(), acc.width));
    for (i, h) in hubs.iter().enumerate() {
        if let Some((row, _)) = acc.row(*h) {
            out.row_mut(i).assign(row);
        }
    }
    out
}
