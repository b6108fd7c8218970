//! Undirected, unweighted graph in compressed sparse row form.

use std::ops::Range;

use crate::error::{Error, Result};

pub type NodeId = usize;

/// Symmetric adjacency in CSR layout.
///
/// Rows are sorted, contain no self-loops and no duplicates, and every edge is
/// stored in both directions. Construct through [`CsrGraph::from_edges`], which
/// normalizes arbitrary edge input into that shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsrGraph {
    row_ptr: Vec<usize>,
    col_idx: Vec<NodeId>,
    degrees: Vec<usize>,
}

impl CsrGraph {
    /// Builds a graph from an arbitrary edge list. Edges are symmetrized,
    /// self-loops are dropped and duplicates collapsed.
    pub fn from_edges<I>(num_nodes: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let mut pairs = Vec::new();
        for (u, v) in edges {
            if u >= num_nodes || v >= num_nodes {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u}, {v}) outside [0, {num_nodes})"
                )));
            }
            if u != v {
                pairs.push((u, v));
                pairs.push((v, u));
            }
        }
        pairs.sort_unstable();
        pairs.dedup();

        let mut row_ptr = vec![0usize; num_nodes + 1];
        for &(u, _) in &pairs {
            row_ptr[u + 1] += 1;
        }
        for i in 0..num_nodes {
            row_ptr[i + 1] += row_ptr[i];
        }
        let col_idx: Vec<NodeId> = pairs.into_iter().map(|(_, v)| v).collect();
        let degrees = row_ptr.windows(2).map(|w| w[1] - w[0]).collect();

        Ok(Self {
            row_ptr,
            col_idx,
            degrees,
        })
    }

    pub fn empty(num_nodes: usize) -> Self {
        Self {
            row_ptr: vec![0; num_nodes + 1],
            col_idx: Vec::new(),
            degrees: vec![0; num_nodes],
        }
    }

    #[inline]
    pub fn num_nodes(&self) -> usize {
        self.degrees.len()
    }

    /// Number of stored (directed) adjacency entries.
    #[inline]
    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    #[inline]
    pub fn num_edges(&self) -> usize {
        self.col_idx.len() / 2
    }

    #[inline]
    pub fn degree(&self, u: NodeId) -> usize {
        self.degrees[u]
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn max_degree(&self) -> usize {
        self.degrees.iter().copied().max().unwrap_or(0)
    }

    #[inline]
    pub fn neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.col_idx[self.row_range(u)]
    }

    #[inline]
    pub fn row_range(&self, u: NodeId) -> Range<usize> {
        self.row_ptr[u]..self.row_ptr[u + 1]
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[NodeId] {
        &self.col_idx
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        u < self.num_nodes() && self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`, in row-major order.
    pub fn undirected_edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        (0..self.num_nodes()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    /// Checks every structural invariant: offsets, sorted rows, id range,
    /// no self-loops, symmetry and the cached degree array.
    pub fn validate(&self) -> Result<()> {
        let n = self.num_nodes();
        if self.row_ptr.len() != n + 1 || self.row_ptr[0] != 0 {
            return Err(Error::InvalidGraph("malformed row_ptr".into()));
        }
        if self.row_ptr[n] != self.col_idx.len() {
            return Err(Error::InvalidGraph("row_ptr does not cover col_idx".into()));
        }
        for u in 0..n {
            if self.row_ptr[u] > self.row_ptr[u + 1] {
                return Err(Error::InvalidGraph(format!("row_ptr decreases at {u}")));
            }
            if self.degrees[u] != self.row_ptr[u + 1] - self.row_ptr[u] {
                return Err(Error::InvalidGraph(format!("stale degree at {u}")));
            }
            let row = self.neighbors(u);
            for (i, &v) in row.iter().enumerate() {
                if v >= n {
                    return Err(Error::InvalidGraph(format!("({u}, {v}) out of range")));
                }
                if v == u {
                    return Err(Error::InvalidGraph(format!("self-loop at {u}")));
                }
                if i > 0 && row[i - 1] >= v {
                    return Err(Error::InvalidGraph(format!(
                        "row {u} not strictly increasing"
                    )));
                }
                if !self.has_edge(v, u) {
                    return Err(Error::InvalidGraph(format!("({u}, {v}) has no mirror")));
                }
            }
        }
        Ok(())
    }
}

/// Ordering of graph nodes: `order[r]` is the node placed at position `r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodePermutation {
    order: Vec<NodeId>,
}

impl NodePermutation {
    pub fn new(order: Vec<NodeId>) -> Result<Self> {
        let mut seen = vec![false; order.len()];
        for &u in &order {
            if u >= order.len() || std::mem::replace(&mut seen[u], true) {
                return Err(Error::Argument(format!(
                    "order is not a permutation of 0..{} (offending id {u})",
                    order.len()
                )));
            }
        }
        Ok(Self { order })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            order: (0..n).collect(),
        }
    }

    pub fn reversed(n: usize) -> Self {
        Self {
            order: (0..n).rev().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn order(&self) -> &[NodeId] {
        &self.order
    }

    /// `positions()[u]` is the position of node `u`.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.order.len()];
        for (r, &u) in self.order.iter().enumerate() {
            pos[u] = r;
        }
        pos
    }
}
