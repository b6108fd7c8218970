use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::OnceLock;

use ndarray::{Array1, Array2, ArrayView2, Axis};

use super::ledger::OpLedger;
use crate::error::{Error, Result};
use crate::graph::NodeId;

/// Dense `features · weights`, charging `rows × in × out` MACs.
pub fn combine_rows(
    features: ArrayView2<f64>,
    weights: ArrayView2<f64>,
    ledger: &mut OpLedger,
) -> Result<Array2<f64>> {
    check_dims(features.ncols(), weights.nrows())?;
    ledger.combination_macs += (features.nrows() * weights.nrows() * weights.ncols()) as u64;
    Ok(features.dot(&weights))
}

fn check_dims(feature_width: usize, weight_height: usize) -> Result<()> {
    if feature_width != weight_height {
        return Err(Error::Shape(format!(
            "feature width {feature_width} does not match weight height {weight_height}"
        )));
    }
    Ok(())
}

/// Supplier of combined (XW) rows to the consumer.
pub trait CombinedSource: Sync {
    fn width(&self) -> usize;

    /// Rows for `nodes`, in order. Any combination work is charged to `ledger`.
    fn gather(&self, nodes: &[NodeId], ledger: &mut OpLedger) -> Array2<f64>;

    /// Work done into shared state rather than a caller's ledger.
    fn shared_macs(&self) -> u64 {
        0
    }
}

/// Already-combined rows; gathering is free.
pub struct Precombined<'a>(pub ArrayView2<'a, f64>);

impl CombinedSource for Precombined<'_> {
    fn width(&self) -> usize {
        self.0.ncols()
    }

    fn gather(&self, nodes: &[NodeId], _ledger: &mut OpLedger) -> Array2<f64> {
        self.0.select(Axis(0), nodes)
    }
}

/// Combines rows on demand. Hub rows are computed once and cached; every
/// other row is recomputed per request, which for a partition means once.
/// An optional per-node scale multiplies each combined row.
pub struct HubXwCache<'a> {
    features: ArrayView2<'a, f64>,
    weights: ArrayView2<'a, f64>,
    scale: Option<&'a [f64]>,
    is_hub: Vec<AtomicBool>,
    hub_rows: Vec<OnceLock<Array1<f64>>>,
    hub_macs: AtomicU64,
}

impl<'a> HubXwCache<'a> {
    pub fn new(
        features: ArrayView2<'a, f64>,
        weights: ArrayView2<'a, f64>,
        scale: Option<&'a [f64]>,
        hubs: &[NodeId],
    ) -> Result<Self> {
        check_dims(features.ncols(), weights.nrows())?;
        let n = features.nrows();
        if let Some(s) = scale {
            if s.len() != n {
                return Err(Error::Shape(format!("{} scales for {n} rows", s.len())));
            }
        }
        let cache = Self {
            features,
            weights,
            scale,
            is_hub: (0..n).map(|_| AtomicBool::new(false)).collect(),
            hub_rows: (0..n).map(|_| OnceLock::new()).collect(),
            hub_macs: AtomicU64::new(0),
        };
        cache.mark_hubs(hubs)?;
        Ok(cache)
    }

    /// Adds hubs to the cached set, e.g. as a streaming locator finds them.
    pub fn mark_hubs(&self, hubs: &[NodeId]) -> Result<()> {
        let n = self.is_hub.len();
        for &h in hubs {
            if h >= n {
                return Err(Error::Shape(format!("hub {h} outside {n} feature rows")));
            }
            self.is_hub[h].store(true, Ordering::Relaxed);
        }
        Ok(())
    }

    fn macs_per_row(&self) -> u64 {
        (self.weights.nrows() * self.weights.ncols()) as u64
    }

    fn compute(&self, u: NodeId) -> Array1<f64> {
        let mut row = self.features.row(u).dot(&self.weights);
        if let Some(s) = self.scale {
            row *= s[u];
        }
        row
    }

    pub fn cached_hubs(&self) -> usize {
        self.hub_rows.iter().filter(|c| c.get().is_some()).count()
    }
}

impl CombinedSource for HubXwCache<'_> {
    fn width(&self) -> usize {
        self.weights.ncols()
    }

    fn gather(&self, nodes: &[NodeId], ledger: &mut OpLedger) -> Array2<f64> {
        let mut out = Array2::zeros((nodes.len(), self.width()));
        for (i, &u) in nodes.iter().enumerate() {
            if self.is_hub[u].load(Ordering::Relaxed) {
                let row = self.hub_rows[u].get_or_init(|| {
                    self.hub_macs
                        .fetch_add(self.macs_per_row(), Ordering::Relaxed);
                    self.compute(u)
                });
                out.row_mut(i).assign(row);
            } else {
                ledger.combination_macs += self.macs_per_row();
                out.row_mut(i).assign(&self.compute(u));
            }
        }
        out
    }

    /// MACs spent on hub rows, each charged once.
    fn shared_macs(&self) -> u64 {
        self.hub_macs.load(Ordering::Relaxed)
    }
}
