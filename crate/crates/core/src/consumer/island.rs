use ndarray::{Array2, ArrayView2, ArrayViewMut1};
use serde::{Deserialize, Serialize};

use super::accumulator::HubAccumulator;
use super::combine::CombinedSource;
use super::ledger::OpLedger;
use super::window::{column_groups, plan_island, IslandPlan, WindowChoice, WindowPolicy};
use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::locator::Island;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConsumerConfig {
    pub k: usize,
    pub window_policy: WindowPolicy,
    pub num_workers: usize,
    /// Charge formation for groups no window subtracts from.
    pub charge_unused_groups: bool,
}

impl Default for ConsumerConfig {
    fn default() -> Self {
        Self {
            k: 2,
            window_policy: WindowPolicy::MinCost,
            num_workers: 1,
            charge_unused_groups: true,
        }
    }
}

impl ConsumerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::Argument(format!(
                "k must be at least 2, got {}",
                self.k
            )));
        }
        if self.num_workers == 0 {
            return Err(Error::Argument("num_workers must be at least 1".into()));
        }
        Ok(())
    }
}

/// Sums of consecutive groups of `k` rows, last group possibly short.
/// Formation is charged for every group.
pub fn pre_aggregate(columns: ArrayView2<f64>, k: usize, ledger: &mut OpLedger) -> Array2<f64> {
    pre_aggregate_masked(columns, k, None, ledger)
}

/// As [`pre_aggregate`], but with `used` given only flagged groups are formed
/// and charged; the rest are left zero.
pub fn pre_aggregate_masked(
    columns: ArrayView2<f64>,
    k: usize,
    used: Option<&[bool]>,
    ledger: &mut OpLedger,
) -> Array2<f64> {
    let groups = column_groups(columns.nrows(), k);
    let mut sums = Array2::zeros((groups.len(), columns.ncols()));
    for (g, cols) in groups.iter().enumerate() {
        if used.is_some_and(|u| !u[g]) {
            continue;
        }
        let mut row = sums.row_mut(g);
        for c in cols.clone() {
            row += &columns.row(c);
        }
        ledger.preagg_formation_adds += (cols.len() - 1) as u64;
    }
    sums
}

fn apply_row(
    plan: &IslandPlan,
    row_idx: usize,
    columns: ArrayView2<f64>,
    sums: ArrayView2<f64>,
    island: &Island,
    dest: &mut ArrayViewMut1<f64>,
    ledger: &mut OpLedger,
) {
    let row = &plan.rows[row_idx];
    for w in &row.windows {
        let cols = plan.groups[w.group].clone();
        ledger.baseline_adds += w.nnz as u64;
        match w.choice {
            WindowChoice::Skip => {}
            WindowChoice::Add => {
                for c in cols {
                    if island.local_edge(row.dest, c) {
                        *dest += &columns.row(c);
                    }
                }
                ledger.actual_adds += w.nnz as u64;
            }
            WindowChoice::Subtract => {
                *dest += &sums.row(w.group);
                for c in cols.clone() {
                    if !island.local_edge(row.dest, c) {
                        *dest -= &columns.row(c);
                    }
                }
                ledger.actual_adds += 1;
                ledger.actual_subs += (cols.len() - w.nnz) as u64;
            }
        }
    }
}

/// Aggregates one island. `columns` holds XW rows in local order (hubs then
/// nodes) and `sums` the matching group sums. Hub destinations accumulate
/// into `hub_acc`; the returned rows belong to the island nodes in order.
pub fn aggregate_island(
    island: &Island,
    columns: ArrayView2<f64>,
    sums: ArrayView2<f64>,
    cfg: &ConsumerConfig,
    hub_acc: &mut HubAccumulator,
    ledger: &mut OpLedger,
) -> Result<Array2<f64>> {
    let plan = plan_island(island, cfg.k, cfg.window_policy);
    aggregate_planned(island, &plan, columns, sums, hub_acc, ledger)
}

fn aggregate_planned(
    island: &Island,
    plan: &IslandPlan,
    columns: ArrayView2<f64>,
    sums: ArrayView2<f64>,
    hub_acc: &mut HubAccumulator,
    ledger: &mut OpLedger,
) -> Result<Array2<f64>> {
    let m = island.num_local();
    if island.bitmap.rows() != m || island.bitmap.cols() != island.nodes.len() {
        return Err(Error::Shape(format!(
            "bitmap {}x{} for {} hubs and {} nodes",
            island.bitmap.rows(),
            island.bitmap.cols(),
            island.hubs.len(),
            island.nodes.len()
        )));
    }
    if columns.nrows() != m || sums.nrows() != plan.groups.len() {
        return Err(Error::Shape(format!(
            "{} column rows and {} group sums for {m} local nodes",
            columns.nrows(),
            sums.nrows()
        )));
    }
    if columns.ncols() != hub_acc.width() || sums.ncols() != hub_acc.width() {
        return Err(Error::Shape(
            "row width differs from accumulator width".into(),
        ));
    }
    let h = island.hubs.len();
    for (r, &hub) in island.hubs.iter().enumerate() {
        let nnz = plan.rows[r].windows.iter().map(|w| w.nnz).sum::<usize>();
        let mut dest = hub_acc.row_mut(hub, nnz as u64)?;
        apply_row(plan, r, columns, sums, island, &mut dest, ledger);
    }
    let mut out = Array2::zeros((island.nodes.len(), columns.ncols()));
    for i in 0..island.nodes.len() {
        let mut dest = out.row_mut(i);
        apply_row(plan, h + i, columns, sums, island, &mut dest, ledger);
    }
    Ok(out)
}

/// Push-style exchange across hub-hub edges, without reuse.
pub fn aggregate_inter_hub<S: CombinedSource + ?Sized>(
    edges: &[(NodeId, NodeId)],
    source: &S,
    hub_acc: &mut HubAccumulator,
    ledger: &mut OpLedger,
) -> Result<()> {
    for &(a, b) in edges {
        if !hub_acc.contains(a) || !hub_acc.contains(b) {
            return Err(Error::Contract(format!(
                "inter-hub edge ({a}, {b}) has a non-hub end"
            )));
        }
        let rows = source.gather(&[a, b], ledger);
        hub_acc.row_mut(a, 1)?.scaled_add(1.0, &rows.row(1));
        hub_acc.row_mut(b, 1)?.scaled_add(1.0, &rows.row(0));
        ledger.baseline_adds += 2;
        ledger.actual_adds += 2;
    }
    Ok(())
}

/// Gathers columns, forms group sums and aggregates one island. Returns the
/// island-node output rows and the gathered columns (hubs then nodes).
pub fn consume_island<S: CombinedSource + ?Sized>(
    island: &Island,
    source: &S,
    cfg: &ConsumerConfig,
    hub_acc: &mut HubAccumulator,
    ledger: &mut OpLedger,
) -> Result<(Array2<f64>, Array2<f64>)> {
    let local: Vec<NodeId> = island.local_nodes().collect();
    let columns = source.gather(&local, ledger);
    let plan = plan_island(island, cfg.k, cfg.window_policy);
    let sums = if cfg.charge_unused_groups {
        pre_aggregate(columns.view(), cfg.k, ledger)
    } else {
        let used = plan.used_groups();
        pre_aggregate_masked(columns.view(), cfg.k, Some(&used), ledger)
    };
    let rows = aggregate_planned(island, &plan, columns.view(), sums.view(), hub_acc, ledger)?;
    Ok((rows, columns))
}
