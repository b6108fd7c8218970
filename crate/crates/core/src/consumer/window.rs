//! Scan-window planning: per destination row and per column group, pick
//! between adding the connected rows and subtracting the unconnected rows
//! from the group's pre-aggregated sum.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::locator::Island;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowPolicy {
    /// Cheaper of the two paths, ties to add.
    #[default]
    MinCost,
    /// Add iff fewer than half the window's columns are connected.
    PaperThreshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowChoice {
    Skip,
    Add,
    Subtract,
}

/// Cost of one window with `nnz` set bits over a group of `size` columns.
pub fn window_cost(nnz: usize, size: usize, policy: WindowPolicy) -> (WindowChoice, usize) {
    debug_assert!(nnz <= size);
    if nnz == 0 {
        return (WindowChoice::Skip, 0);
    }
    let add = nnz;
    let sub = 1 + size - nnz;
    let use_add = match policy {
        WindowPolicy::MinCost => add <= sub,
        WindowPolicy::PaperThreshold => 2 * nnz < size,
    };
    if use_add {
        (WindowChoice::Add, add)
    } else {
        (WindowChoice::Subtract, sub)
    }
}

/// Column ranges of fixed width `k` over `m` columns, the last possibly short.
pub fn column_groups(m: usize, k: usize) -> Vec<Range<usize>> {
    (0..m.div_ceil(k))
        .map(|g| g * k..((g + 1) * k).min(m))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowStep {
    pub group: usize,
    pub nnz: usize,
    pub choice: WindowChoice,
    pub cost: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowPlan {
    /// Local index of the destination (hubs first, then island nodes).
    pub dest: usize,
    /// Non-empty windows only.
    pub windows: Vec<WindowStep>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IslandPlan {
    pub groups: Vec<Range<usize>>,
    pub rows: Vec<RowPlan>,
}

impl IslandPlan {
    /// Which groups at least one subtract window reads.
    pub fn used_groups(&self) -> Vec<bool> {
        let mut used = vec![false; self.groups.len()];
        for row in &self.rows {
            for w in &row.windows {
                if w.choice == WindowChoice::Subtract {
                    used[w.group] = true;
                }
            }
        }
        used
    }

    pub fn baseline(&self) -> usize {
        self.rows
            .iter()
            .flat_map(|r| &r.windows)
            .map(|w| w.nnz)
            .sum()
    }
}

/// Plans every destination row of an island. Hub destinations only see
/// island-node columns; hub-hub pairs belong to the inter-hub pass.
pub fn plan_island(island: &Island, k: usize, policy: WindowPolicy) -> IslandPlan {
    let m = island.num_local();
    let groups = column_groups(m, k);
    let rows = (0..m)
        .map(|dest| {
            let windows = groups
                .iter()
                .enumerate()
                .filter_map(|(g, cols)| {
                    let nnz = cols.clone().filter(|&c| island.local_edge(dest, c)).count();
                    let (choice, cost) = window_cost(nnz, cols.len(), policy);
                    (nnz > 0).then_some(WindowStep {
                        group: g,
                        nnz,
                        choice,
                        cost,
                    })
                })
                .collect();
            RowPlan { dest, windows }
        })
        .collect();
    IslandPlan { groups, rows }
}
