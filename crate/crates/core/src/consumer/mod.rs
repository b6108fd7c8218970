//! Island-wise aggregation with shared-neighbor reuse, hub partial results
//! and inter-hub exchange.

mod accumulator;
mod combine;
mod exec;
mod island;
mod ledger;
mod window;

pub use accumulator::{finalize_hubs, HubAccumulator};
pub use combine::{combine_rows, CombinedSource, HubXwCache, Precombined};
pub use exec::{aggregate_all, Aggregation, IslandAggregator};
pub use island::{
    aggregate_inter_hub, aggregate_island, consume_island, pre_aggregate, pre_aggregate_masked,
    ConsumerConfig,
};
pub use ledger::{LedgerExport, OpLedger};
pub use window::{
    column_groups, plan_island, window_cost, IslandPlan, RowPlan, WindowChoice, WindowPolicy,
    WindowStep,
};
