use serde::{Deserialize, Serialize};

/// Vector-operation counters for aggregation plus scalar MACs for combination.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpLedger {
    /// One per directed adjacency entry aggregated.
    pub baseline_adds: u64,
    pub actual_adds: u64,
    pub actual_subs: u64,
    pub preagg_formation_adds: u64,
    pub combination_macs: u64,
}

/// JSON shape of an exported ledger.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LedgerExport {
    pub baseline_adds: u64,
    pub actual_adds: u64,
    pub actual_subs: u64,
    pub preagg_formation_adds: u64,
    pub pruning_rate: f64,
    pub combination_macs: u64,
}

impl OpLedger {
    pub fn merge(&mut self, other: &OpLedger) {
        self.baseline_adds += other.baseline_adds;
        self.actual_adds += other.actual_adds;
        self.actual_subs += other.actual_subs;
        self.preagg_formation_adds += other.preagg_formation_adds;
        self.combination_macs += other.combination_macs;
    }

    /// Aggregation vector ops actually issued, formation included.
    pub fn aggregation_ops(&self) -> u64 {
        self.actual_adds + self.actual_subs + self.preagg_formation_adds
    }

    /// Fraction of baseline aggregation ops removed; 0 when nothing was aggregated.
    pub fn pruning_rate(&self) -> f64 {
        if self.baseline_adds == 0 {
            0.0
        } else {
            1.0 - self.aggregation_ops() as f64 / self.baseline_adds as f64
        }
    }

    pub fn export(&self) -> LedgerExport {
        LedgerExport {
            baseline_adds: self.baseline_adds,
            actual_adds: self.actual_adds,
            actual_subs: self.actual_subs,
            preagg_formation_adds: self.preagg_formation_adds,
            pruning_rate: self.pruning_rate(),
            combination_macs: self.combination_macs,
        }
    }
}
