use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Threshold decay `TH <- max(ceil(TH * numerator / denominator), 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Decay {
    pub numerator: u32,
    pub denominator: u32,
}

impl Decay {
    pub const HALVE: Decay = Decay {
        numerator: 1,
        denominator: 2,
    };

    /// Returns the next threshold and whether a decrement had to be forced
    /// because the rule alone would not lower it.
    pub fn apply(self, threshold: usize) -> (usize, bool) {
        if threshold <= 1 {
            return (1, false);
        }
        let scaled = (threshold as u128 * self.numerator as u128).div_ceil(self.denominator as u128)
            as usize;
        let next = scaled.max(1);
        if next >= threshold {
            (threshold - 1, true)
        } else {
            (next, false)
        }
    }
}

impl Default for Decay {
    fn default() -> Self {
        Decay::HALVE
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LocatorMode {
    /// Single worker; the golden reference.
    #[default]
    Sequential,
    /// Hub detection over `p1` lanes and TP-BFS over `p2` workers sharing one
    /// claim table. Task dispatch order is shuffled with `seed`.
    Parallel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LocatorConfig {
    /// Initial hub degree threshold; `ceil(max_degree / 2)` when unset.
    pub th_init: Option<usize>,
    pub decay: Decay,
    /// Largest island, in nodes.
    pub c_max: usize,
    pub p1: usize,
    pub p2: usize,
    pub mode: LocatorMode,
    pub seed: u64,
}

pub const DEFAULT_C_MAX: usize = 64;

impl Default for LocatorConfig {
    fn default() -> Self {
        Self {
            th_init: None,
            decay: Decay::HALVE,
            c_max: DEFAULT_C_MAX,
            p1: 1,
            p2: 1,
            mode: LocatorMode::Sequential,
            seed: 0,
        }
    }
}

impl LocatorConfig {
    pub fn parallel(workers: usize, seed: u64) -> Self {
        Self {
            p1: workers,
            p2: workers,
            mode: LocatorMode::Parallel,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.th_init == Some(0) {
            return Err(Error::Argument("th_init must be at least 1".into()));
        }
        if self.c_max == 0 {
            return Err(Error::Argument("c_max must be at least 1".into()));
        }
        if self.p1 == 0 || self.p2 == 0 {
            return Err(Error::Argument("p1 and p2 must be at least 1".into()));
        }
        let Decay {
            numerator,
            denominator,
        } = self.decay;
        if numerator == 0 || numerator >= denominator {
            return Err(Error::Argument(format!(
                "decay factor {numerator}/{denominator} must lie strictly between 0 and 1"
            )));
        }
        Ok(())
    }

    pub fn initial_threshold(&self, max_degree: usize) -> usize {
        self.th_init.unwrap_or(max_degree.div_ceil(2)).max(1)
    }
}
