//! Off-chip traffic counting for access traces under an LRU on-chip buffer.
//!
//! The buffer is split into regions; each event names the region it goes
//! through. A region of capacity zero is a pure stream: every read misses
//! and nothing is cached.

use std::collections::{BTreeMap, HashSet};

use lru::LruCache;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Matrix {
    A,
    XW,
    Xo,
}

impl Matrix {
    pub const ALL: [Matrix; 3] = [Matrix::A, Matrix::XW, Matrix::Xo];

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AccessKind {
    Read,
    /// Overwrites the whole row; no fetch on a miss.
    Write,
    /// Read-modify-write of an accumulator row. A miss fetches the row only
    /// if it had already been written back off-chip; otherwise it starts as zero.
    Update,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessEvent {
    pub region: usize,
    pub matrix: Matrix,
    pub row: u64,
    pub words: u64,
    pub kind: AccessKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lookup {
    Hit,
    Miss,
}

/// Anything that consumes an access trace.
pub trait TraceSink {
    fn access(&mut self, event: AccessEvent) -> Result<()>;
}

impl TraceSink for Vec<AccessEvent> {
    fn access(&mut self, event: AccessEvent) -> Result<()> {
        self.push(event);
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrafficCounters {
    pub reads_words: u64,
    pub writes_words: u64,
    pub read_misses: u64,
    pub hits: u64,
}

impl TrafficCounters {
    fn add(&mut self, other: &TrafficCounters) {
        self.reads_words += other.reads_words;
        self.writes_words += other.writes_words;
        self.read_misses += other.read_misses;
        self.hits += other.hits;
    }
}

type Key = (Matrix, u64);

struct Line {
    words: u64,
    dirty: bool,
}

struct Region {
    capacity: u64,
    used: u64,
    lines: LruCache<Key, Line>,
    counters: [TrafficCounters; 3],
}

pub struct MemoryModel {
    regions: Vec<Region>,
    /// Rows written back that an `Update` must fetch again.
    spilled: HashSet<Key>,
    flushed: bool,
}

impl MemoryModel {
    /// One region per capacity, in words.
    pub fn new(region_capacities: &[u64]) -> Self {
        Self {
            regions: region_capacities
                .iter()
                .map(|&capacity| Region {
                    capacity,
                    used: 0,
                    lines: LruCache::unbounded(),
                    counters: Default::default(),
                })
                .collect(),
            spilled: HashSet::new(),
            flushed: false,
        }
    }

    pub fn capacity_words(&self) -> u64 {
        self.regions.iter().map(|r| r.capacity).sum()
    }

    pub fn num_regions(&self) -> usize {
        self.regions.len()
    }

    /// Applies one event and reports whether the row was resident.
    pub fn lookup(&mut self, ev: AccessEvent) -> Result<Lookup> {
        if ev.words == 0 {
            return Err(Error::Argument(format!(
                "zero-word access to {:?} row {}",
                ev.matrix, ev.row
            )));
        }
        if self.flushed {
            return Err(Error::Contract("access after flush".into()));
        }
        let Some(region) = self.regions.get_mut(ev.region) else {
            return Err(Error::Argument(format!("no region {}", ev.region)));
        };
        let key = (ev.matrix, ev.row);
        let t = ev.matrix.index();

        if let Some(line) = region.lines.get_mut(&key) {
            if line.words != ev.words {
                return Err(Error::Contract(format!(
                    "{:?} row {} accessed as {} and {} words",
                    ev.matrix, ev.row, line.words, ev.words
                )));
            }
            if ev.kind != AccessKind::Read {
                line.dirty = true;
            }
            region.counters[t].hits += 1;
            return Ok(Lookup::Hit);
        }

        let fetch = match ev.kind {
            AccessKind::Read => true,
            AccessKind::Write => false,
            AccessKind::Update => self.spilled.contains(&key),
        };
        if fetch {
            region.counters[t].reads_words += ev.words;
            region.counters[t].read_misses += 1;
        }
        let dirty = ev.kind != AccessKind::Read;

        if ev.words > region.capacity {
            // streaming miss: not cached, dirty data goes straight out
            if dirty {
                region.counters[t].writes_words += ev.words;
                self.spilled.insert(key);
            }
            return Ok(Lookup::Miss);
        }
        while region.used + ev.words > region.capacity {
            let (victim, line) = region.lines.pop_lru().expect("used > 0 implies a line");
            region.used -= line.words;
            if line.dirty {
                region.counters[victim.0.index()].writes_words += line.words;
                self.spilled.insert(victim);
            }
        }
        region.used += ev.words;
        region.lines.push(
            key,
            Line {
                words: ev.words,
                dirty,
            },
        );
        Ok(Lookup::Miss)
    }

    /// Writes back every dirty row. Further accesses are rejected.
    pub fn flush(&mut self) {
        if self.flushed {
            return;
        }
        for region in &mut self.regions {
            while let Some((key, line)) = region.lines.pop_lru() {
                if line.dirty {
                    region.counters[key.0.index()].writes_words += line.words;
                }
            }
            region.used = 0;
        }
        self.flushed = true;
    }

    pub fn region_counters(&self, region: usize, matrix: Matrix) -> TrafficCounters {
        self.regions[region].counters[matrix.index()]
    }

    pub fn counters(&self, matrix: Matrix) -> TrafficCounters {
        let mut c = TrafficCounters::default();
        for r in &self.regions {
            c.add(&r.counters[matrix.index()]);
        }
        c
    }

    /// Flushes and summarizes.
    pub fn report(&mut self, strategy: &str) -> MemoryReport {
        self.flush();
        let breakdown: BTreeMap<Matrix, TrafficCounters> =
            Matrix::ALL.iter().map(|&m| (m, self.counters(m))).collect();
        MemoryReport {
            strategy: strategy.to_string(),
            reads_words: breakdown.values().map(|c| c.reads_words).sum(),
            writes_words: breakdown.values().map(|c| c.writes_words).sum(),
            breakdown,
            buffer_capacity_words: self.capacity_words(),
            regions: self
                .regions
                .iter()
                .map(|r| {
                    let mut c = TrafficCounters::default();
                    r.counters.iter().for_each(|x| c.add(x));
                    RegionReport {
                        capacity_words: r.capacity,
                        traffic: c,
                    }
                })
                .collect(),
        }
    }
}

impl TraceSink for MemoryModel {
    fn access(&mut self, event: AccessEvent) -> Result<()> {
        self.lookup(event).map(|_| ())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionReport {
    pub capacity_words: u64,
    #[serde(flatten)]
    pub traffic: TrafficCounters,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemoryReport {
    pub strategy: String,
    pub reads_words: u64,
    pub writes_words: u64,
    pub breakdown: BTreeMap<Matrix, TrafficCounters>,
    pub buffer_capacity_words: u64,
    pub regions: Vec<RegionReport>,
}
