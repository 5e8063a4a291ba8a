//! Sectored L2 cache whose ways can be partly repurposed as a tag cache
//! (CTC) for DRAM-cache row metadata.
//!
//! Each CTC line is one 32 B quarter of an L2 way and holds eight 4 B
//! sectors, one per DRAM row, so a line covers eight consecutive rows.

mod plru;

pub use plru::TreePlru;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::timing::Op;

pub const MAX_CTC_L2_WAYS: u32 = 4;
pub const CTC_WAYS_PER_L2_WAY: u32 = 4;
pub const ROWS_PER_CTC_LINE: u64 = 8;
pub const CTC_TAG_BITS: u32 = 22;
/// Per-line SRAM overhead: sector valid bits, sector dirty bits, tag.
pub const CTC_LINE_OVERHEAD_BITS: u32 = 8 + 8 + CTC_TAG_BITS;
pub const CTC_PLRU_BITS_PER_SET: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct L2Config {
    pub total_ways: u32,
    /// Set from the top-level `ctc_l2_ways` key.
    #[serde(skip)]
    pub ctc_l2_ways: u32,
    pub line_bytes: u32,
    pub sector_bytes: u32,
    /// Sets per memory channel.
    pub sets: u32,
    /// Cycles from request to L2 response.
    pub hit_latency: u64,
}

impl Default for L2Config {
    fn default() -> Self {
        Self { total_ways: 16, ctc_l2_ways: 4, line_bytes: 128, sector_bytes: 32, sets: 64, hit_latency: 120 }
    }
}

impl L2Config {
    pub fn validate(&self) -> Result<()> {
        if self.ctc_l2_ways > MAX_CTC_L2_WAYS {
            return Err(Error::config("ctc_l2_ways", format!("{} exceeds the maximum of 4", self.ctc_l2_ways)));
        }
        if self.ctc_l2_ways >= self.total_ways {
            return Err(Error::config("ctc_l2_ways", "must leave at least one data way"));
        }
        if self.line_bytes != 128 || self.sector_bytes != 32 {
            return Err(Error::config("l2.line_bytes", "only 128 B lines with 32 B sectors are modeled"));
        }
        if self.sets == 0 || !self.sets.is_power_of_two() {
            return Err(Error::config("l2.sets", "must be a non-zero power of two"));
        }
        if self.total_ways == 0 || self.total_ways > 64 {
            return Err(Error::config("l2.total_ways", "must be within 1..=64"));
        }
        Ok(())
    }

    pub fn data_ways(&self) -> u32 {
        self.total_ways - self.ctc_l2_ways
    }

    pub fn ctc_ways(&self) -> u32 {
        CTC_WAYS_PER_L2_WAY * self.ctc_l2_ways
    }

    pub fn sectors_per_line(&self) -> u32 {
        self.line_bytes / self.sector_bytes
    }

    /// CTC SRAM overhead per set in bits.
    pub fn ctc_overhead_bits_per_set(&self) -> u32 {
        if self.ctc_l2_ways == 0 {
            0
        } else {
            self.ctc_ways() * CTC_LINE_OVERHEAD_BITS + CTC_PLRU_BITS_PER_SET
        }
    }

    /// Rows whose metadata the CTC can hold at once.
    pub fn ctc_row_capacity(&self) -> u64 {
        self.sets as u64 * self.ctc_ways() as u64 * ROWS_PER_CTC_LINE
    }

    /// Same config with a different CTC partition.
    pub fn set_partition(&self, ctc_l2_ways: u32) -> Result<Self> {
        let c = Self { ctc_l2_ways, ..*self };
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct L2Line {
    tag: u64,
    valid: u8,
    dirty: u8,
    stamp: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum L2Result {
    Hit,
    /// Read to an invalid sector; the sector must be fetched from memory.
    ReadMiss,
    /// Write to an invalid sector, allocated without a fetch.
    WriteAllocate,
}

/// Dirty sectors of an evicted L2 line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct L2Eviction {
    pub line: u64,
    pub dirty: u8,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HitCounter {
    pub hits: u64,
    pub misses: u64,
}

impl HitCounter {
    pub fn record(&mut self, hit: bool) {
        if hit {
            self.hits += 1;
        } else {
            self.misses += 1;
        }
    }

    pub fn accesses(&self) -> u64 {
        self.hits + self.misses
    }

    pub fn rate(&self) -> f64 {
        if self.accesses() == 0 {
            0.0
        } else {
            self.hits as f64 / self.accesses() as f64
        }
    }
}

/// Data partition of one channel's L2, indexed by channel-local line id.
#[derive(Debug, Clone)]
pub struct L2Cache {
    sets: u32,
    ways: usize,
    lines: Vec<L2Line>,
    clock: u64,
    pub stats: HitCounter,
}

impl L2Cache {
    pub fn new(config: &L2Config) -> Self {
        let ways = config.data_ways() as usize;
        Self {
            sets: config.sets,
            ways,
            lines: vec![L2Line::default(); config.sets as usize * ways],
            clock: 0,
            stats: HitCounter::default(),
        }
    }

    fn slot(&self, line: u64) -> (usize, u64) {
        let set = (line % self.sets as u64) as usize;
        (set * self.ways, line / self.sets as u64)
    }

    fn line_of(&self, idx: usize) -> u64 {
        let set = (idx / self.ways) as u64;
        self.lines[idx].tag * self.sets as u64 + set
    }

    /// Whether `sector` of `line` is held in the L2.
    pub fn probe(&self, line: u64, sector: u8) -> bool {
        let (base, tag) = self.slot(line);
        self.lines[base..base + self.ways].iter().any(|l| l.valid != 0 && l.tag == tag && l.valid >> sector & 1 == 1)
    }

    /// Access one 32 B sector. A missing line is allocated over the LRU way;
    /// the victim's dirty sectors are returned for writeback.
    pub fn l2_access(&mut self, line: u64, sector: u8, op: Op) -> (L2Result, Option<L2Eviction>) {
        self.clock += 1;
        let (base, tag) = self.slot(line);
        let bit = 1u8 << sector;
        let ways = base..base + self.ways;
        let found = ways.clone().find(|&i| self.lines[i].valid != 0 && self.lines[i].tag == tag);
        let mut eviction = None;
        let idx = match found {
            Some(i) => i,
            None => {
                let victim = ways
                    .clone()
                    .find(|&i| self.lines[i].valid == 0)
                    .unwrap_or_else(|| ways.min_by_key(|&i| self.lines[i].stamp).expect("at least one way"));
                let old = self.lines[victim];
                if old.valid != 0 && old.dirty != 0 {
                    eviction = Some(L2Eviction { line: self.line_of(victim), dirty: old.dirty });
                }
                self.lines[victim] = L2Line { tag, valid: 0, dirty: 0, stamp: 0 };
                victim
            }
        };
        let l = &mut self.lines[idx];
        l.stamp = self.clock;
        let hit = l.valid & bit != 0;
        self.stats.record(hit);
        let result = match (hit, op) {
            (true, _) => L2Result::Hit,
            (false, Op::Read) => L2Result::ReadMiss,
            (false, Op::Write) => L2Result::WriteAllocate,
        };
        match op {
            Op::Read => {
                // the fetched sector becomes valid once the line is allocated
                l.valid |= bit;
            }
            Op::Write => {
                l.valid |= bit;
                l.dirty |= bit;
            }
        }
        (result, eviction)
    }

    /// Dirty sectors still held, one entry per line.
    pub fn dirty_lines(&self) -> Vec<L2Eviction> {
        (0..self.lines.len())
            .filter(|&i| self.lines[i].valid != 0 && self.lines[i].dirty != 0)
            .map(|i| L2Eviction { line: self.line_of(i), dirty: self.lines[i].dirty })
            .collect()
    }
}

/// One CTC line: 8 rows' worth of 4 B tag metadata.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CtcLine {
    pub tag: u32,
    pub sector_valid: u8,
    pub sector_dirty: u8,
    pub sectors: [u32; 8],
}

/// Metadata sector that must be written back to the row's AMIL column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CtcWriteback {
    pub row: u64,
    pub word: u32,
}

/// Tag cache of one channel. Rows are channel-local DRAM row ids.
#[derive(Debug, Clone)]
pub struct Ctc {
    sets: u32,
    ways: usize,
    lines: Vec<Option<CtcLine>>,
    plru: Vec<TreePlru>,
    pub stats: HitCounter,
}

impl Ctc {
    pub fn new(config: &L2Config) -> Self {
        let ways = config.ctc_ways() as usize;
        Self {
            sets: config.sets,
            ways,
            lines: vec![None; config.sets as usize * ways],
            plru: if ways == 0 { Vec::new() } else { vec![TreePlru::new(ways); config.sets as usize] },
            stats: HitCounter::default(),
        }
    }

    pub fn enabled(&self) -> bool {
        self.ways > 0
    }

    pub fn ways(&self) -> usize {
        self.ways
    }

    fn index(&self, row: u64) -> (usize, u32, usize) {
        let group = row / ROWS_PER_CTC_LINE;
        let set = (group % self.sets as u64) as usize;
        let tag = (group / self.sets as u64) as u32;
        debug_assert!(tag < 1 << CTC_TAG_BITS);
        (set, tag, (row % ROWS_PER_CTC_LINE) as usize)
    }

    fn find(&self, set: usize, tag: u32) -> Option<usize> {
        (0..self.ways).find(|&w| self.lines[set * self.ways + w].is_some_and(|l| l.tag == tag))
    }

    fn row_of(&self, set: usize, tag: u32, sector: usize) -> u64 {
        (tag as u64 * self.sets as u64 + set as u64) * ROWS_PER_CTC_LINE + sector as u64
    }

    /// Peek without touching replacement state or statistics.
    pub fn peek(&self, row: u64) -> Option<u32> {
        if !self.enabled() {
            return None;
        }
        let (set, tag, sector) = self.index(row);
        let w = self.find(set, tag)?;
        let l = self.lines[set * self.ways + w].as_ref()?;
        (l.sector_valid >> sector & 1 == 1).then_some(l.sectors[sector])
    }

    /// Row metadata word on a hit. A disabled CTC misses every lookup.
    pub fn ctc_lookup(&mut self, row: u64) -> Option<u32> {
        let word = self.peek(row);
        self.stats.record(word.is_some());
        if word.is_some() {
            let (set, tag, _) = self.index(row);
            let w = self.find(set, tag).expect("hit line present");
            self.plru[set].touch(w);
        }
        word
    }

    /// Install a row's metadata after a probe. Returns writebacks for the
    /// dirty sectors of a displaced line.
    pub fn ctc_fill(&mut self, row: u64, word: u32) -> Vec<CtcWriteback> {
        if !self.enabled() {
            return Vec::new();
        }
        let (set, tag, sector) = self.index(row);
        let mut out = Vec::new();
        let w = match self.find(set, tag) {
            Some(w) => w,
            None => {
                let w = (0..self.ways)
                    .find(|&w| self.lines[set * self.ways + w].is_none())
                    .unwrap_or_else(|| self.plru[set].victim());
                if let Some(old) = self.lines[set * self.ways + w] {
                    out = self.dirty_sectors(set, &old);
                }
                self.lines[set * self.ways + w] = Some(CtcLine { tag, ..Default::default() });
                w
            }
        };
        let l = self.lines[set * self.ways + w].as_mut().expect("allocated");
        l.sector_valid |= 1 << sector;
        l.sector_dirty &= !(1 << sector);
        l.sectors[sector] = word;
        self.plru[set].touch(w);
        out
    }

    /// Record a metadata mutation. Returns false when the row is not cached,
    /// in which case the caller writes the metadata column itself.
    pub fn ctc_update(&mut self, row: u64, word: u32) -> bool {
        if self.peek(row).is_none() {
            return false;
        }
        let (set, tag, sector) = self.index(row);
        let w = self.find(set, tag).expect("line present");
        let l = self.lines[set * self.ways + w].as_mut().expect("line present");
        l.sectors[sector] = word;
        l.sector_dirty |= 1 << sector;
        true
    }

    /// Refresh a cached row's word after its DRAM copy was written directly;
    /// the sector's dirty bit is left as is.
    pub fn ctc_sync(&mut self, row: u64, word: u32) {
        if self.peek(row).is_none() {
            return;
        }
        let (set, tag, sector) = self.index(row);
        let w = self.find(set, tag).expect("line present");
        self.lines[set * self.ways + w].as_mut().expect("line present").sectors[sector] = word;
    }

    /// Evict the line covering `row`, returning one writeback per dirty sector.
    pub fn ctc_evict(&mut self, row: u64) -> Vec<CtcWriteback> {
        if !self.enabled() {
            return Vec::new();
        }
        let (set, tag, _) = self.index(row);
        match self.find(set, tag) {
            Some(w) => {
                let old = self.lines[set * self.ways + w].take().expect("line present");
                self.dirty_sectors(set, &old)
            }
            None => Vec::new(),
        }
    }

    fn dirty_sectors(&self, set: usize, line: &CtcLine) -> Vec<CtcWriteback> {
        (0..8)
            .filter(|s| line.sector_dirty >> s & 1 == 1)
            .map(|s| CtcWriteback { row: self.row_of(set, line.tag, s), word: line.sectors[s] })
            .collect()
    }

    /// Write back and invalidate everything.
    pub fn flush(&mut self) -> Vec<CtcWriteback> {
        let mut out = Vec::new();
        for i in 0..self.lines.len() {
            if let Some(l) = self.lines[i].take() {
                out.extend(self.dirty_sectors(i / self.ways, &l));
            }
        }
        out
    }

    pub fn resident_line(&self, row: u64) -> Option<CtcLine> {
        if !self.enabled() {
            return None;
        }
        let (set, tag, _) = self.index(row);
        self.find(set, tag).and_then(|w| self.lines[set * self.ways + w])
    }
}

/// One channel's L2 with its CTC partition.
#[derive(Debug, Clone)]
pub struct L2Partition {
    pub config: L2Config,
    pub data: L2Cache,
    pub ctc: Ctc,
}

impl L2Partition {
    pub fn new(config: L2Config) -> Result<Self> {
        config.validate()?;
        Ok(Self { config, data: L2Cache::new(&config), ctc: Ctc::new(&config) })
    }

    /// Repartition at a kernel boundary. Dirty CTC sectors are returned for
    /// writeback and the CTC restarts empty; dirty L2 data is returned too
    /// since the data partition is rebuilt.
    pub fn set_partition(&mut self, ctc_l2_ways: u32) -> Result<(Vec<CtcWriteback>, Vec<L2Eviction>)> {
        let config = self.config.set_partition(ctc_l2_ways)?;
        let meta = self.ctc.flush();
        let data = self.data.dirty_lines();
        let (l2_stats, ctc_stats) = (self.data.stats, self.ctc.stats);
        self.config = config;
        self.data = L2Cache::new(&config);
        self.ctc = Ctc::new(&config);
        self.data.stats = l2_stats;
        self.ctc.stats = ctc_stats;
        Ok((meta, data))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(ctc: u32) -> L2Config {
        L2Config { ctc_l2_ways: ctc, ..Default::default() }
    }

    #[test]
    fn sector_granularity() {
        let mut l2 = L2Cache::new(&cfg(4));
        assert_eq!(l2.l2_access(10, 0, Op::Read).0, L2Result::ReadMiss);
        assert_eq!(l2.l2_access(10, 0, Op::Read).0, L2Result::Hit);
        assert_eq!(l2.l2_access(10, 1, Op::Read).0, L2Result::ReadMiss);
        assert!(l2.probe(10, 1));
        assert!(!l2.probe(10, 2));
        assert_eq!(l2.l2_access(10, 3, Op::Write).0, L2Result::WriteAllocate);
        assert_eq!(l2.stats, HitCounter { hits: 1, misses: 3 });
    }

    #[test]
    fn data_associativity_shrinks_with_ctc() {
        assert_eq!(cfg(4).data_ways(), 12);
        assert_eq!(cfg(4).ctc_ways(), 16);
        assert_eq!(cfg(0).data_ways(), 16);
        let mut l2 = L2Cache::new(&cfg(4));
        let sets = cfg(4).sets as u64;
        for k in 0..12 {
            l2.l2_access(k * sets, 0, Op::Read);
        }
        for k in 0..12 {
            assert!(l2.probe(k * sets, 0));
        }
        l2.l2_access(12 * sets, 0, Op::Read);
        assert!(!l2.probe(0, 0), "LRU way replaced");
    }

    #[test]
    fn dirty_eviction_reports_sectors() {
        let c = L2Config { total_ways: 2, ctc_l2_ways: 0, sets: 1, ..Default::default() };
        let mut l2 = L2Cache::new(&c);
        l2.l2_access(0, 1, Op::Write);
        l2.l2_access(0, 3, Op::Write);
        l2.l2_access(1, 0, Op::Read);
        let (_, ev) = l2.l2_access(2, 0, Op::Read);
        assert_eq!(ev, Some(L2Eviction { line: 0, dirty: 0b1010 }));
        let (_, ev) = l2.l2_access(3, 0, Op::Read);
        assert_eq!(ev, None);
    }

    #[test]
    fn rows_share_ctc_lines_in_groups_of_eight() {
        let mut ctc = Ctc::new(&cfg(1));
        ctc.ctc_fill(0, 0xAA);
        let line = ctc.resident_line(0).unwrap();
        assert_eq!(ctc.resident_line(7), Some(line));
        assert_eq!(ctc.resident_line(8), None);
        assert_eq!(ctc.ctc_lookup(0), Some(0xAA));
        // covering line present but row 7's sector not yet valid
        assert_eq!(ctc.ctc_lookup(7), None);
    }

    #[test]
    fn fill_then_hit() {
        let mut ctc = Ctc::new(&cfg(2));
        assert_eq!(ctc.ctc_lookup(5), None);
        ctc.ctc_fill(5, 0x1234_5678);
        assert_eq!(ctc.ctc_lookup(5), Some(0x1234_5678));
        assert_eq!(ctc.stats, HitCounter { hits: 1, misses: 1 });
    }

    #[test]
    fn disabled_ctc_always_misses() {
        let mut ctc = Ctc::new(&cfg(0));
        assert!(ctc.ctc_fill(5, 1).is_empty());
        assert_eq!(ctc.ctc_lookup(5), None);
        assert!(!ctc.ctc_update(5, 2));
    }

    #[test]
    fn eviction_writes_back_dirty_sectors_only() {
        let mut ctc = Ctc::new(&cfg(1));
        for r in 0..8 {
            ctc.ctc_fill(r, r as u32);
        }
        assert!(ctc.ctc_update(2, 0x22));
        assert!(ctc.ctc_update(6, 0x66));
        let wb = ctc.ctc_evict(0);
        assert_eq!(wb, vec![CtcWriteback { row: 2, word: 0x22 }, CtcWriteback { row: 6, word: 0x66 }]);
        ctc.ctc_fill(8, 0);
        assert!(ctc.ctc_evict(8).is_empty());
    }

    #[test]
    fn capacity_replacement_uses_plru() {
        let c = L2Config { sets: 1, ctc_l2_ways: 1, ..Default::default() };
        let mut ctc = Ctc::new(&c);
        for g in 0..4 {
            ctc.ctc_fill(g * 8, g as u32);
        }
        ctc.ctc_update(8, 0xBEEF);
        ctc.ctc_lookup(0);
        // ways touched in order 0,1,2,3 then 0 again: victim is way 2
        let wb = ctc.ctc_fill(4 * 8, 4);
        assert!(wb.is_empty());
        assert_eq!(ctc.peek(16), None);
        assert_eq!(ctc.peek(8), Some(0xBEEF));
        // next victim is way 1 holding the dirty row 8
        let wb = ctc.ctc_fill(5 * 8, 5);
        assert_eq!(wb, vec![CtcWriteback { row: 8, word: 0xBEEF }]);
    }

    #[test]
    fn partition_limits_and_overhead() {
        let c = L2Config::default();
        assert_eq!(c.set_partition(4).unwrap().ctc_ways(), 16);
        assert_eq!(c.set_partition(0).unwrap().data_ways(), 16);
        assert!(c.set_partition(5).is_err());
        assert_eq!(c.ctc_overhead_bits_per_set(), 612);
        assert_eq!(CTC_LINE_OVERHEAD_BITS, 38);
        assert_eq!(c.set_partition(1).unwrap().ctc_overhead_bits_per_set(), 4 * 38 + 4);
        assert_eq!(c.set_partition(0).unwrap().ctc_overhead_bits_per_set(), 0);
    }

    #[test]
    fn repartition_flushes_dirty_metadata() {
        let mut p = L2Partition::new(cfg(2)).unwrap();
        p.ctc.ctc_fill(3, 1);
        p.ctc.ctc_update(3, 9);
        p.data.l2_access(7, 0, Op::Write);
        let (meta, data) = p.set_partition(1).unwrap();
        assert_eq!(meta, vec![CtcWriteback { row: 3, word: 9 }]);
        assert_eq!(data, vec![L2Eviction { line: 7, dirty: 1 }]);
        assert_eq!(p.ctc.ways(), 4);
        assert_eq!(p.ctc.peek(3), None);
        assert!(p.set_partition(5).is_err());
    }
}
