//! Per-channel miss status holding registers keyed by 256 B line address.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::timing::Op;

pub const MSHR_ENTRY_BITS: u32 = 51;
pub const LINE_ADDRESS_BITS: u32 = 37;
pub const DEFAULT_MSHR_ENTRIES: usize = 128;

/// Bit-exact MSHR entry: 37-bit line address, 8-bit column mask, entry
/// valid, read/write, 2-bit affinity level, and the DRAM line's valid and
/// dirty bits as seen in the tag cache.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct MshrEntry {
    pub line_address: u64,
    pub column_mask: u8,
    pub entry_valid: bool,
    pub is_write: bool,
    pub affinity_level: u8,
    pub ctc_valid: bool,
    pub ctc_dirty: bool,
}

const MASK_SHIFT: u32 = 37;
const VALID_SHIFT: u32 = 45;
const WRITE_SHIFT: u32 = 46;
const AFFINITY_SHIFT: u32 = 47;
const CTC_VALID_SHIFT: u32 = 49;
const CTC_DIRTY_SHIFT: u32 = 50;

impl MshrEntry {
    pub fn encode(&self) -> u64 {
        debug_assert!(self.line_address < 1 << LINE_ADDRESS_BITS);
        (self.line_address & ((1 << LINE_ADDRESS_BITS) - 1))
            | (self.column_mask as u64) << MASK_SHIFT
            | (self.entry_valid as u64) << VALID_SHIFT
            | (self.is_write as u64) << WRITE_SHIFT
            | ((self.affinity_level & 3) as u64) << AFFINITY_SHIFT
            | (self.ctc_valid as u64) << CTC_VALID_SHIFT
            | (self.ctc_dirty as u64) << CTC_DIRTY_SHIFT
    }

    pub fn decode(word: u64) -> Result<Self> {
        if word >> MSHR_ENTRY_BITS != 0 {
            return Err(Error::Usage(format!("MSHR word {word:#x} wider than {MSHR_ENTRY_BITS} bits")));
        }
        Ok(Self {
            line_address: word & ((1 << LINE_ADDRESS_BITS) - 1),
            column_mask: (word >> MASK_SHIFT) as u8,
            entry_valid: word >> VALID_SHIFT & 1 == 1,
            is_write: word >> WRITE_SHIFT & 1 == 1,
            affinity_level: (word >> AFFINITY_SHIFT & 3) as u8,
            ctc_valid: word >> CTC_VALID_SHIFT & 1 == 1,
            ctc_dirty: word >> CTC_DIRTY_SHIFT & 1 == 1,
        })
    }

    pub fn columns(&self) -> u32 {
        self.column_mask.count_ones()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MshrOutcome {
    NewMiss,
    Merged,
    /// No free entry; the request must stall.
    Full,
}

#[derive(Debug, Clone)]
pub struct MshrTable {
    capacity: usize,
    entries: HashMap<u64, MshrEntry>,
}

impl Default for MshrTable {
    fn default() -> Self {
        Self::new(DEFAULT_MSHR_ENTRIES)
    }
}

impl MshrTable {
    pub fn new(capacity: usize) -> Self {
        Self { capacity, entries: HashMap::with_capacity(capacity) }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.entries.len() >= self.capacity
    }

    pub fn get(&self, line: u64) -> Option<&MshrEntry> {
        self.entries.get(&line)
    }

    pub fn get_mut(&mut self, line: u64) -> Option<&mut MshrEntry> {
        self.entries.get_mut(&line)
    }

    pub fn insert_or_merge(&mut self, line: u64, sector: u8, op: Op) -> Result<MshrOutcome> {
        if sector >= 8 {
            return Err(Error::Usage(format!("sector {sector} out of range")));
        }
        if line >= 1 << LINE_ADDRESS_BITS {
            return Err(Error::Usage(format!("line address {line:#x} wider than 37 bits")));
        }
        if let Some(e) = self.entries.get_mut(&line) {
            e.column_mask |= 1 << sector;
            e.is_write |= op == Op::Write;
            return Ok(MshrOutcome::Merged);
        }
        if self.is_full() {
            return Ok(MshrOutcome::Full);
        }
        self.entries.insert(
            line,
            MshrEntry {
                line_address: line,
                column_mask: 1 << sector,
                entry_valid: true,
                is_write: op == Op::Write,
                ..Default::default()
            },
        );
        Ok(MshrOutcome::NewMiss)
    }

    pub fn remove(&mut self, line: u64) -> Option<MshrEntry> {
        self.entries.remove(&line)
    }
}
