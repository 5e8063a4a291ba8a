//! Device geometry and physical address mapping.
//!
//! Addresses are split (LSB first) into byte-in-column, column-in-line,
//! channel, bank group, bank, line-in-row and row fields. Consecutive 256 B
//! cachelines therefore rotate across channels, then banks, before moving to
//! the next line slot of the same row.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeviceGeometry {
    pub channels: u32,
    pub bank_groups_per_channel: u32,
    pub banks_per_group: u32,
    pub row_bytes: u32,
    pub column_bytes: u32,
    pub rows_per_bank_dram: u32,
    pub rows_per_bank_scm: u32,
    pub cacheline_bytes: u32,
}

impl Default for DeviceGeometry {
    fn default() -> Self {
        Self {
            channels: 8,
            bank_groups_per_channel: 4,
            banks_per_group: 4,
            row_bytes: 2048,
            column_bytes: 32,
            rows_per_bank_dram: 256,
            rows_per_bank_scm: 1024,
            cacheline_bytes: 256,
        }
    }
}

/// Coordinates of a byte inside one rank of the stack.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AddressDecomposition {
    pub channel: u32,
    pub bank_group: u32,
    pub bank: u32,
    pub row: u32,
    /// Column within the row (line-in-row * columns-per-line + column-in-line).
    pub column: u32,
    pub byte_offset: u32,
}

/// Location of an SCM sector in the direct-mapped DRAM cache.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DramCacheIndex {
    /// DRAM cacheline slot (row plus line-in-row, interleaved like addresses).
    pub set: u64,
    pub tag: u8,
    /// Column inside the 256 B line.
    pub sector: u8,
    pub line_in_row: u8,
    pub lines_per_row: u8,
    pub columns_per_line: u8,
}

fn log2(v: u32) -> u32 {
    v.trailing_zeros()
}

impl DeviceGeometry {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("channels", self.channels),
            ("bank_groups_per_channel", self.bank_groups_per_channel),
            ("banks_per_group", self.banks_per_group),
            ("row_bytes", self.row_bytes),
            ("column_bytes", self.column_bytes),
            ("rows_per_bank_dram", self.rows_per_bank_dram),
            ("rows_per_bank_scm", self.rows_per_bank_scm),
            ("cacheline_bytes", self.cacheline_bytes),
        ];
        for (name, v) in fields {
            if v == 0 || !v.is_power_of_two() {
                return Err(Error::Geometry(format!("{name} = {v} is not a power of two")));
            }
        }
        if self.column_bytes > self.cacheline_bytes || self.cacheline_bytes > self.row_bytes {
            return Err(Error::Geometry("require column_bytes <= cacheline_bytes <= row_bytes".into()));
        }
        if self.columns_per_line() > 8 || self.lines_per_row() > 8 {
            return Err(Error::Geometry("at most 8 columns per line and 8 lines per row are supported".into()));
        }
        if self.columns_per_line() < 2 {
            return Err(Error::Geometry("a cacheline needs at least two columns".into()));
        }
        let ratio = self.rows_per_bank_scm / self.rows_per_bank_dram;
        if self.rows_per_bank_scm < self.rows_per_bank_dram || ratio > 4 {
            return Err(Error::Geometry(format!(
                "SCM/DRAM capacity ratio {}/{} must be 1, 2 or 4 (2-bit tag)",
                self.rows_per_bank_scm, self.rows_per_bank_dram
            )));
        }
        if self.channels > 64 {
            return Err(Error::Geometry("at most 64 channels".into()));
        }
        Ok(())
    }

    pub fn banks_per_channel(&self) -> u32 {
        self.bank_groups_per_channel * self.banks_per_group
    }

    pub fn columns_per_row(&self) -> u32 {
        self.row_bytes / self.column_bytes
    }

    pub fn columns_per_line(&self) -> u32 {
        self.cacheline_bytes / self.column_bytes
    }

    pub fn lines_per_row(&self) -> u32 {
        self.row_bytes / self.cacheline_bytes
    }

    pub fn row_bits(&self) -> u64 {
        self.row_bytes as u64 * 8
    }

    pub fn column_bits(&self) -> u64 {
        self.column_bytes as u64 * 8
    }

    fn capacity_for(&self, rows_per_bank: u32) -> u64 {
        self.channels as u64 * self.banks_per_channel() as u64 * rows_per_bank as u64 * self.row_bytes as u64
    }

    pub fn dram_capacity(&self) -> u64 {
        self.capacity_for(self.rows_per_bank_dram)
    }

    pub fn scm_capacity(&self) -> u64 {
        self.capacity_for(self.rows_per_bank_scm)
    }

    pub fn dram_cache_lines(&self) -> u64 {
        self.dram_capacity() / self.cacheline_bytes as u64
    }

    pub fn tag_count(&self) -> u32 {
        self.rows_per_bank_scm / self.rows_per_bank_dram
    }

    /// Decompose a home (SCM) address.
    pub fn decompose_address(&self, addr: u64) -> Result<AddressDecomposition> {
        self.decompose_in(addr, self.rows_per_bank_scm)
    }

    pub fn decompose_dram(&self, addr: u64) -> Result<AddressDecomposition> {
        self.decompose_in(addr, self.rows_per_bank_dram)
    }

    pub fn decompose_in(&self, addr: u64, rows_per_bank: u32) -> Result<AddressDecomposition> {
        let capacity = self.capacity_for(rows_per_bank);
        if addr >= capacity {
            return Err(Error::AddressOutOfRange { addr, capacity });
        }
        let mut a = addr;
        let mut take = |n: u32| -> u32 {
            let v = (a & ((1u64 << log2(n)) - 1)) as u32;
            a >>= log2(n);
            v
        };
        let byte_offset = take(self.column_bytes);
        let col_in_line = take(self.columns_per_line());
        let channel = take(self.channels);
        let bank_group = take(self.bank_groups_per_channel);
        let bank = take(self.banks_per_group);
        let line_in_row = take(self.lines_per_row());
        let row = a as u32;
        Ok(AddressDecomposition {
            channel,
            bank_group,
            bank,
            row,
            column: line_in_row * self.columns_per_line() + col_in_line,
            byte_offset,
        })
    }

    pub fn compose(&self, d: &AddressDecomposition) -> u64 {
        let cpl = self.columns_per_line();
        let mut addr = d.row as u64;
        let mut put = |v: u32, n: u32| {
            addr = (addr << log2(n)) | v as u64;
        };
        put(d.column / cpl, self.lines_per_row());
        put(d.bank, self.banks_per_group);
        put(d.bank_group, self.bank_groups_per_channel);
        put(d.channel, self.channels);
        put(d.column % cpl, cpl);
        put(d.byte_offset, self.column_bytes);
        addr
    }

    /// Channel owning an address; identical for home and cache locations.
    pub fn channel_of(&self, addr: u64) -> u32 {
        ((addr >> (log2(self.column_bytes) + log2(self.columns_per_line()))) & (self.channels as u64 - 1)) as u32
    }

    pub fn dram_cache_index(&self, scm_addr: u64) -> Result<DramCacheIndex> {
        let capacity = self.scm_capacity();
        if scm_addr >= capacity {
            return Err(Error::AddressOutOfRange { addr: scm_addr, capacity });
        }
        let line = scm_addr / self.cacheline_bytes as u64;
        let lines = self.dram_cache_lines();
        let set = line % lines;
        let tag = (line / lines) as u8;
        let sector = ((scm_addr / self.column_bytes as u64) % self.columns_per_line() as u64) as u8;
        Ok(DramCacheIndex {
            set,
            tag,
            sector,
            line_in_row: self.line_in_row_of_set(set),
            lines_per_row: self.lines_per_row() as u8,
            columns_per_line: self.columns_per_line() as u8,
        })
    }

    pub fn line_in_row_of_set(&self, set: u64) -> u8 {
        let shift = log2(self.channels) + log2(self.banks_per_channel());
        ((set >> shift) & (self.lines_per_row() as u64 - 1)) as u8
    }

    /// DRAM address of column `sector` of cache slot `set`.
    pub fn dram_address_of(&self, set: u64, sector: u8) -> u64 {
        set * self.cacheline_bytes as u64 + sector as u64 * self.column_bytes as u64
    }

    /// Home SCM address of column `sector` of the line with (`set`, `tag`).
    pub fn home_address_of(&self, set: u64, tag: u8, sector: u8) -> u64 {
        let line = tag as u64 * self.dram_cache_lines() + set;
        line * self.cacheline_bytes as u64 + sector as u64 * self.column_bytes as u64
    }

    /// Per-channel DRAM row identifier (row-major over the channel's banks).
    pub fn dram_row_id(&self, d: &AddressDecomposition) -> u64 {
        ((d.row as u64) << log2(self.banks_per_channel())) | self.flat_bank(d) as u64
    }

    pub fn flat_bank(&self, d: &AddressDecomposition) -> u32 {
        d.bank_group * self.banks_per_group + d.bank
    }

    /// DRAM row id of a cache set, relative to its channel.
    pub fn row_id_of_set(&self, set: u64) -> u64 {
        let d = self.decompose_dram(self.dram_address_of(set, 0)).expect("set within DRAM capacity");
        self.dram_row_id(&d)
    }
}

impl DramCacheIndex {
    pub fn is_metadata_column(&self) -> bool {
        self.line_in_row + 1 == self.lines_per_row && self.sector + 1 == self.columns_per_line
    }

    /// Number of cacheable columns in this line (one fewer for the line
    /// sharing its row's metadata column).
    pub fn cacheable_columns(&self) -> u8 {
        if self.line_in_row + 1 == self.lines_per_row {
            self.columns_per_line - 1
        } else {
            self.columns_per_line
        }
    }
}

/// Whether the column holds the row's metadata instead of cacheable data.
pub fn is_metadata_column(idx: &DramCacheIndex) -> bool {
    idx.is_metadata_column()
}
