//! Direct-mapped DRAM cache of SCM data: metadata layouts, MSHRs and the
//! column-operation plans for probes, fills, evictions and metadata updates.

mod meta;
mod mshr;

pub use meta::{
    amil_column, amil_decode, amil_encode, ctc_sector_decode, ctc_sector_encode, decode_amil_column, LineMeta,
    RowMetadata, AMIL_BITS, AMIL_MASK, LINES_PER_ROW, LINE_META_BITS,
};
pub use mshr::{MshrEntry, MshrOutcome, MshrTable, DEFAULT_MSHR_ENTRIES, LINE_ADDRESS_BITS, MSHR_ENTRY_BITS};

use serde::{Deserialize, Serialize};

use crate::geometry::DeviceGeometry;
use crate::timing::{Op, Rank};
use crate::traffic::Category;

/// Where a DRAM row keeps the tags of its lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// All metadata aggregated in the row's last column.
    #[default]
    Amil,
    /// Tags stored with each line's data (in the ECC bits).
    Tad,
}

impl Layout {
    /// AMIL leaves the ECC bits untouched; TAD repurposes them for tags.
    pub fn preserves_ecc(self) -> bool {
        matches!(self, Layout::Amil)
    }
}

/// One 32 B column transfer. `addr` is local to the rank's address space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ColumnOp {
    pub rank: Rank,
    pub addr: u64,
    pub op: Op,
    pub category: Category,
}

fn line_shift(geo: &DeviceGeometry) -> u32 {
    geo.channels.trailing_zeros() + geo.banks_per_channel().trailing_zeros()
}

/// The set holding line `line` of the DRAM row that contains `set`.
pub fn set_in_row(geo: &DeviceGeometry, set: u64, line: u8) -> u64 {
    let shift = line_shift(geo);
    let mask = (geo.lines_per_row() as u64 - 1) << shift;
    (set & !mask) | (line as u64) << shift
}

pub fn row_sets(geo: &DeviceGeometry, set: u64) -> impl Iterator<Item = u64> + '_ {
    (0..geo.lines_per_row() as u8).map(move |l| set_in_row(geo, set, l))
}

/// Number of columns of the line in `set` that can hold SCM data.
pub fn cacheable_columns(geo: &DeviceGeometry, set: u64) -> u8 {
    let cpl = geo.columns_per_line() as u8;
    if geo.line_in_row_of_set(set) as u32 + 1 == geo.lines_per_row() {
        cpl - 1
    } else {
        cpl
    }
}

pub fn metadata_column_address(geo: &DeviceGeometry, set: u64) -> u64 {
    let last = set_in_row(geo, set, geo.lines_per_row() as u8 - 1);
    geo.dram_address_of(last, geo.columns_per_line() as u8 - 1)
}

/// Column reads needed to fetch the tags of every line in `set`'s row.
pub fn probe_ops(geo: &DeviceGeometry, set: u64, layout: Layout) -> Vec<ColumnOp> {
    match layout {
        Layout::Amil => vec![ColumnOp {
            rank: Rank::Dram,
            addr: metadata_column_address(geo, set),
            op: Op::Read,
            category: Category::Probe,
        }],
        Layout::Tad => row_sets(geo, set)
            .map(|s| ColumnOp {
                rank: Rank::Dram,
                addr: geo.dram_address_of(s, 0),
                op: Op::Read,
                category: Category::Probe,
            })
            .collect(),
    }
}

/// Fetch the stored metadata of `set`'s row; returns it with the column
/// reads the layout requires (1 for AMIL, one per line for TAD).
pub fn probe_row_tags(
    geo: &DeviceGeometry,
    store: &CacheStore,
    set: u64,
    layout: Layout,
) -> (RowMetadata, Vec<ColumnOp>) {
    (store.stored_row(set), probe_ops(geo, set, layout))
}

/// Move a line from SCM into the DRAM cache.
pub fn fill_line(geo: &DeviceGeometry, set: u64, tag: u8) -> Vec<ColumnOp> {
    let n = cacheable_columns(geo, set);
    let reads = (0..n).map(|c| ColumnOp {
        rank: Rank::Scm,
        addr: geo.home_address_of(set, tag, c),
        op: Op::Read,
        category: Category::FillScmRd,
    });
    let writes = (0..n).map(|c| ColumnOp {
        rank: Rank::Dram,
        addr: geo.dram_address_of(set, c),
        op: Op::Write,
        category: Category::FillDramWr,
    });
    reads.chain(writes).collect()
}

/// Write a dirty victim back to its home; clean or invalid victims move no data.
pub fn evict_line(geo: &DeviceGeometry, set: u64, victim: LineMeta) -> Vec<ColumnOp> {
    if !(victim.valid && victim.dirty) {
        return Vec::new();
    }
    let n = cacheable_columns(geo, set);
    let reads = (0..n).map(|c| ColumnOp {
        rank: Rank::Dram,
        addr: geo.dram_address_of(set, c),
        op: Op::Read,
        category: Category::EvictDramRd,
    });
    let writes = (0..n).map(|c| ColumnOp {
        rank: Rank::Scm,
        addr: geo.home_address_of(set, victim.tag, c),
        op: Op::Write,
        category: Category::EvictScmWr,
    });
    reads.chain(writes).collect()
}

/// Metadata update of `set`'s row. With `have_copy` the column content is
/// already known and only the write is needed; otherwise read-modify-write.
/// TAD updates ride on the data columns and cost nothing extra.
pub fn metadata_update_ops(geo: &DeviceGeometry, set: u64, layout: Layout, have_copy: bool) -> Vec<ColumnOp> {
    if layout == Layout::Tad {
        return Vec::new();
    }
    let addr = metadata_column_address(geo, set);
    let write = ColumnOp { rank: Rank::Dram, addr, op: Op::Write, category: Category::MetadataWriteback };
    if have_copy {
        vec![write]
    } else {
        vec![ColumnOp { op: Op::Read, ..write }, write]
    }
}

/// Functional state of the DRAM cache: the current metadata of every line
/// and the copy held in DRAM (which lags while a tag-cache sector is dirty).
#[derive(Debug, Clone)]
pub struct CacheStore {
    geo: DeviceGeometry,
    current: Vec<LineMeta>,
    stored: Vec<LineMeta>,
}

impl CacheStore {
    pub fn new(geo: DeviceGeometry) -> Self {
        let n = geo.dram_cache_lines() as usize;
        Self { geo, current: vec![LineMeta::default(); n], stored: vec![LineMeta::default(); n] }
    }

    pub fn line(&self, set: u64) -> LineMeta {
        self.current[set as usize]
    }

    pub fn stored_line(&self, set: u64) -> LineMeta {
        self.stored[set as usize]
    }

    pub fn is_hit(&self, set: u64, tag: u8) -> bool {
        let l = self.current[set as usize];
        l.valid && l.tag == tag
    }

    pub fn set_line(&mut self, set: u64, meta: LineMeta) {
        self.current[set as usize] = meta;
    }

    fn row(&self, set: u64, v: &[LineMeta]) -> RowMetadata {
        let mut m = RowMetadata::default();
        for (l, s) in row_sets(&self.geo, set).enumerate() {
            m.lines[l] = v[s as usize];
        }
        m
    }

    pub fn current_row(&self, set: u64) -> RowMetadata {
        self.row(set, &self.current)
    }

    pub fn stored_row(&self, set: u64) -> RowMetadata {
        self.row(set, &self.stored)
    }

    /// Persist one line's current metadata into the DRAM copy.
    pub fn persist_line(&mut self, set: u64) {
        self.stored[set as usize] = self.current[set as usize];
    }

    /// Persist the whole row's current metadata into its DRAM copy.
    pub fn write_back_row(&mut self, set: u64) {
        for s in row_sets(&self.geo, set).collect::<Vec<_>>() {
            self.stored[s as usize] = self.current[s as usize];
        }
    }

    /// Persist only the tag/valid/dirty nibbles of `row` (a tag-cache
    /// writeback); affinity bits keep their DRAM value.
    pub fn write_back_tags(&mut self, set: u64, row: &RowMetadata) {
        for (l, s) in row_sets(&self.geo, set).enumerate().collect::<Vec<_>>() {
            let aff = self.stored[s as usize].affinity;
            self.stored[s as usize] = LineMeta { affinity: aff, ..row.lines[l] };
        }
    }

    pub fn resident_lines(&self) -> usize {
        self.current.iter().filter(|l| l.valid).count()
    }
}
