//! Per-line and per-row DRAM cache metadata and its in-row encodings.
//!
//! AMIL packs the 6-bit metadata of each of a row's 8 lines into the first
//! 48 bits of the row's last 32 B column: line `i` occupies bits
//! `[6i, 6i + 6)` as tag (2), valid (1), dirty (1), affinity (2).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const LINE_META_BITS: u32 = 6;
pub const AMIL_BITS: u32 = 48;
pub const AMIL_MASK: u64 = (1 << AMIL_BITS) - 1;
pub const LINES_PER_ROW: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash, Serialize, Deserialize)]
pub struct LineMeta {
    pub tag: u8,
    pub valid: bool,
    pub dirty: bool,
    pub affinity: u8,
}

impl LineMeta {
    pub fn new(tag: u8, valid: bool, dirty: bool, affinity: u8) -> Self {
        debug_assert!(tag < 4 && affinity < 4);
        Self { tag, valid, dirty, affinity }
    }

    pub fn to_bits(self) -> u8 {
        (self.tag & 3) | (self.valid as u8) << 2 | (self.dirty as u8) << 3 | (self.affinity & 3) << 4
    }

    pub fn from_bits(bits: u8) -> Self {
        Self { tag: bits & 3, valid: bits & 4 != 0, dirty: bits & 8 != 0, affinity: (bits >> 4) & 3 }
    }

    /// The 4-bit tag/valid/dirty nibble kept in the tag cache.
    pub fn tag_nibble(self) -> u8 {
        self.to_bits() & 0xF
    }

    pub fn same_tag_state(&self, other: &LineMeta) -> bool {
        self.tag_nibble() == other.tag_nibble()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash, Serialize, Deserialize)]
pub struct RowMetadata {
    pub lines: [LineMeta; LINES_PER_ROW],
}

pub fn amil_encode(meta: &RowMetadata) -> u64 {
    meta.lines.iter().enumerate().fold(0u64, |w, (i, l)| w | (l.to_bits() as u64) << (LINE_META_BITS as usize * i))
}

/// Inverse of [`amil_encode`]; bits above 48 are ignored.
pub fn amil_decode(word: u64) -> RowMetadata {
    let mut meta = RowMetadata::default();
    for (i, line) in meta.lines.iter_mut().enumerate() {
        *line = LineMeta::from_bits(((word >> (LINE_META_BITS as usize * i)) & 0x3F) as u8);
    }
    meta
}

/// Contents of the metadata column: 6 little-endian bytes of metadata
/// followed by 26 zero bytes.
pub fn amil_column(meta: &RowMetadata) -> [u8; 32] {
    let mut col = [0u8; 32];
    col[..6].copy_from_slice(&amil_encode(meta).to_le_bytes()[..6]);
    col
}

pub fn decode_amil_column(bytes: &[u8]) -> Result<RowMetadata> {
    if bytes.len() != 32 {
        return Err(Error::Usage(format!("metadata column is 32 bytes, got {}", bytes.len())));
    }
    if bytes[6..].iter().any(|b| *b != 0) {
        return Err(Error::Usage("metadata column padding must be zero".into()));
    }
    let mut w = [0u8; 8];
    w[..6].copy_from_slice(&bytes[..6]);
    Ok(amil_decode(u64::from_le_bytes(w)))
}

/// 4 B tag-cache sector for one DRAM row (affinity bits excluded).
pub fn ctc_sector_encode(meta: &RowMetadata) -> u32 {
    meta.lines.iter().enumerate().fold(0u32, |w, (i, l)| w | (l.tag_nibble() as u32) << (4 * i))
}

/// Decode a tag-cache sector; affinity is taken from `affinity_source`.
pub fn ctc_sector_decode(word: u32, affinity_source: &RowMetadata) -> RowMetadata {
    let mut meta = RowMetadata::default();
    for (i, line) in meta.lines.iter_mut().enumerate() {
        let nib = ((word >> (4 * i)) & 0xF) as u8;
        *line = LineMeta::from_bits(nib | affinity_source.lines[i].affinity << 4);
    }
    meta
}
