//! Traffic categories every bus column occupancy is attributed to.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    DemandDramRd,
    DemandDramWr,
    DemandScmRd,
    DemandScmWr,
    Probe,
    MetadataWriteback,
    FillScmRd,
    FillDramWr,
    EvictDramRd,
    EvictScmWr,
}

impl Category {
    pub const ALL: [Category; 10] = [
        Category::DemandDramRd,
        Category::DemandDramWr,
        Category::DemandScmRd,
        Category::DemandScmWr,
        Category::Probe,
        Category::MetadataWriteback,
        Category::FillScmRd,
        Category::FillDramWr,
        Category::EvictDramRd,
        Category::EvictScmWr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::DemandDramRd => "demand_dram_rd",
            Category::DemandDramWr => "demand_dram_wr",
            Category::DemandScmRd => "demand_scm_rd",
            Category::DemandScmWr => "demand_scm_wr",
            Category::Probe => "probe",
            Category::MetadataWriteback => "metadata_writeback",
            Category::FillScmRd => "fill_scm_rd",
            Category::FillDramWr => "fill_dram_wr",
            Category::EvictDramRd => "evict_dram_rd",
            Category::EvictScmWr => "evict_scm_wr",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Column counts per category plus refresh operations, in a fixed order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrafficCounts {
    pub demand_dram_rd: u64,
    pub demand_dram_wr: u64,
    pub demand_scm_rd: u64,
    pub demand_scm_wr: u64,
    pub probe: u64,
    pub metadata_writeback: u64,
    pub fill_scm_rd: u64,
    pub fill_dram_wr: u64,
    pub evict_dram_rd: u64,
    pub evict_scm_wr: u64,
    /// All-bank refresh operations; they occupy no data bus columns.
    pub refresh: u64,
}

impl TrafficCounts {
    fn slot(&mut self, cat: Category) -> &mut u64 {
        match cat {
            Category::DemandDramRd => &mut self.demand_dram_rd,
            Category::DemandDramWr => &mut self.demand_dram_wr,
            Category::DemandScmRd => &mut self.demand_scm_rd,
            Category::DemandScmWr => &mut self.demand_scm_wr,
            Category::Probe => &mut self.probe,
            Category::MetadataWriteback => &mut self.metadata_writeback,
            Category::FillScmRd => &mut self.fill_scm_rd,
            Category::FillDramWr => &mut self.fill_dram_wr,
            Category::EvictDramRd => &mut self.evict_dram_rd,
            Category::EvictScmWr => &mut self.evict_scm_wr,
        }
    }

    pub fn add(&mut self, cat: Category, n: u64) {
        *self.slot(cat) += n;
    }

    pub fn get(&self, cat: Category) -> u64 {
        *self.clone().slot(cat)
    }

    /// Sum over all column categories (refresh excluded).
    pub fn columns(&self) -> u64 {
        Category::ALL.iter().map(|&c| self.get(c)).sum()
    }

    pub fn merge(&mut self, other: &TrafficCounts) {
        for c in Category::ALL {
            self.add(c, other.get(c));
        }
        self.refresh += other.refresh;
    }
}
