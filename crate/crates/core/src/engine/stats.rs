use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::l2_ctc::HitCounter;
use crate::traffic::TrafficCounts;
use crate::Cycle;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RequestStats {
    /// Sector requests injected by the streams.
    pub injected: u64,
    pub completed: u64,
    pub reads: u64,
    pub writes: u64,
    /// Requests that reached the memory controller (L2 misses and writebacks).
    pub memory_requests: u64,
    pub l2_writebacks: u64,
    /// Requests parked because every MSHR entry was busy.
    pub mshr_stalls: u64,
    /// Sectors of the metadata column, served from SCM without caching.
    pub uncacheable: u64,
    pub value_checks: u64,
    pub value_mismatches: u64,
    pub mean_read_latency: f64,
    pub max_read_latency: Cycle,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HitCounters {
    pub dram_cache_read: HitCounter,
    pub dram_cache_write: HitCounter,
    pub l2: HitCounter,
    pub ctc: HitCounter,
}

impl HitCounters {
    pub fn dram_cache(&self) -> HitCounter {
        HitCounter {
            hits: self.dram_cache_read.hits + self.dram_cache_write.hits,
            misses: self.dram_cache_read.misses + self.dram_cache_write.misses,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HitRates {
    pub dram_cache: f64,
    pub dram_cache_read: f64,
    pub dram_cache_write: f64,
    pub l2: f64,
    pub ctc: f64,
}

impl From<&HitCounters> for HitRates {
    fn from(c: &HitCounters) -> Self {
        Self {
            dram_cache: c.dram_cache().rate(),
            dram_cache_read: c.dram_cache_read.rate(),
            dram_cache_write: c.dram_cache_write.rate(),
            l2: c.l2.rate(),
            ctc: c.ctc.rate(),
        }
    }
}

/// Outcome counts of the fill/bypass decisions, one per retired MSHR entry.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BypassBreakdown {
    pub decisions: u64,
    pub first_level_bypass: u64,
    pub fill_invalid: u64,
    pub fill_replace: u64,
    pub no_replace: u64,
    pub decremented: u64,
    /// Extra column reads issued to learn a victim's affinity.
    pub affinity_reads: u64,
}

impl BypassBreakdown {
    pub fn fills(&self) -> u64 {
        self.fill_invalid + self.fill_replace
    }

    pub fn bypasses(&self) -> u64 {
        self.first_level_bypass + self.no_replace
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandwidthStats {
    /// Fraction of cycles each channel's data bus was busy.
    pub per_channel_utilization: Vec<f64>,
    pub utilization: f64,
    pub gbps: f64,
    pub peak_gbps: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceEnergyStats {
    pub act_pj: f64,
    pub pre_pj: f64,
    pub rd_pj: f64,
    pub wr_pj: f64,
    pub total_pj: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyStats {
    pub dram: DeviceEnergyStats,
    pub scm: DeviceEnergyStats,
    pub total_pj: f64,
    pub total_fj: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerStats {
    pub budget_watts: Option<f64>,
    pub windows: u64,
    pub throttled_windows: u64,
    pub engagements: u64,
    pub mean_watts: f64,
    pub max_window_watts: f64,
}

/// One closed power window.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct WindowSample {
    pub end_cycle: Cycle,
    pub watts: f64,
    pub scm_watts: f64,
    pub throttled_channels: u32,
    pub utilization: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatsReport {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub cycles: Cycle,
    pub requests: RequestStats,
    pub traffic: TrafficCounts,
    pub hit_rates: HitRates,
    pub counters: HitCounters,
    pub bypass: BypassBreakdown,
    pub bandwidth: BandwidthStats,
    pub energy: EnergyStats,
    pub power: PowerStats,
    /// Power timeline; written as CSV rather than JSON.
    #[serde(skip, default)]
    pub timeline: Vec<WindowSample>,
}

impl StatsReport {
    /// Delivered bandwidth in GB/s over injected sector requests.
    pub fn demand_gbps(&self) -> f64 {
        if self.cycles == 0 {
            return 0.0;
        }
        (self.requests.completed * self.config.geometry.column_bytes as u64) as f64 / self.cycles as f64
    }

    /// Average energy per completed request, in picojoules.
    pub fn energy_per_request_pj(&self) -> f64 {
        if self.requests.completed == 0 {
            return 0.0;
        }
        self.energy.total_pj / self.requests.completed as f64
    }
}
