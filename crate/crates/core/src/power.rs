//! Energy accounting and the power-driven SCM throttle.
//!
//! Energies are accumulated as integer femtojoules so that totals are exact
//! for per-bit parameters with up to three decimals of picojoules.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::timing::{Rank, Throttle};
use crate::Cycle;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceEnergy {
    /// pJ per row-buffer bit on activation.
    pub act: f64,
    /// pJ per bit written back on precharge (DRAM: whole row; SCM: dirty data).
    pub pre: f64,
    pub rd: f64,
    pub wr: f64,
}

/// How SCM precharge-write energy is charged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PrechargeCharge {
    /// Only the dirty columns of the open row.
    #[default]
    DirtyColumns,
    /// The full row whenever any column is dirty.
    FullRow,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnergyParams {
    pub dram: DeviceEnergy,
    pub scm: DeviceEnergy,
    pub scm_precharge: PrechargeCharge,
}

impl Default for EnergyParams {
    fn default() -> Self {
        Self {
            dram: DeviceEnergy { act: 1.17, pre: 0.39, rd: 0.93, wr: 1.02 },
            scm: DeviceEnergy { act: 2.47, pre: 16.82, rd: 0.93, wr: 1.02 },
            scm_precharge: PrechargeCharge::DirtyColumns,
        }
    }
}

impl EnergyParams {
    pub fn validate(&self) -> Result<()> {
        for (name, d) in [("dram", &self.dram), ("scm", &self.scm)] {
            for (field, v) in [("act", d.act), ("pre", d.pre), ("rd", d.rd), ("wr", d.wr)] {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::config(format!("energy.{name}.{field}"), "must be a finite value >= 0"));
                }
            }
        }
        Ok(())
    }

    fn device(&self, rank: Rank) -> &DeviceEnergy {
        match rank {
            Rank::Dram => &self.dram,
            Rank::Scm => &self.scm,
        }
    }

    /// Per-bit energy in femtojoules.
    pub fn per_bit_fj(&self, event: EnergyEvent, rank: Rank) -> u64 {
        let d = self.device(rank);
        let pj = match event {
            EnergyEvent::Act => d.act,
            EnergyEvent::Pre => d.pre,
            EnergyEvent::Rd => d.rd,
            EnergyEvent::Wr => d.wr,
        };
        (pj * 1000.0).round() as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyEvent {
    Act,
    Pre,
    Rd,
    Wr,
}

impl EnergyEvent {
    pub const ALL: [EnergyEvent; 4] = [EnergyEvent::Act, EnergyEvent::Pre, EnergyEvent::Rd, EnergyEvent::Wr];

    fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            EnergyEvent::Act => "act",
            EnergyEvent::Pre => "pre",
            EnergyEvent::Rd => "rd",
            EnergyEvent::Wr => "wr",
        }
    }
}

impl std::str::FromStr for EnergyEvent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "act" => Ok(EnergyEvent::Act),
            "pre" => Ok(EnergyEvent::Pre),
            "rd" => Ok(EnergyEvent::Rd),
            "wr" => Ok(EnergyEvent::Wr),
            other => Err(Error::Usage(format!("unknown energy event `{other}`"))),
        }
    }
}

/// Per-(rank, event) energy totals in femtojoules.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EnergyLedger {
    fj: [[u64; 4]; 2],
}

impl EnergyLedger {
    pub fn record_energy(&mut self, params: &EnergyParams, event: EnergyEvent, rank: Rank, bits: u64) -> Result<u64> {
        if bits == 0 {
            return Err(Error::Usage("energy event with zero bits".into()));
        }
        let e = params.per_bit_fj(event, rank) * bits;
        self.fj[rank as usize][event.index()] += e;
        Ok(e)
    }

    pub fn get_fj(&self, rank: Rank, event: EnergyEvent) -> u64 {
        self.fj[rank as usize][event.index()]
    }

    pub fn rank_total_fj(&self, rank: Rank) -> u64 {
        self.fj[rank as usize].iter().sum()
    }

    pub fn total_fj(&self) -> u64 {
        self.rank_total_fj(Rank::Dram) + self.rank_total_fj(Rank::Scm)
    }

    pub fn total_pj(&self) -> f64 {
        fj_to_pj(self.total_fj())
    }

    pub fn merge(&mut self, other: &EnergyLedger) {
        for r in 0..2 {
            for e in 0..4 {
                self.fj[r][e] += other.fj[r][e];
            }
        }
    }
}

pub fn fj_to_pj(fj: u64) -> f64 {
    // Integer split keeps the decimal part exact for the common cases.
    (fj / 1000) as f64 + (fj % 1000) as f64 / 1000.0
}

/// Average power in watts of `fj` femtojoules spent over `cycles` ns.
pub fn watts(fj: u64, cycles: Cycle) -> f64 {
    if cycles == 0 {
        0.0
    } else {
        fj as f64 / cycles as f64 * 1e-6
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PowerConfig {
    /// Stack-wide budget in watts; split evenly across channels. None = unlimited.
    pub budget_watts: Option<f64>,
    pub window: Cycle,
    pub hysteresis: f64,
}

impl Default for PowerConfig {
    fn default() -> Self {
        Self { budget_watts: None, window: 10_000, hysteresis: 0.1 }
    }
}

impl PowerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 {
            return Err(Error::config("power.window", "must be > 0"));
        }
        if !(0.0..1.0).contains(&self.hysteresis) {
            return Err(Error::config("power.hysteresis", "must be in [0, 1)"));
        }
        if let Some(b) = self.budget_watts {
            if b.is_nan() || b < 0.0 {
                return Err(Error::config("power.budget_watts", "must be >= 0"));
            }
        }
        Ok(())
    }
}

/// Windowed power monitor driving the throttle flags of one channel.
#[derive(Debug, Clone)]
pub struct PowerMonitor {
    pub window: Cycle,
    pub budget: Option<f64>,
    pub hysteresis: f64,
    pub state: Throttle,
    last_total_fj: u64,
    pub engagements: u64,
}

impl PowerMonitor {
    pub fn new(window: Cycle, budget: Option<f64>, hysteresis: f64) -> Self {
        Self { window, budget, hysteresis, state: Throttle::default(), last_total_fj: 0, engagements: 0 }
    }

    /// Close a window ending now; returns the window's power and the throttle
    /// flags to apply for the next window.
    pub fn windowed_power_and_throttle(&mut self, ledger: &EnergyLedger, elapsed: Cycle) -> (f64, Throttle) {
        let total = ledger.total_fj();
        let power = watts(total - self.last_total_fj, elapsed);
        self.last_total_fj = total;
        if let Some(budget) = self.budget {
            let engaged = self.state.act || self.state.wr;
            if !engaged && power > budget {
                self.state = Throttle { act: true, wr: true };
                self.engagements += 1;
            } else if engaged && power < budget * (1.0 - self.hysteresis) {
                self.state = Throttle::default();
            }
        }
        (power, self.state)
    }
}
