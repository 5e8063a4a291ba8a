//! DRAM/SCM device timing: per-bank state machines behind a shared channel
//! bus, FR-FCFS command scheduling, DRAM refresh and SCM throttling.

mod channel;

pub use channel::{Channel, ColumnRequest, CommandKind, CommandRecord, Completion};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Cycle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rank {
    Dram = 0,
    Scm = 1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Op {
    Read,
    Write,
}

/// Timing in bus cycles (1 GHz, so 1 cycle = 1 ns).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimingParams {
    pub cl: Cycle,
    pub rcd: Cycle,
    pub ras: Cycle,
    pub wr: Cycle,
    pub rp: Cycle,
    pub bl: Cycle,
    /// 0 disables refresh.
    #[serde(default)]
    pub refresh_interval: Cycle,
    #[serde(default)]
    pub refresh_duration: Cycle,
}

impl TimingParams {
    pub fn dram() -> Self {
        Self { cl: 14, rcd: 14, ras: 33, wr: 16, rp: 14, bl: 1, refresh_interval: 3900, refresh_duration: 350 }
    }

    pub fn scm(mode: ScmMode) -> Self {
        let (rcd, ras, wr) = match mode {
            ScmMode::Slc => (60, 60, 150),
            ScmMode::Mlc => (120, 120, 1000),
            ScmMode::Tlc => (250, 250, 2350),
        };
        Self { cl: 14, rcd, ras, wr, rp: 14, bl: 1, refresh_interval: 0, refresh_duration: 0 }
    }

    pub fn without_refresh(mut self) -> Self {
        self.refresh_interval = 0;
        self.refresh_duration = 0;
        self
    }

    pub fn validate(&self, key: &str) -> Result<()> {
        if self.bl == 0 {
            return Err(Error::config(format!("{key}.bl"), "burst length must be >= 1 cycle"));
        }
        if self.refresh_interval > 0 && self.refresh_duration >= self.refresh_interval {
            return Err(Error::config(format!("{key}.refresh_duration"), "must be shorter than refresh_interval"));
        }
        Ok(())
    }

    /// Row-conflict read latency with no pending constraints.
    pub fn conflict_latency(&self) -> Cycle {
        self.rp + self.rcd + self.cl + self.bl
    }

    pub fn hit_latency(&self) -> Cycle {
        self.cl + self.bl
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ScmMode {
    Slc,
    #[default]
    Mlc,
    Tlc,
}

/// SCM throttle state: doubled activation and/or write-recovery time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Throttle {
    pub act: bool,
    pub wr: bool,
}

/// Timing for a rank with its throttle state. Throttling is a state applied
/// to the base parameters, so setting the same flag twice does not compound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankTiming {
    pub rank: Rank,
    base: TimingParams,
    throttle: Throttle,
}

impl RankTiming {
    pub fn new(rank: Rank, base: TimingParams) -> Self {
        Self { rank, base, throttle: Throttle::default() }
    }

    pub fn base(&self) -> &TimingParams {
        &self.base
    }

    pub fn throttle(&self) -> Throttle {
        self.throttle
    }

    pub fn apply_throttle(&mut self, throttle: Throttle) -> Result<TimingParams> {
        if self.rank == Rank::Dram && (throttle.act || throttle.wr) {
            return Err(Error::Usage("throttling applies to the SCM rank only".into()));
        }
        self.throttle = throttle;
        Ok(self.effective())
    }

    pub fn effective(&self) -> TimingParams {
        apply_throttle(&self.base, self.throttle)
    }
}

/// Doubles tRCD when `act` is set and tWR when `wr` is set.
pub fn apply_throttle(base: &TimingParams, throttle: Throttle) -> TimingParams {
    let mut p = *base;
    if throttle.act {
        p.rcd *= 2;
    }
    if throttle.wr {
        p.wr *= 2;
    }
    p
}
