//! DRAM cache fill/bypass policies.
//!
//! The SCM-aware policy filters misses in two steps: a miss whose penalty
//! level does not exceed the level of the running average bypasses without
//! touching DRAM; otherwise its affinity level is compared against the
//! victim's stored affinity.

mod counters;
mod score;

pub use counters::{PageActivationTable, PAGE_BYTES};
pub use score::{discretize, ScorePipelineState, MOVING_AVERAGE_WEIGHT};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dram_cache::LineMeta;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    ScmAware,
    AlwaysFill,
    AlwaysBypass,
    /// Fill each miss with probability `p` (a BEAR-like approximation).
    ProbabilisticFill(f64),
    /// Fill once the page has seen `k` accesses (a RedCache-like approximation).
    AccessCountThreshold(u32),
}

impl PolicyKind {
    pub fn validate(&self) -> Result<()> {
        if let PolicyKind::ProbabilisticFill(p) = self {
            if !(0.0..=1.0).contains(p) {
                return Err(Error::config("bypass.fill_probability", "must be within [0, 1]"));
            }
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        match self {
            PolicyKind::ScmAware => "scm_aware".into(),
            PolicyKind::AlwaysFill => "always_fill".into(),
            PolicyKind::AlwaysBypass => "always_bypass".into(),
            PolicyKind::ProbabilisticFill(p) => format!("probabilistic_fill({p})"),
            PolicyKind::AccessCountThreshold(k) => format!("access_count_threshold({k})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FillDecision {
    BypassFirstLevel,
    FillInvalid,
    FillReplace,
    NoReplace { decremented: bool },
}

impl FillDecision {
    pub fn fills(self) -> bool {
        matches!(self, FillDecision::FillInvalid | FillDecision::FillReplace)
    }

    /// Whether the decision needed the victim's stored affinity.
    pub fn compared_victim(self) -> bool {
        matches!(self, FillDecision::FillReplace | FillDecision::NoReplace { .. })
    }
}

/// Levels of the missing request: penalty level for the first filter and
/// affinity level for the victim comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RequestLevels {
    pub penalty: u8,
    pub affinity: u8,
}

/// Two-level fill decision. The decrement draw is taken from `rng` only
/// when the victim is kept.
pub fn decide_fill<R: Rng + ?Sized>(
    request: RequestLevels,
    avg_level: u8,
    victim: &LineMeta,
    p_dec: f64,
    rng: &mut R,
) -> FillDecision {
    if request.penalty <= avg_level {
        return FillDecision::BypassFirstLevel;
    }
    if !victim.valid {
        return FillDecision::FillInvalid;
    }
    if request.affinity > victim.affinity {
        return FillDecision::FillReplace;
    }
    let draw: f64 = rng.random();
    FillDecision::NoReplace { decremented: draw < p_dec && victim.affinity > 0 }
}

/// Result of one policy evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyOutcome {
    pub decision: FillDecision,
    pub penalty: f64,
    /// Affinity level to store with a filled line.
    pub affinity_level: u8,
}

/// A miss that passed through the first step of a policy and may still
/// need the victim's stored affinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendingDecision {
    pub penalty: f64,
    pub affinity_level: u8,
    levels: RequestLevels,
    avg_level: u8,
    early: Option<bool>,
}

impl PendingDecision {
    /// True when the decision needs no victim metadata beyond valid/dirty.
    pub fn first_level_bypass(&self) -> bool {
        self.early == Some(false)
    }
}

/// Per-channel policy instance.
#[derive(Debug, Clone)]
pub struct BypassPolicy {
    pub kind: PolicyKind,
    pub score: ScorePipelineState,
}

impl BypassPolicy {
    pub fn new(kind: PolicyKind, score: ScorePipelineState) -> Self {
        Self { kind, score }
    }

    /// Hit path: feed the hypothetical penalty of the hitting requests into
    /// the moving average.
    pub fn on_hit(&mut self, columns: u32, has_write: bool) {
        if let Ok(p) = self.score.scm_penalty_score(columns.max(1), has_write) {
            self.score.update_moving_average(p);
        }
    }

    /// Scores a miss and settles everything that does not depend on the
    /// victim's stored affinity.
    pub fn begin<R: Rng + ?Sized>(
        &mut self,
        columns: u32,
        has_write: bool,
        counter: u32,
        page_accesses: u32,
        rng: &mut R,
    ) -> PendingDecision {
        let penalty = self.score.scm_penalty_score(columns.max(1), has_write).expect("columns >= 1");
        let mut levels = RequestLevels { penalty: 0, affinity: 0 };
        let mut avg_level = 0;
        let early = match self.kind {
            PolicyKind::ScmAware => {
                self.score.observe(penalty, ScorePipelineState::affinity_score(penalty, counter));
                levels = RequestLevels {
                    penalty: self.score.penalty_level(penalty),
                    affinity: self.score.dram_affinity_level(penalty, counter),
                };
                avg_level = self.score.average_level();
                (levels.penalty <= avg_level).then_some(false)
            }
            PolicyKind::AlwaysFill => Some(true),
            PolicyKind::AlwaysBypass => Some(false),
            PolicyKind::ProbabilisticFill(p) => Some(rng.random::<f64>() < p),
            PolicyKind::AccessCountThreshold(k) => Some(page_accesses >= k),
        };
        PendingDecision {
            penalty,
            affinity_level: self.score.dram_affinity_level(penalty, counter),
            levels,
            avg_level,
            early,
        }
    }

    /// Whether `finish` compares against the victim's stored affinity.
    pub fn needs_victim_affinity(&self, pending: &PendingDecision, victim: &LineMeta) -> bool {
        pending.early.is_none() && victim.valid
    }

    pub fn finish<R: Rng + ?Sized>(
        &mut self,
        pending: PendingDecision,
        victim: &LineMeta,
        p_dec: f64,
        rng: &mut R,
    ) -> PolicyOutcome {
        let fill_or_replace = if victim.valid { FillDecision::FillReplace } else { FillDecision::FillInvalid };
        let decision = match pending.early {
            Some(true) => fill_or_replace,
            Some(false) => FillDecision::BypassFirstLevel,
            None => decide_fill(pending.levels, pending.avg_level, victim, p_dec, rng),
        };
        if self.kind == PolicyKind::ScmAware {
            self.score.end_decision();
        }
        PolicyOutcome { decision, penalty: pending.penalty, affinity_level: pending.affinity_level }
    }

    #[allow(clippy::too_many_arguments)]
    pub fn decide<R: Rng + ?Sized>(
        &mut self,
        columns: u32,
        has_write: bool,
        victim: &LineMeta,
        counters: &PageActivationTable,
        page: u64,
        page_accesses: u32,
        rng: &mut R,
    ) -> PolicyOutcome {
        let pending = self.begin(columns, has_write, counters.value(page), page_accesses, rng);
        self.finish(pending, victim, counters.p_dec(page), rng)
    }
}
