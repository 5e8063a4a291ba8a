use crate::error::{Error, Result};
use crate::timing::TimingParams;

/// Weight of a new sample in the moving average of the SCM penalty score.
pub const MOVING_AVERAGE_WEIGHT: f64 = 0.01;

/// Map `value` onto `n_levels` equal-width levels over `[0, max_seen]`.
/// Values at or above `max_seen` land in the top level.
pub fn discretize(value: f64, max_seen: f64, n_levels: u8) -> u8 {
    if max_seen <= 0.0 || n_levels <= 1 || value <= 0.0 {
        return 0;
    }
    let width = max_seen / n_levels as f64;
    let level = (value / width).floor();
    if level >= (n_levels - 1) as f64 {
        n_levels - 1
    } else {
        level as u8
    }
}

/// Per-channel state of the penalty/affinity scoring pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct ScorePipelineState {
    /// tRCD(SCM) - tRCD(DRAM).
    pub numerator_read: f64,
    /// Read numerator plus tWR(SCM) - tWR(DRAM).
    pub numerator_write: f64,
    pub moving_avg: f64,
    pub max_penalty_seen: f64,
    pub max_affinity_seen: f64,
    pub n_levels: u8,
    pub f_update: u32,
    window_max_penalty: f64,
    window_max_affinity: f64,
    decisions_in_window: u32,
}

impl ScorePipelineState {
    pub fn new(dram: &TimingParams, scm: &TimingParams, n_levels: u8, f_update: u32) -> Self {
        let act = scm.rcd.saturating_sub(dram.rcd) as f64;
        let wr = scm.wr.saturating_sub(dram.wr) as f64;
        Self {
            numerator_read: act,
            numerator_write: act + wr,
            moving_avg: 0.0,
            max_penalty_seen: 0.0,
            max_affinity_seen: 0.0,
            n_levels,
            f_update,
            window_max_penalty: 0.0,
            window_max_affinity: 0.0,
            decisions_in_window: 0,
        }
    }

    /// Approximate SCM latency penalty per accessed column.
    pub fn scm_penalty_score(&self, num_columns: u32, has_write: bool) -> Result<f64> {
        if num_columns == 0 {
            return Err(Error::Usage("penalty score needs at least one column".into()));
        }
        let num = if has_write { self.numerator_write } else { self.numerator_read };
        Ok(num / num_columns as f64)
    }

    pub fn update_moving_average(&mut self, sample: f64) {
        self.moving_avg = (1.0 - MOVING_AVERAGE_WEIGHT) * self.moving_avg + MOVING_AVERAGE_WEIGHT * sample;
    }

    pub fn penalty_level(&self, penalty: f64) -> u8 {
        discretize(penalty, self.max_penalty_seen, self.n_levels)
    }

    pub fn average_level(&self) -> u8 {
        discretize(self.moving_avg, self.max_penalty_seen, self.n_levels)
    }

    pub fn affinity_score(penalty: f64, counter: u32) -> f64 {
        penalty * counter as f64
    }

    /// Discretized DRAM-affinity level of a request.
    pub fn dram_affinity_level(&self, penalty: f64, counter: u32) -> u8 {
        discretize(Self::affinity_score(penalty, counter), self.max_affinity_seen, self.n_levels)
    }

    /// Record the scores of a miss before it is discretized.
    pub fn observe(&mut self, penalty: f64, affinity: f64) {
        self.max_penalty_seen = self.max_penalty_seen.max(penalty);
        self.max_affinity_seen = self.max_affinity_seen.max(affinity);
        self.window_max_penalty = self.window_max_penalty.max(penalty);
        self.window_max_affinity = self.window_max_affinity.max(affinity);
    }

    /// Count one bypass decision; every `f_update` decisions the maxima are
    /// reset to the largest values seen during the elapsed window.
    pub fn end_decision(&mut self) {
        self.decisions_in_window += 1;
        if self.f_update > 0 && self.decisions_in_window >= self.f_update {
            self.refresh_maxima();
        }
    }

    fn refresh_maxima(&mut self) {
        self.max_penalty_seen = self.window_max_penalty;
        self.max_affinity_seen = self.window_max_affinity;
        self.window_max_penalty = 0.0;
        self.window_max_affinity = 0.0;
        self.decisions_in_window = 0;
    }
}
