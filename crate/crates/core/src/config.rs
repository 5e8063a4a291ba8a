//! Experiment configuration: a TOML document with one section per module,
//! plus dotted `key=value` overrides.

use serde::{Deserialize, Serialize};

use crate::bypass::PolicyKind;
use crate::dram_cache::{Layout, DEFAULT_MSHR_ENTRIES};
use crate::error::{Error, Result};
use crate::geometry::DeviceGeometry;
use crate::l2_ctc::L2Config;
use crate::power::{EnergyParams, PowerConfig};
use crate::timing::{ScmMode, TimingParams};
use crate::workload::SyntheticPattern;
use crate::Cycle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SimMode {
    /// DRAM caches SCM; the address space is the SCM capacity.
    #[default]
    Cache,
    /// DRAM and SCM both hold data: addresses below the DRAM capacity go to
    /// DRAM, the rest to SCM running in SLC mode.
    Flat,
    /// Requests go straight to the DRAM rank, no L2 (device characterization).
    DirectDram,
    /// Requests go straight to the SCM rank, no L2.
    DirectScm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PolicyName {
    #[default]
    ScmAware,
    AlwaysFill,
    AlwaysBypass,
    ProbabilisticFill,
    AccessCountThreshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BypassConfig {
    pub n_levels: u8,
    /// Decisions between refreshes of the observed score maxima.
    pub f_update: u32,
    pub activation_counters: bool,
    pub fill_probability: f64,
    pub access_threshold: u32,
}

impl Default for BypassConfig {
    fn default() -> Self {
        Self { n_levels: 4, f_update: 100, activation_counters: false, fill_probability: 0.9, access_threshold: 2 }
    }
}

/// Per-field overrides of a device's default timing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimingOverride {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cl: Option<Cycle>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rcd: Option<Cycle>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ras: Option<Cycle>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wr: Option<Cycle>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rp: Option<Cycle>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bl: Option<Cycle>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refresh_interval: Option<Cycle>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refresh_duration: Option<Cycle>,
}

impl TimingOverride {
    pub fn apply(&self, mut p: TimingParams) -> TimingParams {
        let set = |dst: &mut Cycle, v: Option<Cycle>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        set(&mut p.cl, self.cl);
        set(&mut p.rcd, self.rcd);
        set(&mut p.ras, self.ras);
        set(&mut p.wr, self.wr);
        set(&mut p.rp, self.rp);
        set(&mut p.bl, self.bl);
        set(&mut p.refresh_interval, self.refresh_interval);
        set(&mut p.refresh_duration, self.refresh_duration);
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimingConfig {
    pub dram: TimingOverride,
    pub scm: TimingOverride,
    pub dram_refresh: bool,
    /// Age after which FR-FCFS stops letting row hits bypass a request.
    pub starvation_limit: Cycle,
}

impl Default for TimingConfig {
    fn default() -> Self {
        Self {
            dram: TimingOverride::default(),
            scm: TimingOverride::default(),
            dram_refresh: true,
            starvation_limit: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MshrConfig {
    pub entries: usize,
}

impl Default for MshrConfig {
    fn default() -> Self {
        Self { entries: DEFAULT_MSHR_ENTRIES }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PatternName {
    #[default]
    StreamingRead,
    StreamingWrite,
    RandomRead,
    RandomWrite,
    MixedRandom,
    ZipfHotCold,
    Strided,
    /// Records come from the file named by `workload.trace`.
    Trace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorkloadConfig {
    pub pattern: PatternName,
    pub length: u64,
    pub streams: u32,
    /// Outstanding sector requests allowed per stream.
    pub window: u32,
    pub write_fraction: f64,
    pub alpha: f64,
    pub stride: u64,
    /// Address span of synthetic patterns; the mode's full capacity if unset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub span_bytes: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<String>,
}

impl Default for WorkloadConfig {
    fn default() -> Self {
        Self {
            pattern: PatternName::StreamingRead,
            length: 100_000,
            streams: 64,
            window: 64,
            write_fraction: 0.5,
            alpha: 1.2,
            stride: 4096,
            span_bytes: None,
            trace: None,
        }
    }
}

impl WorkloadConfig {
    /// The synthetic pattern, or None for trace-driven runs.
    pub fn synthetic(&self) -> Option<SyntheticPattern> {
        Some(match self.pattern {
            PatternName::StreamingRead => SyntheticPattern::StreamingRead,
            PatternName::StreamingWrite => SyntheticPattern::StreamingWrite,
            PatternName::RandomRead => SyntheticPattern::RandomRead,
            PatternName::RandomWrite => SyntheticPattern::RandomWrite,
            PatternName::MixedRandom => SyntheticPattern::MixedRandom { write_fraction: self.write_fraction },
            PatternName::ZipfHotCold => {
                SyntheticPattern::ZipfHotCold { alpha: self.alpha, write_fraction: self.write_fraction }
            }
            PatternName::Strided => SyntheticPattern::Strided { stride: self.stride },
            PatternName::Trace => return None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.streams == 0 {
            return Err(Error::config("workload.streams", "must be >= 1"));
        }
        if self.window == 0 {
            return Err(Error::config("workload.window", "must be >= 1"));
        }
        match self.synthetic() {
            Some(p) => {
                if self.length == 0 {
                    return Err(Error::config("workload.length", "must be > 0"));
                }
                p.validate().map_err(|e| Error::config("workload", e.to_string()))
            }
            None if self.trace.is_none() => Err(Error::config("workload.trace", "required when pattern = \"trace\"")),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub json: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub mode: SimMode,
    pub policy: PolicyName,
    pub layout: Layout,
    pub ctc_l2_ways: u32,
    pub scm_mode: ScmMode,
    pub geometry: DeviceGeometry,
    pub timing: TimingConfig,
    pub bypass: BypassConfig,
    pub l2: L2Config,
    pub mshr: MshrConfig,
    pub power: PowerConfig,
    pub energy: EnergyParams,
    pub workload: WorkloadConfig,
    pub output: OutputConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            mode: SimMode::Cache,
            policy: PolicyName::ScmAware,
            layout: Layout::Amil,
            ctc_l2_ways: 4,
            scm_mode: ScmMode::Mlc,
            geometry: DeviceGeometry::default(),
            timing: TimingConfig::default(),
            bypass: BypassConfig::default(),
            l2: L2Config::default(),
            mshr: MshrConfig::default(),
            power: PowerConfig::default(),
            energy: EnergyParams::default(),
            workload: WorkloadConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let value: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::config("<document>", e.message()))?;
        Self::from_table(value)
    }

    pub fn from_table(table: toml::Table) -> Result<Self> {
        serde_path_to_error::deserialize(toml::Value::Table(table)).map_err(|e| {
            let path = e.path().to_string();
            Error::config(if path == "." { "<document>".into() } else { path }, e.into_inner().to_string())
        })
    }

    /// Parse `text`, apply `key=value` overrides in order, and validate.
    pub fn load(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table =
            text.parse().map_err(|e: toml::de::Error| Error::config("<document>", e.message()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let cfg = Self::from_table(table)?;
        cfg.resolved()
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn policy_kind(&self) -> PolicyKind {
        match self.policy {
            PolicyName::ScmAware => PolicyKind::ScmAware,
            PolicyName::AlwaysFill => PolicyKind::AlwaysFill,
            PolicyName::AlwaysBypass => PolicyKind::AlwaysBypass,
            PolicyName::ProbabilisticFill => PolicyKind::ProbabilisticFill(self.bypass.fill_probability),
            PolicyName::AccessCountThreshold => PolicyKind::AccessCountThreshold(self.bypass.access_threshold),
        }
    }

    pub fn dram_timing(&self) -> TimingParams {
        let base = self.timing.dram.apply(TimingParams::dram());
        if self.timing.dram_refresh {
            base
        } else {
            base.without_refresh()
        }
    }

    pub fn scm_timing(&self) -> TimingParams {
        self.timing.scm.apply(TimingParams::scm(self.scm_mode)).without_refresh()
    }

    pub fn l2_config(&self) -> L2Config {
        L2Config { ctc_l2_ways: self.ctc_l2_ways, ..self.l2 }
    }

    /// Size of the address space requests may target.
    pub fn address_capacity(&self) -> u64 {
        match self.mode {
            SimMode::Cache | SimMode::DirectScm => self.geometry.scm_capacity(),
            SimMode::Flat => self.geometry.dram_capacity() + self.geometry.scm_capacity(),
            SimMode::DirectDram => self.geometry.dram_capacity(),
        }
    }

    /// Apply mode-implied settings and validate the whole configuration.
    pub fn resolved(&self) -> Result<Self> {
        let mut c = self.clone();
        if c.mode == SimMode::Flat {
            c.scm_mode = ScmMode::Slc;
            c.ctc_l2_ways = 0;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate().map_err(|e| Error::config("geometry", e.to_string()))?;
        self.dram_timing().validate("timing.dram")?;
        self.scm_timing().validate("timing.scm")?;
        self.l2_config().validate()?;
        if (self.geometry.cacheline_bytes as u64) < self.l2.line_bytes as u64 {
            return Err(Error::config("geometry.cacheline_bytes", "must be at least the L2 line size"));
        }
        if self.geometry.column_bytes != self.l2.sector_bytes {
            return Err(Error::config("geometry.column_bytes", "must equal the L2 sector size"));
        }
        if !(1..=4).contains(&self.bypass.n_levels) {
            return Err(Error::config("bypass.n_levels", "must be within 1..=4 (2-bit stored level)"));
        }
        PolicyKind::ProbabilisticFill(self.bypass.fill_probability).validate()?;
        if self.mshr.entries == 0 {
            return Err(Error::config("mshr.entries", "must be >= 1"));
        }
        if self.timing.starvation_limit == 0 {
            return Err(Error::config("timing.starvation_limit", "must be >= 1"));
        }
        self.power.validate()?;
        self.energy.validate()?;
        self.workload.validate()?;
        if let Some(span) = self.workload.span_bytes {
            if span > self.address_capacity() {
                return Err(Error::config(
                    "workload.span_bytes",
                    format!("{span} exceeds the address capacity {}", self.address_capacity()),
                ));
            }
        }
        Ok(())
    }
}

/// Apply one `dotted.key=value` override to a TOML table. Values parse as
/// TOML when possible and fall back to a bare string.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) =
        assignment.split_once('=').ok_or_else(|| Error::config(assignment, "override must look like key=value"))?;
    let key = key.trim();
    let raw = raw.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(Error::config(assignment, "empty key segment"));
    }
    let value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let parts: Vec<&str> = key.split('.').collect();
    let mut cur = table;
    for p in &parts[..parts.len() - 1] {
        let entry = cur.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry.as_table_mut().ok_or_else(|| Error::config(key, format!("`{p}` is not a section")))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}
