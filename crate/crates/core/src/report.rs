//! Report serialization: JSON summary, per-window CSV timeline and the
//! column-aligned comparison table.

use crate::engine::{StatsReport, WindowSample, SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::traffic::Category;

/// Column order of the power timeline CSV.
pub const TIMELINE_COLUMNS: [&str; 5] = ["end_cycle", "watts", "scm_watts", "throttled_channels", "utilization"];

pub fn encode_report(report: &StatsReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

/// Parse a JSON report, rejecting other schema versions before decoding.
pub fn decode_report(text: &str) -> Result<StatsReport> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Report(e.to_string()))?;
    let found = value
        .get("schema_version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| Error::Report("missing schema_version".into()))?;
    if found != SCHEMA_VERSION as u64 {
        return Err(Error::SchemaMismatch { expected: SCHEMA_VERSION, found: found.min(u32::MAX as u64) as u32 });
    }
    serde_path_to_error::deserialize(value).map_err(|e| Error::Report(format!("at `{}`: {}", e.path(), e.inner())))
}

pub fn timeline_csv(samples: &[WindowSample]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TIMELINE_COLUMNS).expect("in-memory write");
    for s in samples {
        w.write_record([
            s.end_cycle.to_string(),
            s.watts.to_string(),
            s.scm_watts.to_string(),
            s.throttled_channels.to_string(),
            s.utilization.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    Count,
    Ratio,
    Real,
}

struct Metric {
    name: String,
    kind: Kind,
    get: Box<dyn Fn(&StatsReport) -> f64>,
}

fn metric(name: &str, kind: Kind, get: impl Fn(&StatsReport) -> f64 + 'static) -> Metric {
    Metric { name: name.to_string(), kind, get: Box::new(get) }
}

fn metrics() -> Vec<Metric> {
    let mut m = vec![
        metric("cycles", Kind::Count, |r| r.cycles as f64),
        metric("requests", Kind::Count, |r| r.requests.completed as f64),
        metric("mean_read_latency", Kind::Real, |r| r.requests.mean_read_latency),
        metric("bus_utilization", Kind::Ratio, |r| r.bandwidth.utilization),
        metric("bandwidth_gbps", Kind::Real, |r| r.bandwidth.gbps),
        metric("hit_rate.dram_cache", Kind::Ratio, |r| r.hit_rates.dram_cache),
        metric("hit_rate.dram_cache_read", Kind::Ratio, |r| r.hit_rates.dram_cache_read),
        metric("hit_rate.dram_cache_write", Kind::Ratio, |r| r.hit_rates.dram_cache_write),
        metric("hit_rate.l2", Kind::Ratio, |r| r.hit_rates.l2),
        metric("hit_rate.ctc", Kind::Ratio, |r| r.hit_rates.ctc),
    ];
    for cat in Category::ALL {
        m.push(metric(&format!("traffic.{}", cat.name()), Kind::Count, move |r| r.traffic.get(cat) as f64));
    }
    m.extend([
        metric("traffic.refresh", Kind::Count, |r| r.traffic.refresh as f64),
        metric("bypass.first_level", Kind::Count, |r| r.bypass.first_level_bypass as f64),
        metric("bypass.fill_invalid", Kind::Count, |r| r.bypass.fill_invalid as f64),
        metric("bypass.fill_replace", Kind::Count, |r| r.bypass.fill_replace as f64),
        metric("bypass.no_replace", Kind::Count, |r| r.bypass.no_replace as f64),
        metric("energy.dram_pj", Kind::Real, |r| r.energy.dram.total_pj),
        metric("energy.scm_pj", Kind::Real, |r| r.energy.scm.total_pj),
        metric("energy.total_pj", Kind::Real, |r| r.energy.total_pj),
        metric("energy.per_request_pj", Kind::Real, |r| r.energy_per_request_pj()),
        metric("power.mean_watts", Kind::Real, |r| r.power.mean_watts),
    ]);
    m
}

fn fmt(kind: Kind, v: f64) -> String {
    match kind {
        Kind::Count => format!("{v:.0}"),
        Kind::Ratio => format!("{v:.4}"),
        Kind::Real => format!("{v:.3}"),
    }
}

fn fmt_delta(kind: Kind, d: f64) -> String {
    let s = fmt(kind, d);
    if s.starts_with('-') {
        s
    } else {
        format!("+{s}")
    }
}

/// Side-by-side table of `reports`; every report after the first gets a
/// delta column against the first.
pub fn comparison_table(names: &[String], reports: &[StatsReport]) -> Result<String> {
    if reports.is_empty() {
        return Err(Error::Usage("at least one report is required".into()));
    }
    if names.len() != reports.len() {
        return Err(Error::Usage("one name per report is required".into()));
    }
    let mut header = vec!["metric".to_string(), names[0].clone()];
    for n in &names[1..] {
        header.push(n.clone());
        header.push(format!("delta({n})"));
    }
    let mut rows = vec![header];
    for m in metrics() {
        let base = (m.get)(&reports[0]);
        let mut row = vec![m.name.clone(), fmt(m.kind, base)];
        for r in &reports[1..] {
            let v = (m.get)(r);
            row.push(fmt(m.kind, v));
            row.push(fmt_delta(m.kind, v - base));
        }
        rows.push(row);
    }
    let widths: Vec<usize> =
        (0..rows[0].len()).map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for row in &rows {
        let mut line = String::new();
        for (c, cell) in row.iter().enumerate() {
            if c == 0 {
                line.push_str(&format!("{cell:<w$}", w = widths[c]));
            } else {
                line.push_str(&format!("  {cell:>w$}", w = widths[c]));
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    Ok(out)
}

/// Headline metrics of one report, in merged-CSV column order.
pub const HEADLINE_COLUMNS: [&str; 12] = [
    "cycles",
    "bus_utilization",
    "bandwidth_gbps",
    "dram_cache_hit_rate",
    "dram_cache_write_hit_rate",
    "l2_hit_rate",
    "ctc_hit_rate",
    "probe_columns",
    "fill_columns",
    "bypasses",
    "energy_pj",
    "mean_read_latency",
];

pub fn headline(r: &StatsReport) -> [String; 12] {
    [
        r.cycles.to_string(),
        r.bandwidth.utilization.to_string(),
        r.bandwidth.gbps.to_string(),
        r.hit_rates.dram_cache.to_string(),
        r.hit_rates.dram_cache_write.to_string(),
        r.hit_rates.l2.to_string(),
        r.hit_rates.ctc.to_string(),
        r.traffic.probe.to_string(),
        (r.traffic.fill_scm_rd + r.traffic.fill_dram_wr).to_string(),
        r.bypass.bypasses().to_string(),
        r.energy.total_pj.to_string(),
        r.requests.mean_read_latency.to_string(),
    ]
}
