//! Cartesian parameter sweeps over config keys, run in parallel.

use std::str::FromStr;

use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::engine::{run_simulation, StatsReport};
use crate::error::{Error, Result};
use crate::report::{headline, HEADLINE_COLUMNS};
use crate::workload::TraceRecord;

/// One swept key with its values, parsed from `key=v1,v2,...`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepAxis {
    pub key: String,
    pub values: Vec<String>,
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (key, values) =
            s.split_once('=').ok_or_else(|| Error::Usage(format!("sweep axis `{s}` is not key=v1,v2,...")))?;
        let key = key.trim();
        let values: Vec<String> = values.split(',').map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect();
        if key.is_empty() || values.is_empty() {
            return Err(Error::Usage(format!("sweep axis `{s}` needs a key and at least one value")));
        }
        Ok(Self { key: key.to_string(), values })
    }
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub index: usize,
    pub assignments: Vec<(String, String)>,
    pub config: ExperimentConfig,
}

impl SweepPoint {
    /// `key=value` pairs joined with `,`.
    pub fn label(&self) -> String {
        self.assignments.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(",")
    }
}

/// Expand the product of `axes` (first axis outermost) over the config
/// text plus `overrides`; every point is validated up front.
pub fn expand(config_text: &str, overrides: &[String], axes: &[SweepAxis]) -> Result<Vec<SweepPoint>> {
    if axes.is_empty() {
        return Err(Error::Usage("a sweep needs at least one axis".into()));
    }
    let mut combos: Vec<Vec<(String, String)>> = vec![Vec::new()];
    for axis in axes {
        if axis.values.is_empty() {
            return Err(Error::Usage(format!("sweep axis `{}` has no values", axis.key)));
        }
        combos = combos
            .into_iter()
            .flat_map(|c| {
                axis.values.iter().map(move |v| {
                    let mut c = c.clone();
                    c.push((axis.key.clone(), v.clone()));
                    c
                })
            })
            .collect();
    }
    combos
        .into_iter()
        .enumerate()
        .map(|(index, assignments)| {
            let mut all = overrides.to_vec();
            all.extend(assignments.iter().map(|(k, v)| format!("{k}={v}")));
            let config = ExperimentConfig::load(config_text, &all)?;
            Ok(SweepPoint { index, assignments, config })
        })
        .collect()
}

/// Run every point on the rayon pool; results keep point order.
pub fn run_sweep<F>(points: &[SweepPoint], records_for: F) -> Vec<Result<StatsReport>>
where
    F: Fn(&ExperimentConfig) -> Result<Vec<TraceRecord>> + Sync,
{
    points
        .par_iter()
        .map(|p| {
            let records = records_for(&p.config)?;
            run_simulation(&p.config, &records)
        })
        .collect()
}

/// One row per point: index, label, each axis value, then the headline metrics.
pub fn merged_csv(axes: &[SweepAxis], points: &[SweepPoint], reports: &[StatsReport]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["point".to_string(), "label".to_string()];
    header.extend(axes.iter().map(|a| a.key.clone()));
    header.extend(HEADLINE_COLUMNS.iter().map(|s| s.to_string()));
    w.write_record(&header).expect("in-memory write");
    for (p, r) in points.iter().zip(reports) {
        let mut row = vec![p.index.to_string(), p.label()];
        row.extend(p.assignments.iter().map(|(_, v)| v.clone()));
        row.extend(headline(r));
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dram_cache::Layout;

    #[test]
    fn axis_parsing() {
        let a: SweepAxis = "ctc_l2_ways=1,2, 3,4".parse().unwrap();
        assert_eq!(a.key, "ctc_l2_ways");
        assert_eq!(a.values, ["1", "2", "3", "4"]);
        assert!("ctc_l2_ways".parse::<SweepAxis>().is_err());
        assert!("ctc_l2_ways=".parse::<SweepAxis>().is_err());
    }

    #[test]
    fn product_size_and_order() {
        let axes = vec!["layout=amil,tad".parse().unwrap(), "ctc_l2_ways=1,2,3,4".parse().unwrap()];
        let pts = expand("", &[], &axes).unwrap();
        assert_eq!(pts.len(), 8);
        assert_eq!(pts[0].config.layout, Layout::Amil);
        assert_eq!(pts[0].config.ctc_l2_ways, 1);
        assert_eq!(pts[5].config.layout, Layout::Tad);
        assert_eq!(pts[5].config.ctc_l2_ways, 2);
        assert_eq!(pts[5].label(), "layout=tad,ctc_l2_ways=2");
    }

    #[test]
    fn empty_and_invalid_axes_rejected() {
        assert!(expand("", &[], &[]).is_err());
        let bad = SweepAxis { key: "ctc_l2_ways".into(), values: vec![] };
        assert!(expand("", &[], &[bad]).is_err());
        let unknown: SweepAxis = "no_such_key=1".parse().unwrap();
        assert!(expand("", &[], &[unknown]).is_err());
        let out_of_range: SweepAxis = "ctc_l2_ways=9".parse().unwrap();
        assert!(expand("", &[], &[out_of_range]).is_err());
    }
}
