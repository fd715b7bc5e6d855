//! CSV forms of measurement sets and cost reports.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelParams, MeasurementSet};
use crate::error::{Error, Result};
use crate::linalg::Vec3;
use crate::simnet::CostReport;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct MeasurementRow {
    uav_id: usize,
    sample_id: usize,
    x: f64,
    y: f64,
    z: f64,
    rss_db: f64,
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_owned(),
        source,
    }
}

/// Writes `uav_id,sample_id,x,y,z,rss_db`, one row per sample. Sample ids
/// are 1-based.
pub fn write_measurements_csv(meas: &[MeasurementSet<f64>], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    for m in meas {
        for (j, (u, p)) in m.waypoints().iter().zip(m.rss()).enumerate() {
            w.serialize(MeasurementRow {
                uav_id: m.uav_index(),
                sample_id: j + 1,
                x: u.x(),
                y: u.y(),
                z: u.z(),
                rss_db: *p,
            })
            .map_err(csv_err(path))?;
        }
    }
    w.flush().map_err(|e| Error::Io {
        path: path.to_owned(),
        source: e,
    })
}

/// Reads a measurement CSV; channel parameters are not part of the file and
/// are supplied per UAV id.
pub fn read_measurements_csv(
    path: &Path,
    params: impl Fn(usize) -> ChannelParams<f64>,
) -> Result<Vec<MeasurementSet<f64>>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let mut by_uav: BTreeMap<usize, Vec<MeasurementRow>> = BTreeMap::new();
    for row in r.deserialize() {
        let row: MeasurementRow = row.map_err(csv_err(path))?;
        by_uav.entry(row.uav_id).or_default().push(row);
    }
    by_uav
        .into_iter()
        .map(|(uav, mut rows)| {
            rows.sort_by_key(|r| r.sample_id);
            let waypoints = rows.iter().map(|r| Vec3::new(r.x, r.y, r.z)).collect();
            let rss = rows.iter().map(|r| r.rss_db).collect();
            MeasurementSet::new(uav, waypoints, rss, params(uav))
        })
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct CostRow {
    method: String,
    #[serde(rename = "N")]
    n: usize,
    rounds: usize,
    bits_total: u64,
    flops_total: u64,
}

/// Writes `method,N,rounds,bits_total,flops_total`.
pub fn write_cost_csv(reports: &[CostReport], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    for r in reports {
        w.serialize(CostRow {
            method: r.method.to_string(),
            n: r.n_uavs,
            rounds: r.rounds,
            bits_total: r.bits_total,
            flops_total: r.flops_total,
        })
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| Error::Io {
        path: path.to_owned(),
        source: e,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::sample_measurements;
    use crate::simnet::Method;
    use crate::test_support::random_scenario;

    #[test]
    fn measurement_csv_round_trip() {
        let sc = random_scenario(3, 4, 7);
        let meas = sample_measurements(&sc, 7).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("meas.csv");
        write_measurements_csv(&meas, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("uav_id,sample_id,x,y,z,rss_db\n"));
        let back = read_measurements_csv(&path, |i| sc.uavs[i].channel).unwrap();
        assert_eq!(back, meas);
    }

    #[test]
    fn cost_csv_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cost.csv");
        let report = CostReport {
            method: Method::Def,
            n_uavs: 5,
            rounds: 1,
            messages: 4,
            bits_total: 1536,
            flops_total: 1_296_000,
            per_round: vec![],
            fallback: false,
        };
        write_cost_csv(&[report], &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "method,N,rounds,bits_total,flops_total\ndef,5,1,1536,1296000\n");
    }
}
