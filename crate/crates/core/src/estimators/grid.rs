//! Exhaustive grid search used as the local solver of the one-shot schemes.

use serde::{Deserialize, Serialize};

use super::{fim_single, PositionEstimate, Source};
use crate::channel::{mean_rss_unchecked, MeasurementSet};
use crate::error::{contract, Result};
use crate::geometry::{distance, Aoi};
use crate::linalg::Vec3;
use crate::scalar::Real;

/// Grid of candidate emitter positions: `lo, lo + step, ...` up to `hi` on
/// every AOI axis with positive extent, and the single value `lo` on the
/// others.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct GridSpec<T> {
    pub aoi: Aoi<T>,
    pub step: T,
}

impl<T: Real> GridSpec<T> {
    pub fn new(aoi: Aoi<T>, step: T) -> Result<Self> {
        if !(step > T::zero()) || !step.is_finite() {
            return Err(contract("grid step must be positive"));
        }
        aoi.validate()?;
        Ok(Self { aoi, step })
    }

    /// Per-axis node coordinates.
    pub fn axis_nodes(&self) -> [Vec<T>; 3] {
        self.aoi.ranges().map(|r| {
            if r.is_degenerate() {
                return vec![r.lo];
            }
            // Slack absorbs rounding in width / step for exact multiples.
            let n = (r.width() / self.step + T::lit(1e-9)).floor().to_usize().unwrap_or(0);
            (0..=n)
                .map(|k| r.lo + self.step * T::from_usize_lossy(k))
                .collect()
        })
    }

    pub fn node_count(&self) -> usize {
        self.axis_nodes().iter().map(Vec::len).product()
    }
}

/// Minimizes `sum_j (P_j - f_j(s))^2` over the grid. Ties resolve to the
/// lexicographically smallest node (x, then y, then z), and nodes that
/// coincide with a waypoint are skipped. The returned estimate carries the
/// UAV's Fisher information at the chosen node.
pub fn grid_search_local<T: Real>(
    meas_i: &MeasurementSet<T>,
    aoi: &Aoi<T>,
    step: T,
) -> Result<PositionEstimate<T>> {
    let spec = GridSpec::new(*aoi, step)?;
    let [xs, ys, zs] = spec.axis_nodes();
    let params = meas_i.params();
    let mut best: Option<(T, Vec3<T>)> = None;
    for &x in &xs {
        for &y in &ys {
            'node: for &z in &zs {
                let s = Vec3::new(x, y, z);
                let mut cost = T::zero();
                for (u, p) in meas_i.waypoints().iter().zip(meas_i.rss()) {
                    let d = distance(u, &s);
                    if !(d > T::zero()) {
                        continue 'node;
                    }
                    cost = cost + (*p - mean_rss_unchecked(params, d)).powi(2);
                }
                if best.is_none_or(|(c, _)| cost < c) {
                    best = Some((cost, s));
                }
            }
        }
    }
    let (_, position) =
        best.ok_or_else(|| contract("grid has no node away from the waypoints"))?;
    let info = fim_single(params, meas_i.waypoints(), &position)?;
    Ok(PositionEstimate::new(position, Source::Local).with_info(info))
}
