//! Distributed Gauss-Newton baseline on the range least-squares objective.
//!
//! Each round the center broadcasts the iterate; every UAV linearizes its
//! range residuals `r_j = d~_j - ||u_j - s||` and returns the 3x3 normal
//! matrix `J^T J` and the vector `J^T r`. The center solves the summed,
//! damped normal equations and moves the iterate.

use serde::{Deserialize, Serialize};

use super::{PositionEstimate, Source};
use crate::channel::MeasurementSet;
use crate::error::{contract, Error, Result};
use crate::geometry::{distance, Aoi};
use crate::linalg::{Axes, Mat3, Vec3};
use crate::scalar::Real;

/// Default damping is this fraction of the mean diagonal of the normal matrix.
pub const DGN_DAMPING_SCALE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", default)]
pub struct DgnOptions<T> {
    pub tol: T,
    pub max_iter: usize,
    /// `None` selects `1e-6 * tr(sum A_i) / dim` each round.
    pub damping: Option<T>,
}

impl<T: Real> Default for DgnOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::one(),
            max_iter: 50,
            damping: None,
        }
    }
}

/// Normal matrix `A_i = J_i^T J_i` and vector `g_i = J_i^T r_i` of one UAV.
pub fn dgn_local_terms<T: Real>(
    meas_i: &MeasurementSet<T>,
    s: &Vec3<T>,
) -> Result<(Mat3<T>, Vec3<T>)> {
    let mut a = Mat3::zeros();
    let mut g = Vec3::zeros();
    for (u, d_tilde) in meas_i.waypoints().iter().zip(meas_i.ranges()) {
        let d = distance(u, s);
        if !(d > T::zero()) {
            return Err(Error::SingularGeometry(format!(
                "DGN linearized at a waypoint of UAV {}",
                meas_i.uav_index()
            )));
        }
        let row = (*s - *u).scale(T::one() / d);
        a += row.outer(&row);
        g += row.scale(*d_tilde - d);
    }
    Ok((a, g))
}

/// Solves `(A + damping I) delta = g` on the active axes.
pub fn dgn_solve<T: Real>(
    a: &Mat3<T>,
    g: &Vec3<T>,
    axes: Axes,
    damping: Option<T>,
) -> Result<Vec3<T>> {
    let block = axes.restrict(a);
    let lambda = damping.unwrap_or_else(|| {
        T::lit(DGN_DAMPING_SCALE) * block.trace() / T::from_usize_lossy(axes.count().max(1))
    });
    if lambda < T::zero() {
        return Err(contract("damping must be non-negative"));
    }
    let mut damped = block;
    for i in axes.indices() {
        damped.0[i][i] = damped.0[i][i] + lambda;
    }
    let inv = axes
        .restricted_inverse(&damped)
        .ok_or(Error::RankDeficientSolve)?;
    Ok(inv.mul_vec(&axes.project(g)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DgnOutcome<T: Real> {
    pub estimate: PositionEstimate<T>,
    pub iterations: usize,
    pub iterates: Vec<Vec3<T>>,
}

/// One center-side Gauss-Newton round given the per-UAV terms in UAV order.
/// Returns the projected new iterate and the length of the solved step.
pub fn dgn_round<T: Real>(
    s: &Vec3<T>,
    terms: &[(Mat3<T>, Vec3<T>)],
    aoi: &Aoi<T>,
    damping: Option<T>,
) -> Result<(Vec3<T>, T)> {
    let mut a = Mat3::zeros();
    let mut g = Vec3::zeros();
    for (ai, gi) in terms {
        a += *ai;
        g += *gi;
    }
    let delta = dgn_solve(&a, &g, aoi.axes(), damping)?;
    Ok((aoi.clamp(&(*s + delta)), delta.norm()))
}

pub fn run_dgn<T: Real>(
    meas: &[MeasurementSet<T>],
    aoi: &Aoi<T>,
    init: Vec3<T>,
    opts: &DgnOptions<T>,
) -> Result<DgnOutcome<T>> {
    if meas.is_empty() {
        return Err(contract("DGN needs at least one UAV"));
    }
    if !aoi.contains(&init) {
        return Err(contract("DGN initial point lies outside the AOI"));
    }
    let mut s = init;
    let mut iterates = vec![init];
    let mut iterations = 0;
    while iterations < opts.max_iter {
        let terms = meas
            .iter()
            .map(|m| dgn_local_terms(m, &s))
            .collect::<Result<Vec<_>>>()?;
        let (next, step) = dgn_round(&s, &terms, aoi, opts.damping)?;
        s = next;
        iterations += 1;
        iterates.push(s);
        if step <= opts.tol {
            break;
        }
    }
    Ok(DgnOutcome {
        estimate: PositionEstimate::new(s, Source::Dgn),
        iterations,
        iterates,
    })
}
