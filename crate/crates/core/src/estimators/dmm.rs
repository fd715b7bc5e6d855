//! Distributed majorize-minimization on the range least-squares objective.
//!
//! The Hessian of the objective is bounded above by `2K I` (K = total
//! samples), so the quadratic surrogate with that curvature majorizes the
//! objective and its minimizer is a gradient step of size `1 / (2K)`. Split
//! across UAVs, each one takes the step `s_c - N / (2K) b_i` from the
//! broadcast iterate and the center averages the results.

use serde::{Deserialize, Serialize};

use super::{PositionEstimate, Source};
use crate::channel::{ls_objective, total_samples, MeasurementSet};
use crate::error::{contract, Result};
use crate::geometry::Aoi;
use crate::linalg::Vec3;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", default)]
pub struct DmmOptions<T> {
    /// Stop once an update moves the iterate by at most this many meters.
    pub tol: T,
    pub max_iter: usize,
}

impl<T: Real> Default for DmmOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::one(),
            max_iter: 50,
        }
    }
}

/// Local update of UAV `i` from the broadcast iterate `s_c`.
pub fn dmm_local_update<T: Real>(
    s_c: &Vec3<T>,
    meas_i: &MeasurementSet<T>,
    n_uavs: usize,
    total_samples: usize,
) -> Result<Vec3<T>> {
    if n_uavs == 0 || total_samples == 0 {
        return Err(contract("DMM needs at least one UAV and one sample"));
    }
    let b = meas_i.ls_gradient(s_c)?;
    let step = T::from_usize_lossy(n_uavs) / (T::lit(2.0) * T::from_usize_lossy(total_samples));
    Ok(*s_c - b.scale(step))
}

/// Quadratic majorizer of the objective around `s_k` with curvature
/// `2K I`: `Q(s_k) + b^T (s - s_k) + K |s - s_k|^2`, `b` the full gradient.
pub fn mm_surrogate<T: Real>(
    meas: &[MeasurementSet<T>],
    s: &Vec3<T>,
    s_k: &Vec3<T>,
) -> Result<T> {
    let mut b = Vec3::zeros();
    for m in meas {
        b += m.ls_gradient(s_k)?;
    }
    let delta = *s - *s_k;
    let k = T::from_usize_lossy(total_samples(meas));
    Ok(ls_objective(meas, s_k) + b.dot(&delta) + k * delta.norm_squared())
}

/// Center fusion: mean of the local iterates, in the order given.
pub fn dmm_fuse<T: Real>(locals: &[Vec3<T>]) -> Result<Vec3<T>> {
    Vec3::mean(locals).ok_or_else(|| contract("DMM fusion needs at least one local iterate"))
}

/// Iteration state held by the center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct DmmState<T: Real> {
    pub iterate: Vec3<T>,
    pub iteration: usize,
    /// Objective at every iterate, starting with the initial point.
    pub history: Vec<T>,
}

impl<T: Real> DmmState<T> {
    pub fn new(meas: &[MeasurementSet<T>], aoi: &Aoi<T>, init: Vec3<T>) -> Result<Self> {
        if meas.is_empty() {
            return Err(contract("DMM needs at least one UAV"));
        }
        if !aoi.contains(&init) {
            return Err(contract("DMM initial point lies outside the AOI"));
        }
        Ok(Self {
            iterate: init,
            iteration: 0,
            history: vec![ls_objective(meas, &init)],
        })
    }

    /// Fuses the local iterates (ordered by UAV index), projects onto the
    /// AOI and records the new objective. Returns the step length.
    pub fn advance(
        &mut self,
        meas: &[MeasurementSet<T>],
        aoi: &Aoi<T>,
        locals: &[Vec3<T>],
    ) -> Result<T> {
        let next = aoi.clamp(&dmm_fuse(locals)?);
        let step = (next - self.iterate).norm();
        self.iterate = next;
        self.iteration += 1;
        self.history.push(ls_objective(meas, &next));
        Ok(step)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DmmOutcome<T: Real> {
    pub estimate: PositionEstimate<T>,
    pub iterations: usize,
    pub history: Vec<T>,
    /// Iterates `s^0, s^1, ...`.
    pub iterates: Vec<Vec3<T>>,
}

pub fn run_dmm<T: Real>(
    meas: &[MeasurementSet<T>],
    aoi: &Aoi<T>,
    init: Vec3<T>,
    opts: &DmmOptions<T>,
) -> Result<DmmOutcome<T>> {
    let n = meas.len();
    let k = total_samples(meas);
    let mut state = DmmState::new(meas, aoi, init)?;
    let mut iterates = vec![init];
    while state.iteration < opts.max_iter {
        let locals = meas
            .iter()
            .map(|m| dmm_local_update(&state.iterate, m, n, k))
            .collect::<Result<Vec<_>>>()?;
        let step = state.advance(meas, aoi, &locals)?;
        iterates.push(state.iterate);
        if step <= opts.tol {
            break;
        }
    }
    Ok(DmmOutcome {
        estimate: PositionEstimate::new(state.iterate, Source::Dmm),
        iterations: state.iteration,
        history: state.history,
        iterates,
    })
}
