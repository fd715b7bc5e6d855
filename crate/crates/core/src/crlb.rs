//! Total Fisher information and the Cramér-Rao bound on emitter position.
//!
//! Independent UAVs contribute additively: `F = sum_i F_i`. The bound on the
//! mean squared position error is `tr(F^-1)`, restricted to the axes the AOI
//! leaves unknown. For a full 3x3 matrix the trace of the inverse expands to
//! the sum of the principal 2x2 minors over the determinant, which
//! [`crlb_cofactor`] evaluates independently of the matrix inverse.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::fim_single;
use crate::linalg::{Axes, Mat3, Vec3, SINGULAR_RCOND};
use crate::scalar::Real;
use crate::scenario::Scenario;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct FimReport<T: Real> {
    pub per_uav: Vec<Mat3<T>>,
    pub total: Mat3<T>,
    /// `tr(F^-1)` on the AOI's active axes, `None` when unobservable.
    pub crlb_trace: Option<T>,
}

pub fn fim_total<T: Real>(scenario: &Scenario<T>, s: &Vec3<T>) -> Result<FimReport<T>> {
    let per_uav = scenario
        .uavs
        .iter()
        .map(|u| fim_single(&u.channel, &u.plan.positions(), s))
        .collect::<Result<Vec<_>>>()?;
    let total = per_uav.iter().fold(Mat3::zeros(), |acc, f| acc + *f);
    let crlb_trace = crlb_trace(&total, scenario.aoi.axes()).ok();
    Ok(FimReport {
        per_uav,
        total,
        crlb_trace,
    })
}

/// `tr(F^-1)` at `s` for the scenario, in m^2.
pub fn crlb<T: Real>(scenario: &Scenario<T>, s: &Vec3<T>) -> Result<T> {
    let report = fim_total(scenario, s)?;
    crlb_trace(&report.total, scenario.aoi.axes())
}

fn check_observable<T: Real>(f: &Mat3<T>, axes: Axes) -> Result<()> {
    let rcond = axes.reciprocal_condition(f).unwrap_or(T::zero());
    if !(rcond >= T::lit(SINGULAR_RCOND)) {
        return Err(Error::Unobservable {
            rcond: rcond.to_f64_lossy(),
        });
    }
    Ok(())
}

/// Trace of the inverse of the active block of `f`.
pub fn crlb_trace<T: Real>(f: &Mat3<T>, axes: Axes) -> Result<T> {
    check_observable(f, axes)?;
    axes.restricted_inverse(f)
        .map(|inv| inv.trace())
        .ok_or(Error::Unobservable { rcond: 0.0 })
}

/// Same quantity through cofactors: sum of principal 2x2 minors over the
/// determinant in 3-D, `(e_aa + e_bb) / det` in 2-D, `1 / e_aa` in 1-D.
pub fn crlb_cofactor<T: Real>(f: &Mat3<T>, axes: Axes) -> Result<T> {
    check_observable(f, axes)?;
    let e = |a: usize, b: usize| f.0[a][b];
    let idx: Vec<usize> = axes.indices().collect();
    let value = match idx.as_slice() {
        [a] => T::one() / e(*a, *a),
        [a, b] => (e(*a, *a) + e(*b, *b)) / (e(*a, *a) * e(*b, *b) - e(*a, *b) * e(*a, *b)),
        _ => {
            let minors = (0..3)
                .flat_map(|a| ((a + 1)..3).map(move |b| (a, b)))
                .map(|(a, b)| e(a, a) * e(b, b) - e(a, b) * e(a, b))
                .fold(T::zero(), |acc, m| acc + m);
            let det = e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(1, 2))
                - e(0, 1) * (e(0, 1) * e(2, 2) - e(0, 2) * e(1, 2))
                + e(0, 2) * (e(0, 1) * e(1, 2) - e(0, 2) * e(1, 1));
            minors / det
        }
    };
    Ok(value)
}
