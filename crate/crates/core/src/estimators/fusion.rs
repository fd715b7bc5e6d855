//! One-shot fusion of local estimates at the center UAV.
//!
//! DEF weights each local estimate by a matrix, `W_i = (sum_k F_k)^-1 F_i`,
//! with every Fisher information evaluated at the corresponding local
//! estimate. DEM uses scalar weights proportional to `1 / tr(F_i^-1)`, and
//! the average rule weights everything equally. Fusion is performed on the
//! active axes of the AOI; an inactive coordinate is shared by every local
//! estimate and passes through as the plain mean.

use serde::{Deserialize, Serialize};

use super::{PositionEstimate, Source};
use crate::error::{contract, Error, Result};
use crate::linalg::{Axes, Mat3, Vec3};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct FusionWeights<T: Real> {
    pub matrices: Vec<Mat3<T>>,
}

impl<T: Real> FusionWeights<T> {
    pub fn sum(&self) -> Mat3<T> {
        self.matrices.iter().fold(Mat3::zeros(), |acc, w| acc + *w)
    }

    /// `sum_i W_i s_i`, accumulated in the given order.
    pub fn apply(&self, points: &[Vec3<T>]) -> Vec3<T> {
        self.matrices
            .iter()
            .zip(points)
            .fold(Vec3::zeros(), |acc, (w, p)| acc + w.mul_vec(p))
    }
}

fn infos<T: Real>(locals: &[PositionEstimate<T>]) -> Result<Vec<Mat3<T>>> {
    if locals.is_empty() {
        return Err(contract("fusion needs at least one local estimate"));
    }
    locals
        .iter()
        .enumerate()
        .map(|(i, l)| {
            l.info
                .ok_or_else(|| contract(format!("local estimate {i} carries no information matrix")))
        })
        .collect()
}

/// Matrix weights of the Fisher-information fusion rule.
pub fn def_weights<T: Real>(infos: &[Mat3<T>], axes: Axes) -> Result<FusionWeights<T>> {
    if infos.is_empty() {
        return Err(contract("fusion needs at least one information matrix"));
    }
    let total = infos.iter().fold(Mat3::zeros(), |acc, f| acc + axes.restrict(f));
    let total_inv = axes
        .restricted_inverse(&total)
        .ok_or(Error::RankDeficientFusion)?;
    let share = T::one() / T::from_usize_lossy(infos.len());
    let matrices = infos
        .iter()
        .map(|f| {
            let mut w = total_inv.mul_mat(&axes.restrict(f));
            for i in 0..3 {
                if !axes.is_active(i) {
                    w.0[i][i] = share;
                }
            }
            w
        })
        .collect();
    Ok(FusionWeights { matrices })
}

/// Fisher-information weighted fusion. The fused estimate carries the
/// summed information of the local estimates.
pub fn def_fuse<T: Real>(
    locals: &[PositionEstimate<T>],
    axes: Axes,
) -> Result<(PositionEstimate<T>, FusionWeights<T>)> {
    let infos = infos(locals)?;
    let weights = def_weights(&infos, axes)?;
    let points: Vec<_> = locals.iter().map(|l| l.position).collect();
    let total = infos.iter().fold(Mat3::zeros(), |acc, f| acc + *f);
    let est = PositionEstimate::new(weights.apply(&points), Source::Def).with_info(total);
    Ok((est, weights))
}

/// Unnormalized scalar weight `1 / tr(F_i^-1)` that an edge reports.
pub fn dem_raw_weight<T: Real>(info: &Mat3<T>, axes: Axes) -> Result<T> {
    let bound = axes
        .restricted_inverse(info)
        .ok_or(Error::RankDeficientFusion)?
        .trace();
    if !(bound > T::zero()) {
        return Err(Error::RankDeficientFusion);
    }
    Ok(T::one() / bound)
}

/// Scalar weights `w_i ∝ 1 / tr(F_i^-1)`, normalized to sum to one.
pub fn dem_weights<T: Real>(infos: &[Mat3<T>], axes: Axes) -> Result<Vec<T>> {
    if infos.is_empty() {
        return Err(contract("fusion needs at least one information matrix"));
    }
    let raw = infos
        .iter()
        .map(|f| dem_raw_weight(f, axes))
        .collect::<Result<Vec<_>>>()?;
    let norm: T = raw.iter().copied().sum();
    Ok(raw.into_iter().map(|w| w / norm).collect())
}

/// Combines points with unnormalized scalar weights.
pub fn dem_combine<T: Real>(points: &[Vec3<T>], raw_weights: &[T]) -> Result<(Vec3<T>, Vec<T>)> {
    if points.is_empty() || points.len() != raw_weights.len() {
        return Err(contract("one weight per local estimate is required"));
    }
    let norm: T = raw_weights.iter().copied().sum();
    let weights: Vec<T> = raw_weights.iter().map(|w| *w / norm).collect();
    let position = points
        .iter()
        .zip(&weights)
        .fold(Vec3::zeros(), |acc, (p, w)| acc + p.scale(*w));
    Ok((position, weights))
}

/// Trace-weighted scalar fusion.
pub fn dem_fuse<T: Real>(
    locals: &[PositionEstimate<T>],
    axes: Axes,
) -> Result<(PositionEstimate<T>, Vec<T>)> {
    let raw = infos(locals)?
        .iter()
        .map(|f| dem_raw_weight(f, axes))
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<_> = locals.iter().map(|l| l.position).collect();
    let (position, weights) = dem_combine(&points, &raw)?;
    Ok((PositionEstimate::new(position, Source::Dem), weights))
}

/// Unweighted mean of the local positions.
pub fn avg_fuse<T: Real>(locals: &[PositionEstimate<T>]) -> Result<PositionEstimate<T>> {
    let points: Vec<_> = locals.iter().map(|l| l.position).collect();
    let mean =
        Vec3::mean(&points).ok_or_else(|| contract("fusion needs at least one local estimate"))?;
    Ok(PositionEstimate::new(mean, Source::Avg))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn local(p: Vec3<f64>, f: Mat3<f64>) -> PositionEstimate<f64> {
        PositionEstimate::new(p, Source::Local).with_info(f)
    }

    fn spd(seed: f64) -> Mat3<f64> {
        let a = Mat3([[2.0 + seed, 0.3, -0.1], [0.3, 1.5, 0.2 * seed], [-0.1, 0.2 * seed, 1.0 + seed]]);
        a.mul_mat(&a.transpose())
    }

    fn close(a: &Mat3<f64>, b: &Mat3<f64>, tol: f64) -> bool {
        (*a - *b).max_abs() <= tol
    }

    #[test]
    fn def_single_source_is_identity() {
        let l = local(Vec3::new(1.0, 2.0, 3.0), spd(0.4));
        let (est, w) = def_fuse(&[l], Axes::ALL).unwrap();
        assert!(close(&w.matrices[0], &Mat3::identity(), 1e-12));
        assert!((est.position - l.position).max_abs() < 1e-12);
    }

    #[test]
    fn def_proportional_information() {
        let f2 = spd(0.7);
        let f1 = f2.scale(2.0);
        let w = def_weights(&[f1, f2], Axes::ALL).unwrap();
        assert!(close(&w.matrices[0], &Mat3::identity().scale(2.0 / 3.0), 1e-12));
        assert!(close(&w.matrices[1], &Mat3::identity().scale(1.0 / 3.0), 1e-12));
    }

    #[test]
    fn def_equal_information_is_mean() {
        let f = spd(1.1);
        let pts = [Vec3::new(0.0, 0.0, 0.0), Vec3::new(3.0, 6.0, 9.0), Vec3::new(-3.0, 3.0, 0.0)];
        let locals: Vec<_> = pts.iter().map(|p| local(*p, f)).collect();
        let (est, _) = def_fuse(&locals, Axes::ALL).unwrap();
        assert!((est.position - Vec3::new(0.0, 3.0, 3.0)).max_abs() < 1e-12);
    }

    #[test]
    fn def_weights_sum_to_identity_on_plane() {
        let axes = Axes([true, true, false]);
        let w = def_weights(&[spd(0.1), spd(0.9), spd(2.0)], axes).unwrap();
        assert!(close(&w.sum(), &Mat3::identity(), 1e-10));
    }

    #[test]
    fn def_singular_total() {
        let v = Vec3::new(1.0, 0.0, 0.0);
        let f = v.outer(&v);
        let err = def_weights(&[f, f.scale(3.0)], Axes::ALL).unwrap_err();
        assert!(matches!(err, Error::RankDeficientFusion));
    }

    #[test]
    fn def_requires_info() {
        let l = PositionEstimate::<f64>::new(Vec3::zeros(), Source::Local);
        assert!(matches!(def_fuse(&[l], Axes::ALL), Err(Error::Contract(_))));
    }

    #[test]
    fn dem_weight_examples() {
        assert_eq!(dem_weights(&[spd(0.3)], Axes::ALL).unwrap(), vec![1.0]);
        let f = spd(0.5);
        let w = dem_weights(&[f, f, f, f], Axes::ALL).unwrap();
        assert!(w.iter().all(|wi| (wi - 0.25).abs() < 1e-15));
        // tr C_1 = 1, tr C_2 = 3
        let f1 = Mat3::<f64>::diagonal(Vec3::splat(3.0));
        let f2 = Mat3::diagonal(Vec3::splat(1.0));
        let w = dem_weights(&[f1, f2], Axes::ALL).unwrap();
        assert!((w[0] - 0.75).abs() < 1e-15 && (w[1] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn dem_singular_local() {
        let v = Vec3::new(0.0, 1.0, 0.0);
        let err = dem_weights(&[spd(0.2), v.outer(&v)], Axes::ALL).unwrap_err();
        assert!(matches!(err, Error::RankDeficientFusion));
    }

    #[test]
    fn average_examples() {
        let a = PositionEstimate::new(Vec3::new(0.0, 0.0, 0.0), Source::Local);
        let b = PositionEstimate::new(Vec3::new(4.0, 0.0, 0.0), Source::Local);
        assert_eq!(avg_fuse(&[a]).unwrap().position, a.position);
        assert_eq!(avg_fuse(&[a, b]).unwrap().position, Vec3::new(2.0, 0.0, 0.0));
        assert_eq!(avg_fuse(&[b, a]).unwrap().position, avg_fuse(&[a, b]).unwrap().position);
        assert!(avg_fuse::<f64>(&[]).is_err());
    }
}
