use crate::channel::ChannelParams;
use crate::error::{Error, Result};
use crate::linalg::{Mat3, Vec3};
use crate::scalar::Real;

/// Gradient of the mean RSS at each waypoint with respect to the emitter
/// position: `-(10 ple / ln 10) (s - u_j) / d_j^2`.
pub fn rss_partials<T: Real>(
    params: &ChannelParams<T>,
    waypoints: &[Vec3<T>],
    s: &Vec3<T>,
) -> Result<Vec<Vec3<T>>> {
    let k = -params.slope();
    waypoints
        .iter()
        .map(|u| {
            let diff = *s - *u;
            let d2 = diff.norm_squared();
            if !(d2 > T::zero()) {
                return Err(Error::SingularGeometry(
                    "FIM evaluated at a waypoint".to_owned(),
                ));
            }
            Ok(diff.scale(k / d2))
        })
        .collect()
}

/// Fisher information of one UAV's samples about the emitter position.
///
/// A zero noise variance is floored at machine epsilon so the matrix stays
/// finite; relative weights between equally noiseless UAVs are unaffected.
pub fn fim_single<T: Real>(
    params: &ChannelParams<T>,
    waypoints: &[Vec3<T>],
    s: &Vec3<T>,
) -> Result<Mat3<T>> {
    let var = params.noise_var.max(T::epsilon());
    let mut f = Mat3::zeros();
    for g in rss_partials(params, waypoints, s)? {
        for a in 0..3 {
            for b in a..3 {
                f.0[a][b] = f.0[a][b] + g.0[a] * g.0[b];
            }
        }
    }
    let inv_var = T::one() / var;
    for a in 0..3 {
        for b in a..3 {
            f.0[a][b] = f.0[a][b] * inv_var;
            f.0[b][a] = f.0[a][b];
        }
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn waypoint_straight_above() {
        let p = ChannelParams { p0: 30.0, d0: 1.0, ple: 3.0, noise_var: 6.0 };
        let f = fim_single(&p, &[Vec3::new(5.0, 5.0, 100.0)], &Vec3::new(5.0, 5.0, 0.0)).unwrap();
        let want = (30.0 / (std::f64::consts::LN_10 * 100.0)).powi(2) / 6.0;
        assert!((f.get(2, 2) - want).abs() < 1e-15);
        assert!((want - 2.829e-3).abs() < 5e-7);
        for (r, c) in [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2)] {
            assert_eq!(f.get(r, c), 0.0);
        }
    }

    #[test]
    fn symmetric_exactly() {
        let p = ChannelParams::<f64>::default();
        let wps = [Vec3::new(1.0, 2.0, 60.0), Vec3::new(-300.0, 40.0, 60.0), Vec3::new(77.0, -9.0, 61.5)];
        let f = fim_single(&p, &wps, &Vec3::new(13.0, -17.0, 0.0)).unwrap();
        assert_eq!(f, f.transpose());
        let ev = f.symmetric_eigenvalues();
        assert!(ev[0] >= -1e-10 * ev[2]);
    }

    #[test]
    fn coincident_point_rejected() {
        let p = ChannelParams::<f64>::default();
        let u = Vec3::new(1.0, 2.0, 3.0);
        assert!(matches!(fim_single(&p, &[u], &u), Err(Error::SingularGeometry(_))));
    }

    #[test]
    fn works_in_single_precision() {
        let p = ChannelParams::<f32>::default();
        let wps = [Vec3::new(100.0f32, 0.0, 60.0), Vec3::new(0.0, 200.0, 60.0)];
        let f32m = fim_single(&p, &wps, &Vec3::zeros()).unwrap();
        let f64m = fim_single(&ChannelParams::<f64>::default(), &[wps[0].cast(), wps[1].cast()], &Vec3::zeros()).unwrap();
        let diff = (f32m.cast::<f64>() - f64m).frobenius() / f64m.frobenius();
        assert!(diff < 1e-5);
    }
}
