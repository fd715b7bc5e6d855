//! Independent oracles and generators shared by the integration tests.
//! Nothing here calls into the estimator, FIM or CRLB code under test.

#![allow(dead_code)]

use droneloc::channel::{ChannelParams, MeasurementSet};
use droneloc::geometry::{Aoi, TrajectoryPlan};
use droneloc::scenario::{Scenario, UavConfig};
use droneloc::Vec3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type M3 = [[f64; 3]; 3];

/// `n` UAVs with `m` random waypoints each at 60 m over a 12 km ground AOI.
pub fn random_scenario(n: usize, m: usize, seed: u64) -> Scenario<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let uavs = (0..n)
        .map(|_| {
            let pts: Vec<_> = (0..m)
                .map(|_| Vec3::new(rng.random_range(0.0..12_000.0), rng.random_range(0.0..12_000.0), 60.0))
                .collect();
            UavConfig {
                plan: TrajectoryPlan::through_points(&pts, 30.0).unwrap(),
                channel: ChannelParams::default(),
            }
        })
        .collect();
    Scenario {
        aoi: Aoi::ground_square(12_000.0),
        emitter: Vec3::new(rng.random_range(0.0..12_000.0), rng.random_range(0.0..12_000.0), 0.0),
        uavs,
    }
}

pub fn with_noise_var(mut sc: Scenario<f64>, var: f64) -> Scenario<f64> {
    for u in &mut sc.uavs {
        u.channel.noise_var = var;
    }
    sc
}

pub fn random_point(rng: &mut impl Rng) -> Vec3<f64> {
    Vec3::new(rng.random_range(0.0..12_000.0), rng.random_range(0.0..12_000.0), 0.0)
}

fn dist(a: &Vec3<f64>, b: &Vec3<f64>) -> f64 {
    let d: [f64; 3] = std::array::from_fn(|i| a.0[i] - b.0[i]);
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

/// Range least-squares objective of one UAV, inverting the path loss here.
pub fn ls_objective(m: &MeasurementSet<f64>, s: &Vec3<f64>) -> f64 {
    let p = m.params();
    m.waypoints()
        .iter()
        .zip(m.rss())
        .map(|(u, rss)| {
            let d_tilde = p.d0 * 10f64.powf((p.p0 - rss) / (10.0 * p.ple));
            (d_tilde - dist(u, s)).powi(2)
        })
        .sum()
}

pub fn ls_objective_all(meas: &[MeasurementSet<f64>], s: &Vec3<f64>) -> f64 {
    meas.iter().map(|m| ls_objective(m, s)).sum()
}

/// Sum of squared RSS residuals of one UAV.
pub fn rss_cost(m: &MeasurementSet<f64>, s: &Vec3<f64>) -> f64 {
    let p = m.params();
    m.waypoints()
        .iter()
        .zip(m.rss())
        .map(|(u, rss)| (rss - (p.p0 - 10.0 * p.ple * (dist(u, s) / p.d0).log10())).powi(2))
        .sum()
}

/// Central differences with the cube-root-epsilon step, scaled by the
/// magnitude of the whole point so a zero coordinate keeps a usable step.
pub fn fd_gradient(f: impl Fn(&Vec3<f64>) -> f64, s: &Vec3<f64>) -> Vec3<f64> {
    let mut g = Vec3::zeros();
    let h = f64::EPSILON.cbrt() * s.max_abs().max(1.0);
    for a in 0..3 {
        let mut hi = *s;
        let mut lo = *s;
        hi.0[a] += h;
        lo.0[a] -= h;
        g.0[a] = (f(&hi) - f(&lo)) / (2.0 * h);
    }
    g
}

/// Second-difference Hessian with step `h`.
pub fn fd_hessian(f: impl Fn(&Vec3<f64>) -> f64, s: &Vec3<f64>, h: f64) -> M3 {
    let at = |da: usize, sa: f64, db: usize, sb: f64| {
        let mut p = *s;
        p.0[da] += sa * h;
        p.0[db] += sb * h;
        f(&p)
    };
    let mut out = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            out[a][b] = (at(a, 1.0, b, 1.0) - at(a, 1.0, b, -1.0) - at(a, -1.0, b, 1.0)
                + at(a, -1.0, b, -1.0))
                / (4.0 * h * h);
        }
    }
    out
}

/// `G^T G / sigma^2` with the rows of G written out from the path-loss
/// derivative `-(10 ple / ln 10) (s - u) / |s - u|^2`.
pub fn outer_product_fim(p: &ChannelParams<f64>, waypoints: &[Vec3<f64>], s: &Vec3<f64>) -> M3 {
    let c = 10.0 * p.ple / std::f64::consts::LN_10;
    let rows: Vec<[f64; 3]> = waypoints
        .iter()
        .map(|u| {
            let d2 = dist(u, s).powi(2);
            std::array::from_fn(|a| -c * (s.0[a] - u.0[a]) / d2)
        })
        .collect();
    let mut f = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            f[a][b] = rows.iter().map(|g| g[a] * g[b]).sum::<f64>() / p.noise_var;
        }
    }
    f
}

/// Monte Carlo estimate of `-E[Hessian of the log-likelihood]` at the true
/// emitter from fresh Gaussian draws around the noiseless RSS.
pub fn mc_fim(
    p: &ChannelParams<f64>,
    waypoints: &[Vec3<f64>],
    s: &Vec3<f64>,
    draws: usize,
    seed: u64,
    loglik: impl Fn(&MeasurementSet<f64>, &Vec3<f64>) -> f64,
) -> M3 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = rand_distr::Normal::new(0.0, p.noise_var.sqrt()).unwrap();
    let clean: Vec<f64> = waypoints
        .iter()
        .map(|u| p.p0 - 10.0 * p.ple * (dist(u, s) / p.d0).log10())
        .collect();
    let h = 1e-3 * waypoints.iter().map(|u| dist(u, s)).fold(f64::INFINITY, f64::min);
    let mut acc = [[0.0; 3]; 3];
    for _ in 0..draws {
        let rss: Vec<f64> = clean.iter().map(|c| c + rng.sample(normal)).collect();
        let m = MeasurementSet::new(0, waypoints.to_vec(), rss, *p).unwrap();
        let hess = fd_hessian(|x| loglik(&m, x), s, h);
        for a in 0..3 {
            for b in 0..3 {
                acc[a][b] -= hess[a][b] / draws as f64;
            }
        }
    }
    acc
}

pub fn frobenius(m: &M3) -> f64 {
    m.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn frobenius_rel(got: &M3, want: &M3) -> f64 {
    let diff: M3 = std::array::from_fn(|r| std::array::from_fn(|c| got[r][c] - want[r][c]));
    frobenius(&diff) / frobenius(want)
}

/// Random SPD matrix of dimension `dim` embedded in 3x3: `B B^T + 0.05 I`.
pub fn random_spd(rng: &mut impl Rng, dim: usize, scale: f64) -> M3 {
    let b: M3 = std::array::from_fn(|_| std::array::from_fn(|_| rng.random_range(-1.0..1.0)));
    let mut out = [[0.0; 3]; 3];
    for r in 0..dim {
        for c in 0..dim {
            out[r][c] = scale * ((0..dim).map(|k| b[r][k] * b[c][k]).sum::<f64>() + if r == c { 0.05 } else { 0.0 });
        }
    }
    out
}

/// Gauss-Jordan inverse of the leading `dim` x `dim` block with partial
/// pivoting.
pub fn inverse(m: &M3, dim: usize) -> M3 {
    let mut a: Vec<Vec<f64>> = (0..dim)
        .map(|r| {
            let mut row: Vec<f64> = m[r][..dim].to_vec();
            row.extend((0..dim).map(|c| if c == r { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    for col in 0..dim {
        let piv = (col..dim)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap();
        a.swap(col, piv);
        let d = a[col][col];
        for v in a[col].iter_mut() {
            *v /= d;
        }
        for r in 0..dim {
            if r != col {
                let f = a[r][col];
                let pivot_row = a[col].clone();
                for (v, pv) in a[r].iter_mut().zip(pivot_row) {
                    *v -= f * pv;
                }
            }
        }
    }
    let mut out = [[0.0; 3]; 3];
    for r in 0..dim {
        for c in 0..dim {
            out[r][c] = a[r][dim + c];
        }
    }
    out
}

pub fn trace(m: &M3, dim: usize) -> f64 {
    (0..dim).map(|i| m[i][i]).sum()
}

/// Exhaustive search over `lo + i step` nodes of the ground AOI minimizing
/// the squared RSS residual; first minimum in x-major order wins.
pub fn brute_grid(m: &MeasurementSet<f64>, side: f64, step: f64) -> Vec3<f64> {
    let n = (side / step).round() as usize;
    let mut best = (f64::INFINITY, Vec3::zeros());
    for i in 0..=n {
        for j in 0..=n {
            let s = Vec3::new(i as f64 * step, j as f64 * step, 0.0);
            if m.waypoints().iter().any(|u| dist(u, &s) == 0.0) {
                continue;
            }
            let c = rss_cost(m, &s);
            if c < best.0 {
                best = (c, s);
            }
        }
    }
    best.1
}

pub fn percentile(sorted: &[usize], q: f64) -> usize {
    let idx = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len()) - 1;
    sorted[idx]
}
