//! Log-distance path-loss model, measurement synthesis and the objectives
//! built on top of it.
//!
//! Mean received power at distance `d` is `P0 - 10 * ple * log10(d / d0)`
//! (dB). Shadowing is additive Gaussian noise in the dB domain with a per-UAV
//! variance `noise_var`.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::geometry::distance;
use crate::linalg::Vec3;
use crate::scalar::Real;
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", default)]
pub struct ChannelParams<T> {
    /// Reference power at `d0`, dB.
    pub p0: T,
    /// Reference distance, meters.
    pub d0: T,
    /// Path-loss exponent.
    pub ple: T,
    /// Shadowing variance, dB^2.
    pub noise_var: T,
}

impl<T: Real> Default for ChannelParams<T> {
    fn default() -> Self {
        Self {
            p0: T::lit(30.0),
            d0: T::one(),
            ple: T::lit(3.0),
            noise_var: T::lit(6.0),
        }
    }
}

impl<T: Real> ChannelParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.d0 > T::zero()) {
            return Err(contract("reference distance d0 must be positive"));
        }
        if !(self.ple > T::zero()) {
            return Err(contract("path-loss exponent must be positive"));
        }
        if !(self.noise_var >= T::zero()) || !self.p0.is_finite() {
            return Err(contract("noise variance must be non-negative and P0 finite"));
        }
        Ok(())
    }

    /// `10 * ple / ln 10`: magnitude factor of the RSS derivative w.r.t.
    /// position.
    pub fn slope(&self) -> T {
        T::lit(10.0) * self.ple / T::LN_10()
    }
}

/// Noiseless mean RSS at distance `d`.
pub fn mean_rss<T: Real>(params: &ChannelParams<T>, d: T) -> Result<T> {
    if !(d > T::zero()) {
        return Err(Error::SingularGeometry(format!(
            "RSS undefined at distance {d}"
        )));
    }
    Ok(mean_rss_unchecked(params, d))
}

#[inline]
pub(crate) fn mean_rss_unchecked<T: Real>(params: &ChannelParams<T>, d: T) -> T {
    params.p0 - T::lit(10.0) * params.ple * (d / params.d0).log10()
}

/// Distance whose noiseless mean RSS equals `rss`.
pub fn invert_rss<T: Real>(params: &ChannelParams<T>, rss: T) -> T {
    T::lit(10.0).powf((params.p0 - rss) / (T::lit(10.0) * params.ple)) * params.d0
}

/// RSS samples collected by one UAV along its trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", try_from = "RawMeasurementSet<T>", into = "RawMeasurementSet<T>")]
pub struct MeasurementSet<T: Real> {
    uav_index: usize,
    waypoints: Vec<Vec3<T>>,
    rss: Vec<T>,
    params: ChannelParams<T>,
    // Inverted ranges, cached because every LS routine needs them.
    ranges: Vec<T>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct RawMeasurementSet<T: Real> {
    uav_index: usize,
    waypoints: Vec<Vec3<T>>,
    rss: Vec<T>,
    params: ChannelParams<T>,
}

impl<T: Real> TryFrom<RawMeasurementSet<T>> for MeasurementSet<T> {
    type Error = Error;

    fn try_from(raw: RawMeasurementSet<T>) -> Result<Self> {
        Self::new(raw.uav_index, raw.waypoints, raw.rss, raw.params)
    }
}

impl<T: Real> From<MeasurementSet<T>> for RawMeasurementSet<T> {
    fn from(m: MeasurementSet<T>) -> Self {
        Self {
            uav_index: m.uav_index,
            waypoints: m.waypoints,
            rss: m.rss,
            params: m.params,
        }
    }
}

impl<T: Real> MeasurementSet<T> {
    pub fn new(
        uav_index: usize,
        waypoints: Vec<Vec3<T>>,
        rss: Vec<T>,
        params: ChannelParams<T>,
    ) -> Result<Self> {
        if waypoints.len() != rss.len() {
            return Err(contract(format!(
                "UAV {uav_index}: {} waypoints but {} RSS samples",
                waypoints.len(),
                rss.len()
            )));
        }
        if waypoints.is_empty() {
            return Err(contract(format!("UAV {uav_index}: no samples")));
        }
        params.validate()?;
        let ranges = rss.iter().map(|p| invert_rss(&params, *p)).collect();
        Ok(Self {
            uav_index,
            waypoints,
            rss,
            params,
            ranges,
        })
    }

    pub fn uav_index(&self) -> usize {
        self.uav_index
    }

    pub fn waypoints(&self) -> &[Vec3<T>] {
        &self.waypoints
    }

    pub fn rss(&self) -> &[T] {
        &self.rss
    }

    pub fn params(&self) -> &ChannelParams<T> {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.rss.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rss.is_empty()
    }

    /// Range estimates `d~_j` obtained by inverting the path-loss model.
    pub fn ranges(&self) -> &[T] {
        &self.ranges
    }

    /// Per-UAV least-squares term `sum_j (d~_j - ||u_j - s||)^2`.
    pub fn ls_objective(&self, s: &Vec3<T>) -> T {
        self.waypoints
            .iter()
            .zip(&self.ranges)
            .map(|(u, d)| (*d - distance(u, s)).powi(2))
            .sum()
    }

    /// Gradient `b_i` of the per-UAV least-squares term.
    pub fn ls_gradient(&self, s: &Vec3<T>) -> Result<Vec3<T>> {
        let two = T::lit(2.0);
        let mut g = Vec3::zeros();
        for (u, d_tilde) in self.waypoints.iter().zip(&self.ranges) {
            let diff = *s - *u;
            let d = diff.norm();
            if !(d > T::zero()) {
                return Err(singular(self.uav_index));
            }
            g += diff.scale(two * (d - *d_tilde) / d);
        }
        Ok(g)
    }

    /// `sum_j (P_j - f_j(s))^2`; the local ML criterion under equal variances.
    pub fn rss_residual(&self, s: &Vec3<T>) -> Result<T> {
        let mut acc = T::zero();
        for (u, p) in self.waypoints.iter().zip(&self.rss) {
            let d = distance(u, s);
            if !(d > T::zero()) {
                return Err(singular(self.uav_index));
            }
            acc = acc + (*p - mean_rss_unchecked(&self.params, d)).powi(2);
        }
        Ok(acc)
    }

    /// Gaussian log-density of this UAV's samples at emitter position `s`.
    pub fn log_likelihood(&self, s: &Vec3<T>) -> Result<T> {
        let residual = self.rss_residual(s)?;
        let var = self.params.noise_var;
        let m = T::from_usize_lossy(self.len());
        let half = T::lit(0.5);
        if var == T::zero() {
            return if residual == T::zero() {
                Ok(T::infinity())
            } else {
                Err(Error::DegenerateLikelihood { uav: self.uav_index })
            };
        }
        Ok(-m * half * (T::TAU() * var).ln() - half * residual / var)
    }

    pub fn cast<U: Real>(&self) -> MeasurementSet<U> {
        let p = &self.params;
        MeasurementSet::new(
            self.uav_index,
            self.waypoints.iter().map(Vec3::cast).collect(),
            self.rss.iter().map(|v| U::lit(v.to_f64_lossy())).collect(),
            ChannelParams {
                p0: U::lit(p.p0.to_f64_lossy()),
                d0: U::lit(p.d0.to_f64_lossy()),
                ple: U::lit(p.ple.to_f64_lossy()),
                noise_var: U::lit(p.noise_var.to_f64_lossy()),
            },
        )
        .expect("casting preserves validity")
    }
}

fn singular(uav: usize) -> Error {
    Error::SingularGeometry(format!("evaluation point coincides with a waypoint of UAV {uav}"))
}

/// Total samples `K = sum_i M_i`.
pub fn total_samples<T: Real>(meas: &[MeasurementSet<T>]) -> usize {
    meas.iter().map(MeasurementSet::len).sum()
}

/// Joint least-squares objective over all UAVs.
pub fn ls_objective<T: Real>(meas: &[MeasurementSet<T>], s: &Vec3<T>) -> T {
    meas.iter().map(|m| m.ls_objective(s)).sum()
}

pub fn ls_gradient<T: Real>(meas_i: &MeasurementSet<T>, s: &Vec3<T>) -> Result<Vec3<T>> {
    meas_i.ls_gradient(s)
}

/// Joint log-likelihood; independent UAVs, so per-UAV terms add.
pub fn log_likelihood<T: Real>(meas: &[MeasurementSet<T>], s: &Vec3<T>) -> Result<T> {
    meas.iter().map(|m| m.log_likelihood(s)).sum()
}

/// Draws one measurement set per UAV from a seed.
pub fn sample_measurements<T: Real>(
    scenario: &Scenario<T>,
    seed: u64,
) -> Result<Vec<MeasurementSet<T>>> {
    sample_measurements_with(scenario, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Draws one measurement set per UAV from a caller-owned RNG stream.
pub fn sample_measurements_with<T: Real, R: Rng + ?Sized>(
    scenario: &Scenario<T>,
    rng: &mut R,
) -> Result<Vec<MeasurementSet<T>>> {
    let emitter = scenario.emitter;
    scenario
        .uavs
        .iter()
        .enumerate()
        .map(|(i, uav)| {
            let params = uav.channel;
            params.validate()?;
            let std = params.noise_var.to_f64_lossy().sqrt();
            let noise = Normal::new(0.0, std).map_err(|e| contract(e.to_string()))?;
            let waypoints = uav.plan.positions();
            let mut rss = Vec::with_capacity(waypoints.len());
            for u in &waypoints {
                let mean = mean_rss(&params, distance(u, &emitter)).map_err(|_| {
                    Error::SingularGeometry(format!("emitter coincides with a waypoint of UAV {i}"))
                })?;
                let eta = if std > 0.0 { noise.sample(rng) } else { 0.0 };
                rss.push(mean + T::lit(eta));
            }
            MeasurementSet::new(i, waypoints, rss, params)
        })
        .collect()
}
