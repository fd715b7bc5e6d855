//! Trajectories, waypoints and the area of interest.
//!
//! A trajectory is piecewise constant in velocity; RSS samples are taken at
//! the leg boundaries, so sample `j` (1-based) sits at the initial position
//! plus the displacement of the first `j - 1` legs.

use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::linalg::{Axes, Vec3};
use crate::scalar::Real;

/// One constant-velocity segment between two consecutive samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Leg<T> {
    /// m/s
    pub velocity: Vec3<T>,
    /// seconds, strictly positive
    pub duration: T,
}

impl<T: Real> Leg<T> {
    pub fn displacement(&self) -> Vec3<T> {
        self.velocity.scale(self.duration)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", try_from = "RawPlan<T>", into = "RawPlan<T>")]
pub struct TrajectoryPlan<T: Real> {
    initial_position: Vec3<T>,
    legs: Vec<Leg<T>>,
}

// Wire form of a plan; `sample_count` is redundant with `legs` and is checked.
#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct RawPlan<T: Real> {
    initial_position: Vec3<T>,
    legs: Vec<Leg<T>>,
    sample_count: usize,
}

impl<T: Real> TryFrom<RawPlan<T>> for TrajectoryPlan<T> {
    type Error = crate::error::Error;

    fn try_from(raw: RawPlan<T>) -> Result<Self> {
        if raw.sample_count == 0 || raw.legs.len() + 1 != raw.sample_count {
            return Err(contract(format!(
                "trajectory with {} legs cannot have sample_count {}",
                raw.legs.len(),
                raw.sample_count
            )));
        }
        Self::new(raw.initial_position, raw.legs)
    }
}

impl<T: Real> From<TrajectoryPlan<T>> for RawPlan<T> {
    fn from(p: TrajectoryPlan<T>) -> Self {
        let sample_count = p.sample_count();
        RawPlan {
            initial_position: p.initial_position,
            legs: p.legs,
            sample_count,
        }
    }
}

impl<T: Real> TrajectoryPlan<T> {
    /// Builds a plan with `legs.len() + 1` samples. Every duration must be
    /// strictly positive and every value finite.
    pub fn new(initial_position: Vec3<T>, legs: Vec<Leg<T>>) -> Result<Self> {
        if !initial_position.is_finite() {
            return Err(contract("initial position must be finite"));
        }
        for (k, leg) in legs.iter().enumerate() {
            if !(leg.duration > T::zero()) || !leg.duration.is_finite() {
                return Err(contract(format!("leg {} has non-positive duration", k + 1)));
            }
            if !leg.velocity.is_finite() {
                return Err(contract(format!("leg {} has non-finite velocity", k + 1)));
            }
        }
        Ok(Self {
            initial_position,
            legs,
        })
    }

    /// A plan that visits the given points in order, one sample per point,
    /// flying each leg at constant `speed`.
    pub fn through_points(points: &[Vec3<T>], speed: T) -> Result<Self> {
        let (first, rest) = points
            .split_first()
            .ok_or_else(|| contract("a trajectory needs at least one point"))?;
        if !(speed > T::zero()) {
            return Err(contract("speed must be positive"));
        }
        let mut legs = Vec::with_capacity(rest.len());
        let mut prev = *first;
        for p in rest {
            let delta = *p - prev;
            let len = delta.norm();
            if !(len > T::zero()) {
                return Err(contract("consecutive trajectory points coincide"));
            }
            let duration = len / speed;
            legs.push(Leg {
                velocity: delta.scale(T::one() / duration),
                duration,
            });
            prev = *p;
        }
        Self::new(*first, legs)
    }

    /// Straight line from `start` along `direction` with `samples` evenly
    /// spaced samples `spacing` meters apart.
    pub fn straight_line(
        start: Vec3<T>,
        direction: Vec3<T>,
        spacing: T,
        samples: usize,
        speed: T,
    ) -> Result<Self> {
        let len = direction.norm();
        if !(len > T::zero()) {
            return Err(contract("direction must be nonzero"));
        }
        let unit = direction.scale(T::one() / len);
        let points: Vec<_> = (0..samples)
            .map(|j| start + unit.scale(spacing * T::from_usize_lossy(j)))
            .collect();
        Self::through_points(&points, speed)
    }

    /// Two parallel passes joined by a lateral step: `ceil(samples / 2)`
    /// samples along `direction` covering `pass_length`, a step of
    /// `lateral_offset` along `lateral`, then the remaining samples flown
    /// back in the opposite direction.
    pub fn rectangular_sweep(
        start: Vec3<T>,
        direction: Vec3<T>,
        lateral: Vec3<T>,
        pass_length: T,
        lateral_offset: T,
        samples: usize,
        speed: T,
    ) -> Result<Self> {
        let (dl, ll) = (direction.norm(), lateral.norm());
        if !(dl > T::zero()) || !(ll > T::zero()) {
            return Err(contract("sweep directions must be nonzero"));
        }
        let along = direction.scale(T::one() / dl);
        let across = lateral.scale(T::one() / ll).scale(lateral_offset);
        let first = samples.div_ceil(2);
        let second = samples - first;
        let spacing = pass_length / T::from_usize_lossy(first.saturating_sub(1).max(1));
        let mut points = Vec::with_capacity(samples);
        for j in 0..first {
            points.push(start + along.scale(spacing * T::from_usize_lossy(j)));
        }
        for j in 0..second {
            let back = first - 1 - j.min(first - 1);
            points.push(start + across + along.scale(spacing * T::from_usize_lossy(back)));
        }
        Self::through_points(&points, speed)
    }

    pub fn initial_position(&self) -> Vec3<T> {
        self.initial_position
    }

    pub fn legs(&self) -> &[Leg<T>] {
        &self.legs
    }

    /// Number of RSS samples `M_i`.
    pub fn sample_count(&self) -> usize {
        self.legs.len() + 1
    }

    /// Position of sample `j`, 1-based.
    pub fn waypoint(&self, j: usize) -> Result<Vec3<T>> {
        if j == 0 || j > self.sample_count() {
            return Err(contract(format!(
                "sample index {j} outside 1..={}",
                self.sample_count()
            )));
        }
        Ok(self.legs[..j - 1]
            .iter()
            .fold(self.initial_position, |p, leg| p + leg.displacement()))
    }

    /// All sample positions in order.
    pub fn positions(&self) -> Vec<Vec3<T>> {
        let mut out = Vec::with_capacity(self.sample_count());
        let mut p = self.initial_position;
        out.push(p);
        for leg in &self.legs {
            p += leg.displacement();
            out.push(p);
        }
        out
    }

    /// All waypoints tagged with the owning UAV.
    pub fn waypoints(&self, uav_index: usize) -> Vec<Waypoint<T>> {
        self.positions()
            .into_iter()
            .enumerate()
            .map(|(j, position)| Waypoint {
                position,
                uav_index,
                sample_index: j + 1,
            })
            .collect()
    }

    /// The same plan shifted rigidly by `offset`.
    pub fn translated(&self, offset: Vec3<T>) -> Self {
        Self {
            initial_position: self.initial_position + offset,
            legs: self.legs.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Waypoint<T> {
    pub position: Vec3<T>,
    pub uav_index: usize,
    /// 1-based.
    pub sample_index: usize,
}

/// Euclidean distance between two points.
pub fn distance<T: Real>(p: &Vec3<T>, s: &Vec3<T>) -> T {
    (*p - *s).norm()
}

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Interval<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Real> Interval<T> {
    pub fn new(lo: T, hi: T) -> Self {
        Self { lo, hi }
    }

    pub fn point(v: T) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn is_degenerate(&self) -> bool {
        !(self.hi > self.lo)
    }

    pub fn width(&self) -> T {
        self.hi - self.lo
    }

    pub fn clamp(&self, v: T) -> T {
        v.max(self.lo).min(self.hi)
    }

    pub fn contains(&self, v: T) -> bool {
        v >= self.lo && v <= self.hi
    }

    pub fn midpoint(&self) -> T {
        (self.lo + self.hi) * T::lit(0.5)
    }
}

/// Axis-aligned area of interest known to contain the emitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Aoi<T> {
    pub x_range: Interval<T>,
    pub y_range: Interval<T>,
    pub z_range: Interval<T>,
}

impl<T: Real> Aoi<T> {
    pub fn new(x_range: Interval<T>, y_range: Interval<T>, z_range: Interval<T>) -> Result<Self> {
        let aoi = Self {
            x_range,
            y_range,
            z_range,
        };
        aoi.validate()?;
        Ok(aoi)
    }

    /// Square of side `side` on the ground plane, with the emitter altitude
    /// fixed at zero.
    pub fn ground_square(side: T) -> Self {
        Self {
            x_range: Interval::new(T::zero(), side),
            y_range: Interval::new(T::zero(), side),
            z_range: Interval::point(T::zero()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (r, name) in self.ranges().iter().zip(["x", "y", "z"]) {
            if !(r.lo.is_finite() && r.hi.is_finite()) || r.hi < r.lo {
                return Err(contract(format!("AOI {name}_range is not a valid interval")));
            }
        }
        if self.axes().count() == 0 {
            return Err(contract("AOI must be non-degenerate in at least one axis"));
        }
        Ok(())
    }

    pub fn ranges(&self) -> [Interval<T>; 3] {
        [self.x_range, self.y_range, self.z_range]
    }

    /// Axes along which the AOI has positive extent.
    pub fn axes(&self) -> Axes {
        Axes(self.ranges().map(|r| !r.is_degenerate()))
    }

    pub fn clamp(&self, p: &Vec3<T>) -> Vec3<T> {
        let r = self.ranges();
        Vec3(std::array::from_fn(|i| r[i].clamp(p.0[i])))
    }

    pub fn contains(&self, p: &Vec3<T>) -> bool {
        self.ranges().iter().zip(p.0).all(|(r, v)| r.contains(v))
    }

    pub fn center(&self) -> Vec3<T> {
        Vec3(self.ranges().map(|r| r.midpoint()))
    }

    pub fn translated(&self, offset: Vec3<T>) -> Self {
        let r = self.ranges();
        let sh = |i: usize| Interval::new(r[i].lo + offset.0[i], r[i].hi + offset.0[i]);
        Self {
            x_range: sh(0),
            y_range: sh(1),
            z_range: sh(2),
        }
    }
}
