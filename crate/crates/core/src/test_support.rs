//! Scenario generators shared by unit tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::ChannelParams;
use crate::geometry::{Aoi, TrajectoryPlan};
use crate::linalg::Vec3;
use crate::scenario::{Scenario, UavConfig};

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

pub fn zero_noise(mut sc: Scenario<f64>) -> Scenario<f64> {
    for u in &mut sc.uavs {
        u.channel.noise_var = 0.0;
    }
    sc
}
