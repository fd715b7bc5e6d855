//! Scenario description and its JSON file form.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelParams;
use crate::error::{contract, Error, Result};
use crate::geometry::{Aoi, TrajectoryPlan};
use crate::linalg::Vec3;
use crate::scalar::Real;

/// One UAV: its flight plan and the channel seen along it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct UavConfig<T: Real> {
    pub plan: TrajectoryPlan<T>,
    #[serde(default)]
    pub channel: ChannelParams<T>,
}

/// Ground truth plus everything needed to synthesize measurements. UAV 0 in
/// `uavs` plays the center role.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Scenario<T: Real> {
    pub aoi: Aoi<T>,
    pub emitter: Vec3<T>,
    pub uavs: Vec<UavConfig<T>>,
}

impl<T: Real> Scenario<T> {
    pub fn validate(&self) -> Result<()> {
        self.aoi.validate()?;
        if self.uavs.is_empty() {
            return Err(contract("scenario has no UAVs"));
        }
        if !self.emitter.is_finite() {
            return Err(contract("emitter position must be finite"));
        }
        for uav in &self.uavs {
            uav.channel.validate()?;
        }
        Ok(())
    }

    pub fn n_uavs(&self) -> usize {
        self.uavs.len()
    }

    /// Total number of RSS samples `K`.
    pub fn total_samples(&self) -> usize {
        self.uavs.iter().map(|u| u.plan.sample_count()).sum()
    }

    /// Mean of the UAV starting points projected into the AOI.
    pub fn default_init(&self) -> Vec3<T> {
        let starts: Vec<_> = self.uavs.iter().map(|u| u.plan.initial_position()).collect();
        let centroid = Vec3::mean(&starts).unwrap_or_else(|| self.aoi.center());
        self.aoi.clamp(&centroid)
    }

    /// Rigid translation of UAVs, emitter and AOI together.
    pub fn translated(&self, offset: Vec3<T>) -> Self {
        Self {
            aoi: self.aoi.translated(offset),
            emitter: self.emitter + offset,
            uavs: self
                .uavs
                .iter()
                .map(|u| UavConfig {
                    plan: u.plan.translated(offset),
                    channel: u.channel,
                })
                .collect(),
        }
    }

    /// Copy with every noise variance multiplied by `factor`.
    pub fn with_noise_scaled(&self, factor: T) -> Self {
        let mut out = self.clone();
        for u in &mut out.uavs {
            u.channel.noise_var = u.channel.noise_var * factor;
        }
        out
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let sc: Self = serde_json::from_str(text).map_err(|e| Error::Json {
            path: "<string>".into(),
            source: e,
        })?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_owned(),
            source: e,
        })?;
        let sc: Self = serde_json::from_str(&text).map_err(|e| Error::Json {
            path: path.to_owned(),
            source: e,
        })?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Json {
            path: path.to_owned(),
            source: e,
        })?;
        std::fs::write(path, text).map_err(|e| Error::Io {
            path: path.to_owned(),
            source: e,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_support::random_scenario;

    #[test]
    fn json_round_trip() {
        let sc = random_scenario(3, 5, 4);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scenario.json");
        sc.save(&path).unwrap();
        assert_eq!(Scenario::<f64>::load(&path).unwrap(), sc);
    }

    #[test]
    fn channel_defaults_when_omitted() {
        let text = r#"{
            "aoi": {"x_range": {"lo": 0, "hi": 100}, "y_range": {"lo": 0, "hi": 100}, "z_range": {"lo": 0, "hi": 0}},
            "emitter": [10, 20, 0],
            "uavs": [{"plan": {"initial_position": [0, 0, 60], "legs": [], "sample_count": 1}}]
        }"#;
        let sc = Scenario::<f64>::from_json_str(text).unwrap();
        assert_eq!(sc.uavs[0].channel, ChannelParams::default());
        assert_eq!(sc.total_samples(), 1);
    }

    #[test]
    fn missing_file_reports_path() {
        let err = Scenario::<f64>::load(Path::new("/nonexistent/sc.json")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/sc.json"));
    }
}
