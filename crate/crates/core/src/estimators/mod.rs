//! Position estimators: the iterative DMM and DGN solvers, the per-UAV grid
//! search, and the one-shot fusion rules (DEF, DEM, average).

mod dgn;
mod dmm;
mod fim;
mod fusion;
mod grid;

pub use dgn::{dgn_local_terms, dgn_round, dgn_solve, run_dgn, DgnOptions, DgnOutcome, DGN_DAMPING_SCALE};
pub use dmm::{dmm_fuse, dmm_local_update, mm_surrogate, run_dmm, DmmOptions, DmmOutcome, DmmState};
pub use fim::{fim_single, rss_partials};
pub use fusion::{
    avg_fuse, def_fuse, def_weights, dem_combine, dem_fuse, dem_raw_weight, dem_weights,
    FusionWeights,
};
pub use grid::{grid_search_local, GridSpec};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::linalg::{Mat3, Vec3};
use crate::scalar::Real;

/// Which routine produced an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    /// Single-UAV grid search.
    Local,
    Dmm,
    Dgn,
    Def,
    Dem,
    Avg,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Source::Local => "local",
            Source::Dmm => "dmm",
            Source::Dgn => "dgn",
            Source::Def => "def",
            Source::Dem => "dem",
            Source::Avg => "avg",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PositionEstimate<T: Real> {
    pub position: Vec3<T>,
    /// Fisher information evaluated at `position`, when the producer has it.
    pub info: Option<Mat3<T>>,
    pub source: Source,
}

impl<T: Real> PositionEstimate<T> {
    pub fn new(position: Vec3<T>, source: Source) -> Self {
        Self {
            position,
            info: None,
            source,
        }
    }

    pub fn with_info(mut self, info: Mat3<T>) -> Self {
        self.info = Some(info);
        self
    }
}
