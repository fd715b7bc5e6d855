//! Monte Carlo experiments: scenario templates, seeded trials, RMSE tables
//! and their CSV output.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{sample_measurements_with, ChannelParams};
use crate::crlb::crlb;
use crate::error::{Error, Result};
use crate::geometry::{Aoi, TrajectoryPlan};
use crate::linalg::Vec3;
use crate::scenario::{Scenario, UavConfig};
use crate::simnet::{run_protocol, Method, ProtocolOptions};

/// Side of the square ground AOI, meters.
pub const AOI_SIDE_M: f64 = 12_000.0;
/// Flight altitude of every UAV, meters.
pub const FLIGHT_ALTITUDE_M: f64 = 60.0;
/// Radius of the circle the UAVs start on, around the AOI center.
pub const START_RADIUS_M: f64 = 4_000.0;
/// Length of each radial pass of the sweep template.
pub const PASS_LENGTH_M: f64 = 9_000.0;
/// Lateral offset between the two passes of the sweep template.
pub const LATERAL_OFFSET_M: f64 = 3_000.0;
pub const CRUISE_SPEED_MPS: f64 = 30.0;

pub const TEMPLATE_CIRCLE_SWEEP: &str = "circle-sweep";
pub const TEMPLATE_RADIAL: &str = "radial";

/// Builds a named scenario with the default channel (ple 3, variance 6 dB^2).
pub fn build_scenario(
    template: &str,
    n_uavs: usize,
    samples_per_uav: usize,
    seed: u64,
) -> Result<Scenario<f64>> {
    build_scenario_with(template, n_uavs, samples_per_uav, seed, ChannelParams::default())
}

/// Scenario templates over the 12 km ground AOI:
///
/// * `circle-sweep`: UAV `i` starts at angle `2 pi i / N` on a 4 km circle
///   around the AOI center, flies a 9 km radial pass inward, steps 3 km
///   sideways and flies back out.
/// * `radial`: same starts, a single straight inward pass. Each UAV's own
///   samples are collinear with its track, which leaves its local estimate
///   mirror-ambiguous.
///
/// The emitter is drawn uniformly on the ground plane of the AOI from `seed`.
pub fn build_scenario_with(
    template: &str,
    n_uavs: usize,
    samples_per_uav: usize,
    seed: u64,
    channel: ChannelParams<f64>,
) -> Result<Scenario<f64>> {
    if n_uavs < 2 {
        return Err(Error::Config(format!("need at least 2 UAVs, got {n_uavs}")));
    }
    if samples_per_uav == 0 {
        return Err(Error::Config("need at least one sample per UAV".into()));
    }
    channel.validate()?;
    let aoi = Aoi::ground_square(AOI_SIDE_M);
    let center = Vec3::new(AOI_SIDE_M / 2.0, AOI_SIDE_M / 2.0, FLIGHT_ALTITUDE_M);
    let uavs = (0..n_uavs)
        .map(|i| {
            let angle = std::f64::consts::TAU * i as f64 / n_uavs as f64;
            let radial = Vec3::new(angle.cos(), angle.sin(), 0.0);
            let tangent = Vec3::new(-angle.sin(), angle.cos(), 0.0);
            let start = center + radial.scale(START_RADIUS_M);
            let plan = match template {
                TEMPLATE_CIRCLE_SWEEP => TrajectoryPlan::rectangular_sweep(
                    start,
                    -radial,
                    tangent,
                    PASS_LENGTH_M,
                    LATERAL_OFFSET_M,
                    samples_per_uav,
                    CRUISE_SPEED_MPS,
                ),
                TEMPLATE_RADIAL => TrajectoryPlan::straight_line(
                    start,
                    -radial,
                    PASS_LENGTH_M / (samples_per_uav.max(2) - 1) as f64,
                    samples_per_uav,
                    CRUISE_SPEED_MPS,
                ),
                other => return Err(Error::Config(format!("unknown scenario template {other:?}"))),
            }?;
            Ok(UavConfig { plan, channel })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let emitter = Vec3::new(
        rng.random_range(0.0..=AOI_SIDE_M),
        rng.random_range(0.0..=AOI_SIDE_M),
        0.0,
    );
    Ok(Scenario { aoi, emitter, uavs })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioSpec {
    Template {
        name: String,
        n_uavs: usize,
        samples_per_uav: usize,
    },
    File {
        path: PathBuf,
    },
    Inline(Box<Scenario<f64>>),
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        ScenarioSpec::Template {
            name: TEMPLATE_CIRCLE_SWEEP.into(),
            n_uavs: 5,
            samples_per_uav: 8,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sweep {
    /// One table entry per method.
    #[default]
    Single,
    /// Iterative methods capped at `1..=k_max` rounds.
    Rounds { k_max: usize },
    UavCount { values: Vec<usize> },
    GridStep { values: Vec<f64> },
}

type SweepPoint = (f64, Scenario<f64>, ProtocolOptions<f64>);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub scenario: ScenarioSpec,
    /// Channel applied to every UAV of template scenarios.
    pub channel: ChannelParams<f64>,
    pub methods: Vec<Method>,
    pub trials: usize,
    pub seed: u64,
    pub sweep: Sweep,
    pub output: Option<PathBuf>,
    pub protocol: ProtocolOptions<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioSpec::default(),
            channel: ChannelParams::default(),
            methods: vec![Method::Dmm, Method::Dgn, Method::Def, Method::Dem],
            trials: 500,
            seed: 1,
            sweep: Sweep::Single,
            output: None,
            protocol: ProtocolOptions::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_owned(),
            source: e,
        })?;
        let cfg: Self = serde_json::from_str(&text).map_err(|e| Error::Json {
            path: path.to_owned(),
            source: e,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("no methods selected".into()));
        }
        let bad = match &self.sweep {
            Sweep::Single => false,
            Sweep::Rounds { k_max } => *k_max == 0,
            Sweep::UavCount { values } => values.is_empty() || values.iter().any(|v| *v < 2),
            Sweep::GridStep { values } => values.is_empty() || values.iter().any(|v| !(*v > 0.0)),
        };
        if bad {
            return Err(Error::Config("sweep values must be positive (UAV counts at least 2)".into()));
        }
        if matches!(self.sweep, Sweep::UavCount { .. })
            && !matches!(self.scenario, ScenarioSpec::Template { .. })
        {
            return Err(Error::Config("a UAV-count sweep needs a scenario template".into()));
        }
        self.channel.validate()
    }

    /// Canonical, de-duplicated method list.
    pub fn method_set(&self) -> Vec<Method> {
        let mut m = self.methods.clone();
        m.sort();
        m.dedup();
        m
    }

    fn scenario_for(&self, n_uavs: Option<usize>) -> Result<Scenario<f64>> {
        match &self.scenario {
            ScenarioSpec::Template {
                name,
                n_uavs: n,
                samples_per_uav,
            } => build_scenario_with(name, n_uavs.unwrap_or(*n), *samples_per_uav, self.seed, self.channel),
            ScenarioSpec::File { path } => Scenario::load(path),
            ScenarioSpec::Inline(sc) => {
                sc.validate()?;
                Ok((**sc).clone())
            }
        }
    }

    /// `(sweep value, scenario, protocol options)` for every sweep point.
    fn sweep_points(&self) -> Result<Vec<SweepPoint>> {
        let base = self.protocol;
        Ok(match &self.sweep {
            Sweep::Single => vec![(0.0, self.scenario_for(None)?, base)],
            Sweep::Rounds { k_max } => {
                let sc = self.scenario_for(None)?;
                (1..=*k_max)
                    .map(|k| {
                        let mut opts = base;
                        opts.dmm.max_iter = k;
                        opts.dgn.max_iter = k;
                        (k as f64, sc.clone(), opts)
                    })
                    .collect()
            }
            Sweep::UavCount { values } => values
                .iter()
                .map(|n| Ok((*n as f64, self.scenario_for(Some(*n))?, base)))
                .collect::<Result<_>>()?,
            Sweep::GridStep { values } => {
                let sc = self.scenario_for(None)?;
                values
                    .iter()
                    .map(|step| {
                        let mut opts = base;
                        opts.grid_step = *step;
                        (*step, sc.clone(), opts)
                    })
                    .collect()
            }
        })
    }
}

/// Result of one method on one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodOutcome {
    pub method: Method,
    pub position: Vec3<f64>,
    pub error_sq: f64,
    pub rounds: usize,
    pub bits: u64,
    pub flops: u64,
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    /// One entry per method; `Err` holds the failure message.
    pub outcomes: Vec<std::result::Result<MethodOutcome, String>>,
}

/// splitmix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the noise stream for `(base seed, sweep point, trial)`.
pub fn trial_seed(base: u64, sweep_index: usize, trial: usize) -> u64 {
    mix(mix(mix(base) ^ sweep_index as u64) ^ trial as u64)
}

/// Runs `trials` independent noise draws on a fixed scenario. Every method
/// sees the same measurements within a trial. Trials execute in parallel;
/// the output order is the trial order.
pub fn run_trials(
    scenario: &Scenario<f64>,
    methods: &[Method],
    opts: &ProtocolOptions<f64>,
    trials: usize,
    base_seed: u64,
    sweep_index: usize,
) -> Vec<TrialRecord> {
    (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(base_seed, sweep_index, trial));
            let outcomes = match sample_measurements_with(scenario, &mut rng) {
                Ok(meas) => methods
                    .iter()
                    .map(|&method| {
                        run_protocol(method, scenario, &meas, opts)
                            .map(|(est, cost)| MethodOutcome {
                                method,
                                position: est.position,
                                error_sq: (est.position - scenario.emitter).norm_squared(),
                                rounds: cost.rounds,
                                bits: cost.bits_total,
                                flops: cost.flops_total,
                                fallback: cost.fallback,
                            })
                            .map_err(|e| e.to_string())
                    })
                    .collect(),
                Err(e) => methods.iter().map(|_| Err(e.to_string())).collect(),
            };
            TrialRecord { trial, outcomes }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmseRow {
    pub sweep: f64,
    pub method: Method,
    pub rmse_m: f64,
    pub crlb_root_m: f64,
    /// Mean over successful trials.
    pub bits: f64,
    pub flops: f64,
    pub trials: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RmseTable {
    pub rows: Vec<RmseRow>,
}

impl RmseTable {
    pub fn get(&self, sweep: f64, method: Method) -> Option<&RmseRow> {
        self.rows.iter().find(|r| r.sweep == sweep && r.method == method)
    }
}

/// Aggregates trial records into one row per method.
pub fn summarize(
    sweep: f64,
    methods: &[Method],
    records: &[TrialRecord],
    crlb_root_m: f64,
) -> Vec<RmseRow> {
    methods
        .iter()
        .enumerate()
        .map(|(k, &method)| {
            let ok: Vec<&MethodOutcome> = records
                .iter()
                .filter_map(|r| r.outcomes.get(k).and_then(|o| o.as_ref().ok()))
                .collect();
            let n_ok = ok.len() as f64;
            let mean = |f: &dyn Fn(&MethodOutcome) -> f64| -> f64 {
                if ok.is_empty() {
                    f64::NAN
                } else {
                    ok.iter().map(|o| f(o)).sum::<f64>() / n_ok
                }
            };
            RmseRow {
                sweep,
                method,
                rmse_m: mean(&|o| o.error_sq).sqrt(),
                crlb_root_m,
                bits: mean(&|o| o.bits as f64),
                flops: mean(&|o| o.flops as f64),
                trials: records.len(),
                failures: records.len() - ok.len(),
            }
        })
        .collect()
}

/// Runs every sweep point and method of the configuration.
pub fn monte_carlo(config: &ExperimentConfig) -> Result<RmseTable> {
    config.validate()?;
    let methods = config.method_set();
    let mut rows = Vec::new();
    for (index, (value, scenario, opts)) in config.sweep_points()?.into_iter().enumerate() {
        let records = run_trials(&scenario, &methods, &opts, config.trials, config.seed, index);
        let crlb_root = crlb(&scenario, &scenario.emitter).map(f64::sqrt).unwrap_or(f64::NAN);
        rows.extend(summarize(value, &methods, &records, crlb_root));
    }
    Ok(RmseTable { rows })
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    sweep: f64,
    method: String,
    rmse_m: f64,
    crlb_root_m: f64,
    bits: f64,
    flops: f64,
    trials: usize,
    failures: usize,
}

pub const CSV_HEADER: &str = "sweep,method,rmse_m,crlb_root_m,bits,flops,trials,failures";

/// Writes the table with a fixed eight-column header.
pub fn emit_csv(table: &RmseTable, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::Io {
        path: path.to_owned(),
        source: e,
    })?;
    write_csv(table, file).map_err(|source| Error::Csv {
        path: path.to_owned(),
        source,
    })
}

pub fn write_csv<W: std::io::Write>(table: &RmseTable, out: W) -> std::result::Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER.split(','))?;
    for r in &table.rows {
        w.serialize(CsvRow {
            sweep: r.sweep,
            method: r.method.to_string(),
            rmse_m: r.rmse_m,
            crlb_root_m: r.crlb_root_m,
            bits: r.bits,
            flops: r.flops,
            trials: r.trials,
            failures: r.failures,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a table written by [`emit_csv`].
pub fn read_csv(path: &Path) -> Result<RmseTable> {
    let err = |source| Error::Csv {
        path: path.to_owned(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(err)?;
    let mut rows = Vec::new();
    for row in r.deserialize() {
        let row: CsvRow = row.map_err(err)?;
        rows.push(RmseRow {
            sweep: row.sweep,
            method: row.method.parse()?,
            rmse_m: row.rmse_m,
            crlb_root_m: row.crlb_root_m,
            bits: row.bits,
            flops: row.flops,
            trials: row.trials,
            failures: row.failures,
        });
    }
    Ok(RmseTable { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn template_sample_count_and_altitude() {
        let sc = build_scenario(TEMPLATE_CIRCLE_SWEEP, 5, 8, 3).unwrap();
        assert_eq!(sc.total_samples(), 40);
        for u in &sc.uavs {
            assert!(u.plan.positions().iter().all(|p| (p.z() - FLIGHT_ALTITUDE_M).abs() < 1e-9));
        }
        let radial = build_scenario(TEMPLATE_RADIAL, 3, 8, 3).unwrap();
        assert_eq!(radial.total_samples(), 24);
    }

    #[test]
    fn emitter_inside_aoi() {
        for seed in 0..200 {
            let sc = build_scenario(TEMPLATE_CIRCLE_SWEEP, 4, 8, seed).unwrap();
            assert!(sc.aoi.contains(&sc.emitter));
            assert!((0.0..=AOI_SIDE_M).contains(&sc.emitter.x()));
        }
        assert_eq!(
            build_scenario(TEMPLATE_CIRCLE_SWEEP, 4, 8, 9).unwrap(),
            build_scenario(TEMPLATE_CIRCLE_SWEEP, 4, 8, 9).unwrap()
        );
    }

    #[test]
    fn template_errors() {
        assert!(matches!(build_scenario(TEMPLATE_CIRCLE_SWEEP, 1, 8, 0), Err(Error::Config(_))));
        assert!(matches!(build_scenario("spiral", 3, 8, 0), Err(Error::Config(_))));
    }

    #[test]
    fn config_defaults_fill_in() {
        let cfg: ExperimentConfig = serde_json::from_str(r#"{"trials": 7, "sweep": {"uav_count": {"values": [4, 6]}}}"#).unwrap();
        assert_eq!(cfg.trials, 7);
        assert_eq!(cfg.channel.ple, 3.0);
        assert_eq!(cfg.protocol.grid_step, 200.0);
        cfg.validate().unwrap();
        let nested: ExperimentConfig =
            serde_json::from_str(r#"{"protocol": {"dmm": {"tol": 0.5}}, "channel": {"ple": 2.5}}"#).unwrap();
        assert_eq!((nested.protocol.dmm.tol, nested.protocol.dmm.max_iter), (0.5, 50));
        assert_eq!((nested.channel.ple, nested.channel.noise_var), (2.5, 6.0));
        let bad = ExperimentConfig { trials: 0, ..ExperimentConfig::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn empty_table_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        emit_csv(&RmseTable::default(), &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn csv_round_trip_and_width() {
        let table = RmseTable {
            rows: vec![RmseRow {
                sweep: 4.0,
                method: Method::Dem,
                rmse_m: 312.25,
                crlb_root_m: 201.5,
                bits: 1536.0,
                flops: 1296000.0,
                trials: 500,
                failures: 2,
            }],
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        emit_csv(&table, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.lines().all(|l| l.split(',').count() == 8));
        assert_eq!(read_csv(&path).unwrap(), table);
    }

    #[test]
    fn unwritable_path_is_reported() {
        let err = emit_csv(&RmseTable::default(), Path::new("/nonexistent/dir/t.csv")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/dir/t.csv"));
    }
}
