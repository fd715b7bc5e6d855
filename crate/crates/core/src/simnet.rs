//! Round-based simulation of the center/edge protocol with bit accounting.
//!
//! UAV 0 is the center. It measures and computes like everyone else, but its
//! own contribution never crosses a link; only the `N - 1` edge UAVs send and
//! receive messages. Message payloads carry full-precision values, while
//! their size is charged as `p` bits per position-like value and `q` bits per
//! weight-like value for a position vector of dimension `tau`.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{total_samples, MeasurementSet};
use crate::error::{contract, Error, Result};
use crate::estimators::{
    avg_fuse, def_fuse, dem_combine, dem_raw_weight, dgn_local_terms, dgn_round,
    dmm_local_update, grid_search_local, DgnOptions, DmmOptions, DmmState, PositionEstimate, Source,
};
use crate::geometry::Aoi;
use crate::linalg::{Mat3, Vec3};
use crate::scalar::Real;
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dmm,
    Dgn,
    Def,
    Dem,
    Avg,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Dmm, Method::Dgn, Method::Def, Method::Dem, Method::Avg];

    pub fn is_iterative(self) -> bool {
        matches!(self, Method::Dmm | Method::Dgn)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Dmm => "dmm",
            Method::Dgn => "dgn",
            Method::Def => "def",
            Method::Dem => "dem",
            Method::Avg => "avg",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| contract(format!("unknown method {s:?}")))
    }
}

/// What a message carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PayloadKind {
    /// Current or local iterate, `tau` values.
    Iterate,
    Gradient,
    /// `tau x tau` matrix of weight-like values.
    Matrix,
    ScalarWeight,
    /// DGN upload: gradient vector plus normal matrix.
    GradientMatrix,
    /// DEF upload: local estimate plus its information matrix.
    EstimateInfo,
    /// DEM upload: local estimate plus its scalar weight.
    EstimateScalar,
    /// Average-fusion upload: local estimate only.
    Estimate,
}

impl PayloadKind {
    /// `(position-like, weight-like)` value counts for dimension `tau`.
    pub fn value_counts(self, tau: u64) -> (u64, u64) {
        match self {
            PayloadKind::Iterate | PayloadKind::Gradient | PayloadKind::Estimate => (tau, 0),
            PayloadKind::Matrix => (0, tau * tau),
            PayloadKind::ScalarWeight => (0, 1),
            PayloadKind::GradientMatrix | PayloadKind::EstimateInfo => (tau, tau * tau),
            PayloadKind::EstimateScalar => (tau, 1),
        }
    }
}

/// Quantization parameters used to charge message sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Accounting {
    /// Dimension of the position vector.
    pub tau: u64,
    /// Bits per position-like value.
    pub p: u64,
    /// Bits per weight-like value.
    pub q: u64,
}

impl Default for Accounting {
    fn default() -> Self {
        Self { tau: 3, p: 32, q: 32 }
    }
}

impl Accounting {
    pub fn bits(&self, kind: PayloadKind) -> u64 {
        let (pos, w) = kind.value_counts(self.tau);
        pos * self.p + w * self.q
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Message<T: Real> {
    pub from: usize,
    pub to: usize,
    pub round: usize,
    pub kind: PayloadKind,
    pub values: Vec<T>,
    pub bit_size: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundCost {
    pub round: usize,
    pub messages: usize,
    pub bits: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub method: Method,
    pub n_uavs: usize,
    pub rounds: usize,
    pub messages: usize,
    pub bits_total: u64,
    pub flops_total: u64,
    pub per_round: Vec<RoundCost>,
    /// DEF fell back to average fusion because the summed information was
    /// singular.
    pub fallback: bool,
}

/// Order in which the center processes the messages of one round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Delivery {
    #[default]
    InOrder,
    Reversed,
    Shuffled(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", default)]
pub struct ProtocolOptions<T: Real> {
    pub accounting: Accounting,
    pub dmm: DmmOptions<T>,
    pub dgn: DgnOptions<T>,
    /// Grid spacing of the local solver, meters.
    pub grid_step: T,
    /// Starting point of iterative methods; defaults to the projected
    /// centroid of the UAV start positions.
    pub init: Option<Vec3<T>>,
    pub delivery: Delivery,
}

impl<T: Real> Default for ProtocolOptions<T> {
    fn default() -> Self {
        Self {
            accounting: Accounting::default(),
            dmm: DmmOptions::default(),
            dgn: DgnOptions::default(),
            grid_step: T::lit(200.0),
            init: None,
            delivery: Delivery::default(),
        }
    }
}

/// Logical network: records every message and enforces per-link round
/// ordering.
#[derive(Debug)]
struct Network<T: Real> {
    accounting: Accounting,
    delivery: Delivery,
    log: Vec<Message<T>>,
    last_round: Vec<[Option<usize>; 2]>,
}

impl<T: Real> Network<T> {
    fn new(n_uavs: usize, accounting: Accounting, delivery: Delivery) -> Self {
        Self {
            accounting,
            delivery,
            log: Vec::new(),
            last_round: vec![[None; 2]; n_uavs],
        }
    }

    fn send(&mut self, from: usize, to: usize, round: usize, kind: PayloadKind, values: Vec<T>) {
        let (edge, dir) = if from == 0 { (to, 0) } else { (from, 1) };
        let last = &mut self.last_round[edge][dir];
        assert!(last.is_none_or(|r| r < round), "rounds must increase per link");
        *last = Some(round);
        let bit_size = self.accounting.bits(kind);
        self.log.push(Message {
            from,
            to,
            round,
            kind,
            values,
            bit_size,
        });
    }

    /// Broadcast from the center to every edge.
    fn broadcast(&mut self, round: usize, n_uavs: usize, kind: PayloadKind, values: &[T]) {
        for to in 1..n_uavs {
            self.send(0, to, round, kind, values.to_vec());
        }
    }

    /// Messages addressed to `to` in `round`, in the configured delivery order.
    fn inbox(&self, to: usize, round: usize) -> Vec<&Message<T>> {
        let mut msgs: Vec<_> = self
            .log
            .iter()
            .filter(|m| m.to == to && m.round == round)
            .collect();
        match self.delivery {
            Delivery::InOrder => {}
            Delivery::Reversed => msgs.reverse(),
            Delivery::Shuffled(seed) => msgs.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ round as u64)),
        }
        msgs
    }

    fn report(&self, method: Method, n_uavs: usize, rounds: usize, flops_total: u64) -> CostReport {
        let per_round = (1..=rounds)
            .map(|r| {
                let msgs: Vec<_> = self.log.iter().filter(|m| m.round == r).collect();
                RoundCost {
                    round: r,
                    messages: msgs.len(),
                    bits: msgs.iter().map(|m| m.bit_size).sum(),
                }
            })
            .collect();
        CostReport {
            method,
            n_uavs,
            rounds,
            messages: self.log.len(),
            bits_total: self.log.iter().map(|m| m.bit_size).sum(),
            flops_total,
            per_round,
            fallback: false,
        }
    }
}

fn vec_values<T: Real>(v: &Vec3<T>) -> Vec<T> {
    v.0.to_vec()
}

fn decode_vec<T: Real>(values: &[T]) -> Vec3<T> {
    Vec3([values[0], values[1], values[2]])
}

fn decode_mat<T: Real>(values: &[T]) -> Mat3<T> {
    Mat3(std::array::from_fn(|r| std::array::from_fn(|c| values[3 * r + c])))
}

fn mat_values<T: Real>(m: &Mat3<T>) -> Vec<T> {
    m.0.iter().flatten().copied().collect()
}

/// Collects `(sender, payload)` from the center's inbox and orders it by
/// sender so that fusion never depends on arrival order.
fn collect<T: Real>(net: &Network<T>, round: usize) -> Vec<(usize, &[T])> {
    let mut got: Vec<_> = net
        .inbox(0, round)
        .into_iter()
        .map(|m| (m.from, m.values.as_slice()))
        .collect();
    got.sort_by_key(|(from, _)| *from);
    got
}

/// Executes `method` as explicit message rounds among the scenario's UAVs.
pub fn run_protocol<T: Real>(
    method: Method,
    scenario: &Scenario<T>,
    meas: &[MeasurementSet<T>],
    opts: &ProtocolOptions<T>,
) -> Result<(PositionEstimate<T>, CostReport)> {
    let n = meas.len();
    if n < 2 {
        return Err(Error::Config(format!(
            "the protocol needs a center and at least one edge UAV, got {n} UAV(s)"
        )));
    }
    if scenario.n_uavs() != n {
        return Err(contract("measurement sets do not match the scenario's UAVs"));
    }
    let aoi = &scenario.aoi;
    let init = opts.init.unwrap_or_else(|| scenario.default_init());
    let mut net = Network::new(n, opts.accounting, opts.delivery);
    let acc = opts.accounting;
    let k_samples = total_samples(meas) as u64;

    match method {
        Method::Dmm => {
            let mut state = DmmState::new(meas, aoi, init)?;
            let k = total_samples(meas);
            while state.iteration < opts.dmm.max_iter {
                let round = state.iteration + 1;
                net.broadcast(round, n, PayloadKind::Iterate, &vec_values(&state.iterate));
                for (i, m) in meas.iter().enumerate().skip(1) {
                    let received = net
                        .inbox(i, round)
                        .first()
                        .map(|msg| decode_vec(&msg.values))
                        .ok_or_else(|| contract("edge missed the broadcast"))?;
                    let local = dmm_local_update(&received, m, n, k)?;
                    net.send(i, 0, round, PayloadKind::Iterate, vec_values(&local));
                }
                let mut locals = vec![dmm_local_update(&state.iterate, &meas[0], n, k)?];
                locals.extend(collect(&net, round).into_iter().map(|(_, v)| decode_vec(v)));
                let step = state.advance(meas, aoi, &locals)?;
                if step <= opts.dmm.tol {
                    break;
                }
            }
            let rounds = state.iteration;
            let flops = flops_closed_form(method, acc.tau, k_samples, rounds as u64, 0)?;
            let est = PositionEstimate::new(state.iterate, Source::Dmm);
            Ok((est, net.report(method, n, rounds, flops)))
        }
        Method::Dgn => {
            if !aoi.contains(&init) {
                return Err(contract("DGN initial point lies outside the AOI"));
            }
            let mut s = init;
            let mut rounds = 0;
            while rounds < opts.dgn.max_iter {
                let round = rounds + 1;
                net.broadcast(round, n, PayloadKind::Iterate, &vec_values(&s));
                for (i, m) in meas.iter().enumerate().skip(1) {
                    let received = net
                        .inbox(i, round)
                        .first()
                        .map(|msg| decode_vec(&msg.values))
                        .ok_or_else(|| contract("edge missed the broadcast"))?;
                    let (a, g) = dgn_local_terms(m, &received)?;
                    let mut values = vec_values(&g);
                    values.extend(mat_values(&a));
                    net.send(i, 0, round, PayloadKind::GradientMatrix, values);
                }
                let mut terms = vec![dgn_local_terms(&meas[0], &s)?];
                terms.extend(
                    collect(&net, round)
                        .into_iter()
                        .map(|(_, v)| (decode_mat(&v[3..]), decode_vec(v))),
                );
                let (next, step) = dgn_round(&s, &terms, aoi, opts.dgn.damping)?;
                s = next;
                rounds = round;
                if step <= opts.dgn.tol {
                    break;
                }
            }
            let flops = flops_closed_form(method, acc.tau, k_samples, rounds as u64, 0)?;
            Ok((PositionEstimate::new(s, Source::Dgn), net.report(method, n, rounds, flops)))
        }
        Method::Def | Method::Dem | Method::Avg => {
            let locals = meas
                .iter()
                .map(|m| grid_search_local(m, aoi, opts.grid_step))
                .collect::<Result<Vec<_>>>()?;
            let kind = match method {
                Method::Def => PayloadKind::EstimateInfo,
                Method::Dem => PayloadKind::EstimateScalar,
                _ => PayloadKind::Estimate,
            };
            let axes = aoi.axes();
            for (i, local) in locals.iter().enumerate().skip(1) {
                let mut values = vec_values(&local.position);
                match kind {
                    PayloadKind::EstimateInfo => {
                        values.extend(mat_values(&local.info.unwrap_or_else(Mat3::zeros)))
                    }
                    PayloadKind::EstimateScalar => {
                        values.push(dem_raw_weight(&local.info.unwrap_or_else(Mat3::zeros), axes)?)
                    }
                    _ => {}
                }
                net.send(i, 0, 1, kind, values);
            }
            // The center fuses only what it holds: its own local estimate
            // plus the decoded uploads.
            let inbox = collect(&net, 1);
            let mut fallback = false;
            let est = match method {
                Method::Def => {
                    let mut received = vec![locals[0]];
                    received.extend(inbox.iter().map(|(_, v)| {
                        PositionEstimate::new(decode_vec(v), Source::Local).with_info(decode_mat(&v[3..]))
                    }));
                    match def_fuse(&received, axes) {
                        Ok((est, _)) => est,
                        Err(Error::RankDeficientFusion) => {
                            fallback = true;
                            avg_fuse(&received)?
                        }
                        Err(e) => return Err(e),
                    }
                }
                Method::Dem => {
                    let own = dem_raw_weight(&locals[0].info.unwrap_or_else(Mat3::zeros), axes)?;
                    let mut points = vec![locals[0].position];
                    let mut raw = vec![own];
                    for (_, v) in &inbox {
                        points.push(decode_vec(v));
                        raw.push(v[3]);
                    }
                    PositionEstimate::new(dem_combine(&points, &raw)?.0, Source::Dem)
                }
                _ => {
                    let mut received = vec![locals[0]];
                    received.extend(
                        inbox.iter().map(|(_, v)| PositionEstimate::new(decode_vec(v), Source::Local)),
                    );
                    avg_fuse(&received)?
                }
            };
            let nodes = grid_nodes_closed_form(aoi, opts.grid_step)?;
            let flops = flops_closed_form(method, acc.tau, k_samples, 1, nodes)?;
            let mut report = net.report(method, n, 1, flops);
            report.fallback = fallback;
            Ok((est, report))
        }
    }
}

/// Transmitted bits of a full run.
pub fn comm_bits_closed_form(
    method: Method,
    n_uavs: u64,
    tau: u64,
    p: u64,
    q: u64,
    k: u64,
) -> Result<u64> {
    if n_uavs == 0 || tau == 0 {
        return Err(contract("UAV count and dimension must be positive"));
    }
    let edges = n_uavs - 1;
    Ok(match method {
        Method::Dmm => 2 * edges * tau * p * k,
        Method::Dgn => edges * (2 * tau * p + tau * tau * q) * k,
        Method::Def => edges * (tau * p + tau * tau * q),
        Method::Dem => edges * (tau * p + q),
        Method::Avg => edges * tau * p,
    })
}

/// Floating-point operation count. One-shot methods ignore `k` and charge a
/// grid search of `grid_nodes` candidates per sample.
pub fn flops_closed_form(
    method: Method,
    tau: u64,
    total_samples: u64,
    k: u64,
    grid_nodes: u64,
) -> Result<u64> {
    if tau == 0 {
        return Err(contract("dimension must be positive"));
    }
    Ok(match method {
        Method::Dmm => 3 * tau * total_samples * k,
        Method::Dgn => (5 * tau * tau + 5 * tau) * total_samples * k,
        Method::Def | Method::Dem | Method::Avg => 3 * tau * total_samples * grid_nodes,
    })
}

/// `prod_a (extent_a / step)` over the searched axes.
pub fn grid_nodes_closed_form<T: Real>(aoi: &Aoi<T>, step: T) -> Result<u64> {
    if !(step > T::zero()) {
        return Err(contract("grid step must be positive"));
    }
    Ok(aoi
        .ranges()
        .iter()
        .filter(|r| !r.is_degenerate())
        .map(|r| (r.width() / step).round().to_u64().unwrap_or(0))
        .product())
}
