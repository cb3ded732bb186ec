//! Deterministic two-lane ring-road integrator: periodic boundary, no
//! overtaking or lane changing, per-lane initial headway perturbations,
//! trajectory recording.
//!
//! A single run mutates one [`SystemState`] and is single-threaded; distinct
//! runs share nothing and may execute in parallel. [`TrajectoryRecord`]s are
//! immutable once produced.

use crate::error::{Error, Result};
use crate::model::{self, ModelParams, NeighborView};

/// Additive headway perturbation on an inclusive index range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeadwayDelta {
    pub first: usize,
    pub last: usize,
    /// Metres added to each headway in `first..=last`.
    pub delta: f64,
}

/// Initial headway layout of one lane.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationSpec {
    pub baseline_headway: f64,
    pub deltas: Vec<HeadwayDelta>,
}

impl PerturbationSpec {
    pub fn uniform(baseline_headway: f64) -> Self {
        Self { baseline_headway, deltas: Vec::new() }
    }

    fn initial_headways(&self, n: usize) -> Result<Vec<f64>> {
        let mut h = vec![self.baseline_headway; n];
        for d in &self.deltas {
            if d.first > d.last || d.last >= n {
                return Err(Error::InvalidConfig(format!(
                    "perturbation range {}..{} out of bounds for {} vehicles",
                    d.first, d.last, n
                )));
            }
            for hv in &mut h[d.first..=d.last] {
                *hv += d.delta;
            }
        }
        if let Some((i, &bad)) = h.iter().enumerate().find(|(_, &hv)| !(hv > 0.0)) {
            return Err(Error::InvalidConfig(format!(
                "initial headway {} at index {} is not positive",
                bad, i
            )));
        }
        Ok(h)
    }
}

/// The two-lane ring experiment definition.
#[derive(Debug, Clone, PartialEq)]
pub struct RingConfig {
    /// Vehicles per lane.
    pub n_vehicles: usize,
    pub lane_perturbations: [PerturbationSpec; 2],
}

/// How a vehicle's adjacent-lane leader is resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NeighborMode {
    /// The other-lane vehicle with the smallest strictly positive forward gap.
    Nearest,
    /// The other-lane vehicle with the subject's leader index, gap measured
    /// from the subject's position.
    Paired,
}

impl std::fmt::Display for NeighborMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NeighborMode::Nearest => write!(f, "nearest"),
            NeighborMode::Paired => write!(f, "paired"),
        }
    }
}

/// Time-stepping scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Forward-Euler velocity update with the kinematic half-step position
    /// term: `x += v dt + a dt²/2`, `v += a dt`. This is the discretization
    /// used throughout this model family; a plain first-order position update
    /// amplifies the weakly damped traveling modes at dt = 0.1 s and destroys
    /// the stable regime.
    Euler,
    /// Classic fourth-order Runge-Kutta with neighbor views re-resolved at
    /// every stage. Used for convergence audits.
    Rk4,
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scheme::Euler => write!(f, "euler"),
            Scheme::Rk4 => write!(f, "rk4"),
        }
    }
}

/// One lane: positions along the ring, velocities, and the lane's own
/// circumference (the sum of its initial headways).
///
/// Positions are stored unwrapped (strictly increasing within the array, the
/// array spanning less than one lap); use [`LaneState::wrapped_positions`]
/// for ring coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct LaneState {
    pub positions: Vec<f64>,
    pub velocities: Vec<f64>,
    pub circumference: f64,
}

impl LaneState {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Headways to the same-lane leader; the last vehicle wraps to the first.
    pub fn headways(&self) -> Vec<f64> {
        let n = self.len();
        let mut h = Vec::with_capacity(n);
        for i in 0..n - 1 {
            h.push(self.positions[i + 1] - self.positions[i]);
        }
        h.push(self.positions[0] + self.circumference - self.positions[n - 1]);
        h
    }

    /// Positions reduced to `[0, circumference)`.
    pub fn wrapped_positions(&self) -> Vec<f64> {
        self.positions
            .iter()
            .map(|&x| x.rem_euclid(self.circumference))
            .collect()
    }
}

/// Both lanes plus the shared clock.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    pub lanes: [LaneState; 2],
    pub time: f64,
}

/// Integration options for [`run`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub dt: f64,
    pub scheme: Scheme,
    pub duration: f64,
    /// Sampling period; rounded to a whole number of steps.
    pub sample_every: f64,
    pub mode: NeighborMode,
}

/// Sampled headway/velocity history of one lane.
#[derive(Debug, Clone, PartialEq)]
pub struct LaneTrack {
    pub circumference: f64,
    /// One row per sample, one column per vehicle.
    pub headways: Vec<Vec<f64>>,
    pub velocities: Vec<Vec<f64>>,
}

/// Sampled trajectory of a run. Identical inputs produce bit-identical records.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub lanes: [LaneTrack; 2],
}

/// Builds the initial state: per lane, positions are cumulative sums of the
/// perturbed headways starting at 0, the circumference is their sum, and every
/// vehicle starts at the steady-state velocity of the unperturbed ring,
/// `p V(own baseline) + q V̄(other lane's baseline)` with the gate applied.
pub fn initialize(config: &RingConfig, params: &ModelParams) -> Result<SystemState> {
    if config.n_vehicles < 2 {
        return Err(Error::InvalidConfig(format!(
            "need at least 2 vehicles per lane (got {})",
            config.n_vehicles
        )));
    }
    let n = config.n_vehicles;
    let mut lanes = Vec::with_capacity(2);
    for lane in 0..2 {
        let spec = &config.lane_perturbations[lane];
        let other = &config.lane_perturbations[1 - lane];
        let headways = spec.initial_headways(n)?;
        let circumference: f64 = headways.iter().sum();
        let mut positions = Vec::with_capacity(n);
        let mut x = 0.0;
        for h in headways.iter().take(n) {
            positions.push(x);
            x += h;
        }
        let v0 = params.p * model::optimal_velocity(spec.baseline_headway, params)
            + params.q * model::lateral_optimal_velocity(other.baseline_headway, params);
        lanes.push(LaneState {
            positions,
            velocities: vec![v0; n],
            circumference,
        });
    }
    let lane1 = lanes.pop().expect("two lanes");
    let lane0 = lanes.pop().expect("two lanes");
    Ok(SystemState { lanes: [lane0, lane1], time: 0.0 })
}

/// Resolves one vehicle's adjacent-lane leader: `(lateral headway, leader velocity)`.
///
/// Gaps are measured as `(pos_other - pos_self) mod circumference_self` on
/// wrapped ring coordinates; in `Nearest` mode a co-located vehicle (gap
/// exactly zero) is excluded.
pub fn adjacent_leader(
    state: &SystemState,
    lane: usize,
    vehicle: usize,
    mode: NeighborMode,
) -> (f64, f64) {
    let table = LateralTable::build(&state.lanes[lane], &state.lanes[1 - lane], mode);
    table.resolve(&state.lanes[lane], &state.lanes[1 - lane], vehicle)
}

/// Pre-sorted view of the other lane for one derivative evaluation.
enum LateralTable {
    /// `(wrapped position mod own circumference, other-lane vehicle index)`,
    /// sorted by position.
    Nearest(Vec<(f64, usize)>),
    Paired,
}

impl LateralTable {
    fn build(own: &LaneState, other: &LaneState, mode: NeighborMode) -> Self {
        match mode {
            NeighborMode::Paired => LateralTable::Paired,
            NeighborMode::Nearest => {
                let c_self = own.circumference;
                let mut entries: Vec<(f64, usize)> = other
                    .positions
                    .iter()
                    .enumerate()
                    .map(|(j, &x)| (x.rem_euclid(other.circumference).rem_euclid(c_self), j))
                    .collect();
                entries.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
                LateralTable::Nearest(entries)
            }
        }
    }

    fn resolve(&self, own: &LaneState, other: &LaneState, vehicle: usize) -> (f64, f64) {
        match self {
            LateralTable::Paired => {
                let n = other.len();
                let lead = (vehicle + 1) % n;
                let pos_self = own.positions[vehicle].rem_euclid(own.circumference);
                let pos_other = other.positions[lead].rem_euclid(other.circumference);
                let gap = (pos_other - pos_self).rem_euclid(own.circumference);
                (gap, other.velocities[lead])
            }
            LateralTable::Nearest(entries) => {
                let c_self = own.circumference;
                let pos_self = own.positions[vehicle].rem_euclid(c_self);
                // first entry strictly ahead of us; wrap to the front when none
                let idx = entries.partition_point(|&(pos, _)| pos <= pos_self);
                let (gap, lead) = if idx < entries.len() {
                    (entries[idx].0 - pos_self, entries[idx].1)
                } else {
                    (entries[0].0 + c_self - pos_self, entries[0].1)
                };
                (gap, other.velocities[lead])
            }
        }
    }
}

/// Time derivative of the full system: per lane, `(dx/dt, dv/dt)`.
fn derivatives(
    state: &SystemState,
    params: &ModelParams,
    mode: NeighborMode,
) -> [(Vec<f64>, Vec<f64>); 2] {
    let mut out: [(Vec<f64>, Vec<f64>); 2] = [
        (Vec::new(), Vec::new()),
        (Vec::new(), Vec::new()),
    ];
    for lane in 0..2 {
        let own = &state.lanes[lane];
        let other = &state.lanes[1 - lane];
        let n = own.len();
        let headways = own.headways();
        let table = LateralTable::build(own, other, mode);
        let mut acc = Vec::with_capacity(n);
        for i in 0..n {
            let (lateral_headway, v_lateral_lead) = table.resolve(own, other, i);
            let view = NeighborView {
                v_self: own.velocities[i],
                headway: headways[i],
                v_lead: own.velocities[(i + 1) % n],
                lateral_headway,
                v_lateral_lead,
            };
            acc.push(model::acceleration(&view, params));
        }
        out[lane] = (own.velocities.clone(), acc);
    }
    out
}

fn offset_state(base: &SystemState, derivs: &[(Vec<f64>, Vec<f64>); 2], scale: f64) -> SystemState {
    let mut next = base.clone();
    for lane in 0..2 {
        let (dx, dv) = &derivs[lane];
        for i in 0..next.lanes[lane].len() {
            next.lanes[lane].positions[i] += scale * dx[i];
            next.lanes[lane].velocities[i] += scale * dv[i];
        }
    }
    next
}

/// Advances both lanes simultaneously by one step of `dt`.
///
/// Neighbor views are resolved at the evaluation state (for RK4, re-resolved
/// at each stage). Aborts with a diagnostic if any headway reaches zero (order
/// violation / collision) or any state value becomes non-finite.
pub fn step(
    state: &mut SystemState,
    params: &ModelParams,
    dt: f64,
    scheme: Scheme,
    mode: NeighborMode,
) -> Result<()> {
    if !(dt > 0.0) {
        return Err(Error::InvalidOptions(format!("dt must be positive (got {})", dt)));
    }
    match scheme {
        Scheme::Euler => {
            let derivs = derivatives(state, params, mode);
            for lane in 0..2 {
                let (_, acc) = &derivs[lane];
                let st = &mut state.lanes[lane];
                for i in 0..st.len() {
                    st.positions[i] += st.velocities[i] * dt + 0.5 * acc[i] * dt * dt;
                    st.velocities[i] += acc[i] * dt;
                }
            }
        }
        Scheme::Rk4 => {
            let k1 = derivatives(state, params, mode);
            let s2 = offset_state(state, &k1, dt / 2.0);
            let k2 = derivatives(&s2, params, mode);
            let s3 = offset_state(state, &k2, dt / 2.0);
            let k3 = derivatives(&s3, params, mode);
            let s4 = offset_state(state, &k3, dt);
            let k4 = derivatives(&s4, params, mode);
            for lane in 0..2 {
                let st = &mut state.lanes[lane];
                for i in 0..st.len() {
                    st.positions[i] += dt / 6.0
                        * (k1[lane].0[i] + 2.0 * k2[lane].0[i] + 2.0 * k3[lane].0[i] + k4[lane].0[i]);
                    st.velocities[i] += dt / 6.0
                        * (k1[lane].1[i] + 2.0 * k2[lane].1[i] + 2.0 * k3[lane].1[i] + k4[lane].1[i]);
                }
            }
        }
    }
    state.time += dt;
    check_state(state)
}

fn check_state(state: &SystemState) -> Result<()> {
    for (lane, st) in state.lanes.iter().enumerate() {
        let finite = st.positions.iter().chain(st.velocities.iter()).all(|x| x.is_finite());
        if !finite {
            return Err(Error::NonFinite { lane: lane + 1, time: state.time });
        }
        for (vehicle, h) in st.headways().into_iter().enumerate() {
            if !(h > 0.0) {
                return Err(Error::Collision {
                    lane: lane + 1,
                    vehicle,
                    time: state.time,
                    headway: h,
                });
            }
        }
    }
    Ok(())
}

/// Integrates from `t = 0` to `duration`, sampling every `sample_every`
/// seconds (and always at the final step). Deterministic: identical inputs
/// produce bit-identical records.
pub fn run(
    config: &RingConfig,
    params: &ModelParams,
    options: &RunOptions,
) -> Result<TrajectoryRecord> {
    if !(options.dt > 0.0) {
        return Err(Error::InvalidOptions(format!("dt must be positive (got {})", options.dt)));
    }
    if !(options.duration >= 0.0) {
        return Err(Error::InvalidOptions(format!(
            "duration must be non-negative (got {})",
            options.duration
        )));
    }
    if !(options.sample_every > 0.0) {
        return Err(Error::InvalidOptions(format!(
            "sample_every must be positive (got {})",
            options.sample_every
        )));
    }

    let mut state = initialize(config, params)?;
    check_state(&state)?;

    let steps = (options.duration / options.dt).round() as u64;
    let stride = ((options.sample_every / options.dt).round() as u64).max(1);

    let mut record = TrajectoryRecord {
        times: Vec::new(),
        lanes: [
            LaneTrack {
                circumference: state.lanes[0].circumference,
                headways: Vec::new(),
                velocities: Vec::new(),
            },
            LaneTrack {
                circumference: state.lanes[1].circumference,
                headways: Vec::new(),
                velocities: Vec::new(),
            },
        ],
    };

    let sample = |state: &SystemState, k: u64, record: &mut TrajectoryRecord| {
        record.times.push(k as f64 * options.dt);
        for lane in 0..2 {
            record.lanes[lane].headways.push(state.lanes[lane].headways());
            record.lanes[lane].velocities.push(state.lanes[lane].velocities.clone());
        }
    };

    sample(&state, 0, &mut record);
    for k in 1..=steps {
        step(&mut state, params, options.dt, options.scheme, options.mode)?;
        if k % stride == 0 || k == steps {
            sample(&state, k, &mut record);
        }
    }
    Ok(record)
}

/// Per-lane `max headway - min headway` over all samples whose time falls in
/// the inclusive window (with 1e-9 s slack against accumulated float error in
/// sample times).
pub fn measure_amplitude(record: &TrajectoryRecord, t_window: (f64, f64)) -> Result<[f64; 2]> {
    let (t0, t1) = t_window;
    let in_window: Vec<usize> = record
        .times
        .iter()
        .enumerate()
        .filter(|(_, &t)| t >= t0 - 1e-9 && t <= t1 + 1e-9)
        .map(|(i, _)| i)
        .collect();
    if in_window.is_empty() {
        return Err(Error::EmptyWindow(t0, t1));
    }
    let mut out = [0.0; 2];
    for lane in 0..2 {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for &i in &in_window {
            for &h in &record.lanes[lane].headways[i] {
                min = min.min(h);
                max = max.max(h);
            }
        }
        out[lane] = max - min;
    }
    Ok(out)
}

/// The §-five ring geometry used in the reference experiments: 100 vehicles
/// per lane, 7 m baseline, headways 46..=49 reduced by 0.1 m on lane 1 and
/// 0.3 m on lane 2.
pub fn reference_config() -> RingConfig {
    RingConfig {
        n_vehicles: 100,
        lane_perturbations: [
            PerturbationSpec {
                baseline_headway: 7.0,
                deltas: vec![HeadwayDelta { first: 46, last: 49, delta: -0.1 }],
            },
            PerturbationSpec {
                baseline_headway: 7.0,
                deltas: vec![HeadwayDelta { first: 46, last: 49, delta: -0.3 }],
            },
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(alpha: f64, p: f64, q: f64, l1: f64, l2: f64) -> ModelParams {
        ModelParams {
            alpha,
            p,
            q,
            lambda1: l1,
            lambda2: l2,
            v_max: 4.0,
            h_c: 7.0,
            l_v: 5.0,
            d: 10.0,
        }
    }

    #[test]
    fn initialize_reference_circumferences() {
        let state = initialize(&reference_config(), &params(2.85, 1.0, 0.0, 0.2, 0.0)).unwrap();
        assert_relative_eq!(state.lanes[0].circumference, 699.6, epsilon = 1e-12);
        assert_relative_eq!(state.lanes[1].circumference, 698.8, epsilon = 1e-12);
        assert_eq!(state.lanes[0].positions[0], 0.0);
        assert_eq!(state.lanes[0].len(), 100);
    }

    #[test]
    fn initialize_uniform_is_fixed_point() {
        let pr = params(2.85, 1.0, 0.0, 0.2, 0.0);
        let config = RingConfig {
            n_vehicles: 100,
            lane_perturbations: [PerturbationSpec::uniform(7.0), PerturbationSpec::uniform(7.0)],
        };
        let state = initialize(&config, &pr).unwrap();
        assert_relative_eq!(state.lanes[0].circumference, 700.0, epsilon = 1e-12);
        let v0 = state.lanes[0].velocities[0];
        assert!(state.lanes[0].velocities.iter().all(|&v| v == v0));
        // zero acceleration everywhere
        let derivs = derivatives(&state, &pr, NeighborMode::Nearest);
        assert!(derivs[0].1.iter().all(|&a| a == 0.0));
    }

    #[test]
    fn initialize_rejects_nonpositive_headway() {
        let pr = params(2.85, 1.0, 0.0, 0.2, 0.0);
        let config = RingConfig {
            n_vehicles: 10,
            lane_perturbations: [
                PerturbationSpec {
                    baseline_headway: 7.0,
                    deltas: vec![HeadwayDelta { first: 2, last: 2, delta: -7.0 }],
                },
                PerturbationSpec::uniform(7.0),
            ],
        };
        assert!(initialize(&config, &pr).is_err());
    }

    #[test]
    fn initialize_rejects_out_of_range_perturbation() {
        let pr = params(2.85, 1.0, 0.0, 0.2, 0.0);
        let config = RingConfig {
            n_vehicles: 10,
            lane_perturbations: [
                PerturbationSpec {
                    baseline_headway: 7.0,
                    deltas: vec![HeadwayDelta { first: 8, last: 12, delta: -0.1 }],
                },
                PerturbationSpec::uniform(7.0),
            ],
        };
        assert!(initialize(&config, &pr).is_err());
    }

    #[test]
    fn adjacent_leader_uniform_geometry() {
        let pr = params(2.85, 1.0, 0.0, 0.2, 0.0);
        let config = RingConfig {
            n_vehicles: 100,
            lane_perturbations: [PerturbationSpec::uniform(7.0), PerturbationSpec::uniform(7.0)],
        };
        let state = initialize(&config, &pr).unwrap();
        // identical lanes: the co-located vehicle is excluded, so the nearest
        // forward gap is one full headway
        let (gap, _) = adjacent_leader(&state, 0, 0, NeighborMode::Nearest);
        assert_eq!(gap, 7.0);
        let (gap, _) = adjacent_leader(&state, 0, 0, NeighborMode::Paired);
        assert_eq!(gap, 7.0);
    }

    #[test]
    fn adjacent_leader_staggered_geometry() {
        let pr = params(2.85, 1.0, 0.0, 0.2, 0.0);
        let config = RingConfig {
            n_vehicles: 100,
            lane_perturbations: [PerturbationSpec::uniform(7.0), PerturbationSpec::uniform(7.0)],
        };
        let mut state = initialize(&config, &pr).unwrap();
        for x in &mut state.lanes[1].positions {
            *x += 3.5;
        }
        let (gap, _) = adjacent_leader(&state, 0, 10, NeighborMode::Nearest);
        assert_relative_eq!(gap, 3.5, epsilon = 1e-12);
    }

    #[test]
    fn euler_step_on_fixed_point_translates_positions() {
        let pr = params(2.85, 1.0, 0.0, 0.2, 0.0);
        let config = RingConfig {
            n_vehicles: 50,
            lane_perturbations: [PerturbationSpec::uniform(7.0), PerturbationSpec::uniform(7.0)],
        };
        let mut state = initialize(&config, &pr).unwrap();
        let before = state.clone();
        let v0 = before.lanes[0].velocities[0];
        step(&mut state, &pr, 0.1, Scheme::Euler, NeighborMode::Nearest).unwrap();
        for lane in 0..2 {
            for i in 0..50 {
                assert_eq!(
                    state.lanes[lane].positions[i],
                    before.lanes[lane].positions[i] + v0 * 0.1
                );
                assert_eq!(state.lanes[lane].velocities[i], v0);
            }
        }
    }

    #[test]
    fn one_step_upstream_causality() {
        // q = 0, lambda2 = 0: perturbing vehicle 10's velocity must not touch
        // its leader (vehicle 11) after a single euler step
        let pr = params(2.85, 1.0, 0.0, 0.2, 0.0);
        let config = RingConfig {
            n_vehicles: 50,
            lane_perturbations: [PerturbationSpec::uniform(7.0), PerturbationSpec::uniform(7.0)],
        };
        let base = initialize(&config, &pr).unwrap();
        let mut perturbed = base.clone();
        perturbed.lanes[0].velocities[10] += 0.5;

        let mut s_base = base.clone();
        let mut s_pert = perturbed.clone();
        step(&mut s_base, &pr, 0.1, Scheme::Euler, NeighborMode::Nearest).unwrap();
        step(&mut s_pert, &pr, 0.1, Scheme::Euler, NeighborMode::Nearest).unwrap();

        for i in 11..50 {
            assert_eq!(s_base.lanes[0].positions[i], s_pert.lanes[0].positions[i]);
            assert_eq!(s_base.lanes[0].velocities[i], s_pert.lanes[0].velocities[i]);
        }
        assert_ne!(s_base.lanes[0].positions[10], s_pert.lanes[0].positions[10]);
        // the immediate follower reacts within the step through lambda1
        assert_ne!(s_base.lanes[0].velocities[9], s_pert.lanes[0].velocities[9]);
    }

    #[test]
    fn zero_duration_records_initial_sample_only() {
        let pr = params(2.85, 1.0, 0.0, 0.2, 0.0);
        let record = run(
            &reference_config(),
            &pr,
            &RunOptions {
                dt: 0.1,
                scheme: Scheme::Euler,
                duration: 0.0,
                sample_every: 1.0,
                mode: NeighborMode::Nearest,
            },
        )
        .unwrap();
        assert_eq!(record.times, vec![0.0]);
        assert_eq!(record.lanes[0].headways.len(), 1);
    }

    #[test]
    fn run_rejects_bad_options() {
        let pr = params(2.85, 1.0, 0.0, 0.2, 0.0);
        let ok = RunOptions {
            dt: 0.1,
            scheme: Scheme::Euler,
            duration: 1.0,
            sample_every: 1.0,
            mode: NeighborMode::Nearest,
        };
        assert!(run(&reference_config(), &pr, &RunOptions { dt: 0.0, ..ok }).is_err());
        assert!(run(&reference_config(), &pr, &RunOptions { duration: -1.0, ..ok }).is_err());
        assert!(run(&reference_config(), &pr, &RunOptions { sample_every: 0.0, ..ok }).is_err());
    }

    #[test]
    fn oversized_step_aborts_with_collision() {
        let pr = params(2.85, 1.0, 0.0, 0.2, 0.0);
        let err = run(
            &reference_config(),
            &pr,
            &RunOptions {
                dt: 50.0,
                scheme: Scheme::Euler,
                duration: 500.0,
                sample_every: 50.0,
                mode: NeighborMode::Nearest,
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::Collision { .. }), "got {err:?}");
    }

    #[test]
    fn nan_params_abort_with_diagnostic() {
        let mut pr = params(2.85, 1.0, 0.0, 0.2, 0.0);
        pr.v_max = f64::NAN;
        let err = run(
            &reference_config(),
            &pr,
            &RunOptions {
                dt: 0.1,
                scheme: Scheme::Euler,
                duration: 1.0,
                sample_every: 1.0,
                mode: NeighborMode::Nearest,
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }), "got {err:?}");
    }

    #[test]
    fn measure_amplitude_windows() {
        let pr = params(2.85, 1.0, 0.0, 0.2, 0.0);
        let record = run(
            &reference_config(),
            &pr,
            &RunOptions {
                dt: 0.1,
                scheme: Scheme::Euler,
                duration: 2.0,
                sample_every: 1.0,
                mode: NeighborMode::Nearest,
            },
        )
        .unwrap();
        let amp = measure_amplitude(&record, (0.0, 0.0)).unwrap();
        assert_relative_eq!(amp[0], 0.1, epsilon = 1e-12);
        assert_relative_eq!(amp[1], 0.3, epsilon = 1e-12);
        assert!(measure_amplitude(&record, (5.0, 6.0)).is_err());
    }
}
