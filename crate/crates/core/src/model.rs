//! Domain types shared by every other module.
//!
//! All positions are front-bumper coordinates in meters from the road start and all
//! speeds are meters per second. Conversion to km/h happens only at the edges
//! (configuration files and reports).

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::metrics::TripAccumulator;
use crate::traffic::WorldState;

pub fn kmh_to_ms(kmh: f64) -> f64 {
    kmh / 3.6
}

pub fn ms_to_kmh(ms: f64) -> f64 {
    ms * 3.6
}

/// Unique vehicle identifier, allocated in spawn order starting at 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VehicleId(pub u32);

impl fmt::Display for VehicleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The `{id, desired speed, front, rear}` view shared by individual vehicles and
/// platoons. For a platoon the leader supplies id, speed and front position while
/// `rear_position` is the front bumper of the last member.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlatoonableEntity {
    pub id: VehicleId,
    pub desired_speed: f64,
    pub front_position: f64,
    pub rear_position: f64,
}

impl PlatoonableEntity {
    pub fn individual(id: VehicleId, desired_speed: f64, position: f64) -> Self {
        PlatoonableEntity {
            id,
            desired_speed,
            front_position: position,
            rear_position: position,
        }
    }

    pub fn platoon(id: VehicleId, desired_speed: f64, front: f64, rear: f64) -> Self {
        debug_assert!(rear <= front);
        PlatoonableEntity {
            id,
            desired_speed,
            front_position: front,
            rear_position: rear,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CfMode {
    Krauss,
    Acc,
    Cacc,
}

impl CfMode {
    pub fn as_str(self) -> &'static str {
        match self {
            CfMode::Krauss => "krauss",
            CfMode::Acc => "acc",
            CfMode::Cacc => "cacc",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Individual,
    Leader,
    Follower,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Individual => "individual",
            Role::Leader => "leader",
            Role::Follower => "follower",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Maneuver {
    None,
    Joining {
        target: VehicleId,
        start_time: f64,
        completion_time: f64,
    },
}

/// Position of a vehicle inside its formation, used by the fuel model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlatoonPosition {
    Solo,
    Leader,
    Middle,
    Last,
}

impl PlatoonPosition {
    /// Role of member `index` in a formation of `size` vehicles.
    pub fn of(index: usize, size: usize) -> Self {
        if size < 2 {
            PlatoonPosition::Solo
        } else if index == 0 {
            PlatoonPosition::Leader
        } else if index + 1 == size {
            PlatoonPosition::Last
        } else {
            PlatoonPosition::Middle
        }
    }
}

#[derive(Debug, Clone)]
pub struct VehicleState {
    pub id: VehicleId,
    pub desired_speed: f64,
    pub position: f64,
    pub lane: usize,
    pub speed: f64,
    pub acceleration: f64,
    pub cf_mode: CfMode,
    pub role: Role,
    pub maneuver: Maneuver,
    /// Joiner currently approaching this vehicle (or the platoon it leads).
    pub receiving: Option<VehicleId>,
    pub depart_time: f64,
    pub depart_position: f64,
    pub arrival_position: f64,
    pub platoon_id: Option<VehicleId>,
    /// Next time the distributed formation logic runs on this vehicle.
    pub next_formation: f64,
    pub last_lane_change: f64,
    pub trip: TripAccumulator,
}

impl VehicleState {
    pub fn new(
        id: VehicleId,
        desired_speed: f64,
        position: f64,
        lane: usize,
        cf_mode: CfMode,
    ) -> Self {
        VehicleState {
            id,
            desired_speed,
            position,
            lane,
            speed: desired_speed,
            acceleration: 0.0,
            cf_mode,
            role: Role::Individual,
            maneuver: Maneuver::None,
            receiving: None,
            depart_time: 0.0,
            depart_position: position,
            arrival_position: f64::INFINITY,
            platoon_id: None,
            next_formation: f64::INFINITY,
            last_lane_change: f64::NEG_INFINITY,
            trip: TripAccumulator::default(),
        }
    }

    pub fn is_joining(&self) -> bool {
        matches!(self.maneuver, Maneuver::Joining { .. })
    }

    pub fn in_maneuver(&self) -> bool {
        self.is_joining() || self.receiving.is_some()
    }

    /// Searchers must drive individually and not take part in a maneuver.
    pub fn can_search(&self) -> bool {
        self.role == Role::Individual && !self.in_maneuver()
    }

    /// Targets are individuals or platoon leaders that are not in a maneuver.
    pub fn can_be_target(&self) -> bool {
        self.role != Role::Follower && !self.in_maneuver()
    }
}

/// Members are ordered front to back; the first member is the leader.
#[derive(Debug, Clone, PartialEq)]
pub struct Platoon {
    pub members: Vec<VehicleId>,
    /// Desired speed of the formation, inherited from the founding leader.
    pub desired_speed: f64,
}

impl Platoon {
    pub fn leader(&self) -> VehicleId {
        self.members[0]
    }

    pub fn last(&self) -> VehicleId {
        *self.members.last().expect("platoon without members")
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn index_of(&self, id: VehicleId) -> Option<usize> {
        self.members.iter().position(|&m| m == id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormationParams {
    /// Weight of the speed deviation against the position deviation.
    pub alpha: f64,
    /// Maximum relative deviation from the desired speed.
    pub speed_window: f64,
    /// Search range in meters.
    pub position_range: f64,
    pub execution_interval: f64,
    pub comm_range: f64,
    pub solver_time_limit: f64,
    /// Deterministic work budget for the exact solver; `None` means time limit only.
    pub solver_node_limit: Option<u64>,
}

impl Default for FormationParams {
    fn default() -> Self {
        FormationParams {
            alpha: 0.5,
            speed_window: 0.2,
            position_range: 1000.0,
            execution_interval: 60.0,
            comm_range: 500.0,
            solver_time_limit: 600.0,
            solver_node_limit: Some(50_000),
        }
    }
}

impl FormationParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::config("alpha", "must be within [0, 1]"));
        }
        if !(self.speed_window > 0.0 && self.speed_window <= 1.0) {
            return Err(Error::config("speed_window", "must be within (0, 1]"));
        }
        positive("position_range", self.position_range)?;
        positive("execution_interval", self.execution_interval)?;
        positive("comm_range", self.comm_range)?;
        positive("solver_time_limit", self.solver_time_limit)?;
        if self.solver_node_limit == Some(0) {
            return Err(Error::config("solver_node_limit", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Approach {
    Human,
    Acc,
    DistributedGreedy,
    CentralizedGreedy,
    CentralizedSolver,
}

impl Approach {
    pub const ALL: [Approach; 5] = [
        Approach::Human,
        Approach::Acc,
        Approach::DistributedGreedy,
        Approach::CentralizedGreedy,
        Approach::CentralizedSolver,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Approach::Human => "human",
            Approach::Acc => "acc",
            Approach::DistributedGreedy => "distributed_greedy",
            Approach::CentralizedGreedy => "centralized_greedy",
            Approach::CentralizedSolver => "centralized_solver",
        }
    }

    pub fn is_platooning(self) -> bool {
        matches!(
            self,
            Approach::DistributedGreedy | Approach::CentralizedGreedy | Approach::CentralizedSolver
        )
    }

    pub fn is_centralized(self) -> bool {
        matches!(
            self,
            Approach::CentralizedGreedy | Approach::CentralizedSolver
        )
    }

    /// Car-following model of a vehicle driving on its own.
    pub fn individual_cf_mode(self) -> CfMode {
        match self {
            Approach::Human => CfMode::Krauss,
            _ => CfMode::Acc,
        }
    }
}

impl fmt::Display for Approach {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Approach {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let normalized = s.trim().to_ascii_lowercase().replace('-', "_");
        Approach::ALL
            .into_iter()
            .find(|a| a.as_str() == normalized)
            .ok_or_else(|| {
                format!(
                    "unknown approach `{s}` (expected one of human, acc, distributed_greedy, \
                     centralized_greedy, centralized_solver)"
                )
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarFollowingParams {
    pub krauss_headway: f64,
    pub acc_headway: f64,
    /// Spacing-error gain of the ACC law.
    pub acc_lambda: f64,
    /// Speed-tracking gain used by ACC when driving freely (1/s).
    pub acc_free_gain: f64,
    pub cacc_gap: f64,
    pub v_max: f64,
    pub max_accel: f64,
    pub max_decel: f64,
    /// Deceleration a follower may be asked for when someone moves in front of it.
    pub comfort_decel: f64,
    pub vehicle_length: f64,
    pub min_gap: f64,
}

impl Default for CarFollowingParams {
    fn default() -> Self {
        CarFollowingParams {
            krauss_headway: 1.0,
            acc_headway: 1.0,
            acc_lambda: 0.1,
            acc_free_gain: 0.4,
            cacc_gap: 5.0,
            v_max: kmh_to_ms(200.0),
            max_accel: 2.5,
            max_decel: 10.0,
            comfort_decel: 4.5,
            vehicle_length: 5.0,
            min_gap: 2.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub road_length: f64,
    pub lanes: usize,
    pub ramp_interval: f64,
    pub trip_length: f64,
    pub speed_mean: f64,
    pub speed_rel_stddev: f64,
    pub speed_min: f64,
    pub speed_max: f64,
    /// Vehicles per lane and kilometer.
    pub target_density: f64,
    pub sim_duration: f64,
    pub warmup: f64,
    pub step_length: f64,
    pub seed: u64,
    pub approach: Approach,
    pub formation: FormationParams,
    pub cf: CarFollowingParams,
    /// Interval of the macroscopic traffic samples.
    pub sample_interval: f64,
    /// Write wall-clock solver timings; off yields byte-reproducible output files.
    pub record_solve_time: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            road_length: 100_000.0,
            lanes: 3,
            ramp_interval: 10_000.0,
            trip_length: 50_000.0,
            // 120 km/h in whole metres per second.
            speed_mean: 33.0,
            speed_rel_stddev: 0.1,
            speed_min: kmh_to_ms(80.0),
            speed_max: kmh_to_ms(160.0),
            target_density: 5.0,
            sim_duration: 7200.0,
            warmup: 1800.0,
            step_length: 1.0,
            seed: 1,
            approach: Approach::DistributedGreedy,
            formation: FormationParams::default(),
            cf: CarFollowingParams::default(),
            sample_interval: 60.0,
            record_solve_time: true,
        }
    }
}

impl ScenarioConfig {
    /// A 10 km, 30 minute scenario that runs in seconds.
    pub fn desk() -> Self {
        ScenarioConfig {
            road_length: 10_000.0,
            ramp_interval: 1_000.0,
            trip_length: 5_000.0,
            sim_duration: 1800.0,
            warmup: 600.0,
            formation: FormationParams {
                position_range: 100.0,
                comm_range: 50.0,
                ..FormationParams::default()
            },
            ..ScenarioConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("road_length", self.road_length)?;
        if self.lanes == 0 {
            return Err(Error::config("lanes", "must be at least 1"));
        }
        positive("ramp_interval", self.ramp_interval)?;
        positive("trip_length", self.trip_length)?;
        positive("speed_mean", self.speed_mean)?;
        non_negative("speed_rel_stddev", self.speed_rel_stddev)?;
        positive("speed_min", self.speed_min)?;
        if self.speed_max < self.speed_min {
            return Err(Error::config("speed_max", "must not be below speed_min"));
        }
        non_negative("target_density", self.target_density)?;
        positive("sim_duration", self.sim_duration)?;
        non_negative("warmup", self.warmup)?;
        if self.warmup >= self.sim_duration {
            return Err(Error::config("warmup", "must be shorter than sim_duration"));
        }
        positive("step_length", self.step_length)?;
        positive("sample_interval", self.sample_interval)?;
        if !is_multiple(self.road_length, self.ramp_interval) {
            return Err(Error::config(
                "ramp_interval",
                "must divide road_length into whole sections",
            ));
        }
        if !is_multiple(self.trip_length, self.ramp_interval) {
            return Err(Error::config(
                "trip_length",
                "must be a multiple of ramp_interval",
            ));
        }
        if self.trip_length > self.road_length {
            return Err(Error::config("trip_length", "must not exceed road_length"));
        }
        self.formation.validate()?;
        let cf = &self.cf;
        positive("krauss_headway", cf.krauss_headway)?;
        positive("acc_headway", cf.acc_headway)?;
        positive("acc_lambda", cf.acc_lambda)?;
        positive("acc_free_gain", cf.acc_free_gain)?;
        positive("cacc_gap", cf.cacc_gap)?;
        positive("v_max", cf.v_max)?;
        positive("max_accel", cf.max_accel)?;
        positive("max_decel", cf.max_decel)?;
        positive("comfort_decel", cf.comfort_decel)?;
        positive("vehicle_length", cf.vehicle_length)?;
        non_negative("min_gap", cf.min_gap)?;
        if cf.cacc_gap < cf.min_gap {
            return Err(Error::config("cacc_gap", "must not be below min_gap"));
        }
        if self.speed_max > cf.v_max {
            return Err(Error::config("speed_max", "must not exceed v_max"));
        }
        Ok(())
    }

    /// On-ramp positions from which a full trip still fits on the road.
    pub fn depart_ramps(&self) -> Vec<f64> {
        let sections = (self.road_length / self.ramp_interval).round() as usize;
        (0..=sections)
            .map(|k| k as f64 * self.ramp_interval)
            .filter(|&p| p + self.trip_length <= self.road_length + 1e-6)
            .collect()
    }

    /// Vehicle count that realises the target density on the whole road.
    pub fn target_vehicle_count(&self) -> usize {
        (self.target_density * self.lanes as f64 * self.road_length / 1000.0).round() as usize
    }

    /// Desired speed drawn from the configured normal distribution, clamped to its limits.
    pub fn sample_desired_speed<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let stddev = self.speed_rel_stddev * self.speed_mean;
        let raw = if stddev > 0.0 {
            Normal::new(self.speed_mean, stddev)
                .expect("finite normal parameters")
                .sample(rng)
        } else {
            self.speed_mean
        };
        raw.clamp(self.speed_min, self.speed_max)
    }
}

fn positive(key: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::config(key, format!("must be positive, got {value}")))
    }
}

fn non_negative(key: &str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::config(
            key,
            format!("must not be negative, got {value}"),
        ))
    }
}

fn is_multiple(value: f64, unit: f64) -> bool {
    let ratio = value / unit;
    (ratio - ratio.round()).abs() < 1e-9
}

/// The joinable view of an individual vehicle or a platoon leader.
pub fn entity_view(world: &WorldState, id: VehicleId) -> Result<PlatoonableEntity> {
    let vehicle = world.vehicles.get(&id).ok_or(Error::UnknownVehicle(id))?;
    match vehicle.role {
        Role::Follower => Err(Error::FollowerHasNoView(id)),
        Role::Individual => Ok(PlatoonableEntity::individual(
            id,
            vehicle.desired_speed,
            vehicle.position,
        )),
        Role::Leader => {
            let platoon = world
                .platoons
                .get(&id)
                .ok_or_else(|| Error::Invariant(format!("leader {id} without platoon")))?;
            let last = &world.vehicles[&platoon.last()];
            Ok(PlatoonableEntity::platoon(
                id,
                platoon.desired_speed,
                vehicle.position,
                last.position,
            ))
        }
    }
}
