use std::collections::BTreeMap;
use std::io::Write;

use super::car_following::{
    acc_speed, cacc_accel, krauss_speed, safe_speed, LeaderInfo, PlatoonContext,
};
use super::demand::{prefill, spawn_step};
use super::lanes::{lane_change_step, LaneIndex};
use super::maneuver::{maneuver_step, process_arrivals};
use super::world::WorldState;
use crate::error::Result;
use crate::formation::{run_centralized_round, run_distributed_round};
use crate::metrics::{fuel_step, FuelModel, MetricsLedger, TrafficSample, VehicleTripRecord};
use crate::model::{Approach, CfMode, PlatoonPosition, Role, ScenarioConfig, VehicleId};

const TIME_EPS: f64 = 1e-9;

/// A scenario run: world, measurements and the step loop.
pub struct Simulation {
    pub world: WorldState,
    pub ledger: MetricsLedger,
    fuel: FuelModel,
    detectors: Vec<f64>,
    crossings: u64,
    departures: u64,
    next_sample: f64,
    next_centralized: f64,
    trace: Option<csv::Writer<Box<dyn Write + Send>>>,
}

impl Simulation {
    /// Validates the configuration and pre-fills the road.
    pub fn new(config: ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let mut world = WorldState::new(config);
        prefill(&mut world);
        Ok(Self::from_world(world))
    }

    /// Runs an existing world as is, without pre-filling.
    pub fn from_world(world: WorldState) -> Self {
        let cfg = &world.config;
        let sections = (cfg.road_length / cfg.ramp_interval).round() as usize;
        let detectors = (0..sections)
            .map(|k| (k as f64 + 0.5) * cfg.ramp_interval)
            .collect();
        Simulation {
            ledger: MetricsLedger::new(cfg.warmup),
            fuel: FuelModel::default(),
            detectors,
            crossings: 0,
            departures: 0,
            next_sample: world.clock + cfg.sample_interval,
            next_centralized: world.clock + cfg.formation.execution_interval,
            trace: None,
            world,
        }
    }

    pub fn with_fuel_model(mut self, fuel: FuelModel) -> Self {
        self.fuel = fuel;
        self
    }

    /// Writes every vehicle's state after each step as CSV.
    pub fn with_trace(mut self, out: Box<dyn Write + Send>) -> Result<Self> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "time",
            "id",
            "lane",
            "position",
            "speed",
            "acceleration",
            "role",
            "platoon_id",
        ])?;
        self.trace = Some(w);
        Ok(self)
    }

    pub fn total_steps(&self) -> u64 {
        (self.world.config.sim_duration / self.world.config.step_length).round() as u64
    }

    pub fn run(&mut self) -> Result<()> {
        while self.world.step_index < self.total_steps() {
            self.step()?;
        }
        if let Some(t) = self.trace.as_mut() {
            t.flush()?;
        }
        Ok(())
    }

    pub fn step(&mut self) -> Result<()> {
        let dt = self.world.config.step_length;
        self.run_formation();
        maneuver_step(&mut self.world);
        lane_change_step(&mut self.world);
        self.move_vehicles();

        self.world.step_index += 1;
        self.world.clock = self.world.step_index as f64 * dt;
        let clock = self.world.clock;
        for v in process_arrivals(&mut self.world) {
            self.ledger
                .record_trip(VehicleTripRecord::from_vehicle(&v, clock));
        }
        self.departures += spawn_step(&mut self.world).len() as u64;
        self.world.check_invariants()?;
        self.sample();
        self.write_trace()?;
        Ok(())
    }

    fn run_formation(&mut self) {
        let approach = self.world.config.approach;
        let interval = self.world.config.formation.execution_interval;
        let clock = self.world.clock;
        if approach.is_centralized() {
            if clock + TIME_EPS >= self.next_centralized {
                let record = run_centralized_round(&mut self.world, approach);
                self.ledger.record_formation(record);
                while self.next_centralized <= clock + TIME_EPS {
                    self.next_centralized += interval;
                }
            }
        } else if approach == Approach::DistributedGreedy {
            let mut due = Vec::new();
            for v in self.world.vehicles.values_mut() {
                if v.next_formation <= clock + TIME_EPS {
                    due.push(v.id);
                    while v.next_formation <= clock + TIME_EPS {
                        v.next_formation += interval;
                    }
                }
            }
            if !due.is_empty() {
                let record = run_distributed_round(&mut self.world, &due);
                if record.searchers > 0 {
                    self.ledger.record_formation(record);
                }
            }
        }
    }

    /// Computes new speeds lane by lane from front to back, integrates positions
    /// and accumulates per-vehicle measurements.
    fn move_vehicles(&mut self) {
        let world = &self.world;
        let cf = world.config.cf;
        let dt = world.config.step_length;
        let index = LaneIndex::build(world);
        let mut updates: BTreeMap<VehicleId, (f64, f64)> = BTreeMap::new();

        for lane in 0..world.config.lanes {
            let mut ahead: Option<VehicleId> = None;
            for &(_, id) in index.lane(lane).iter().rev() {
                let v = &world.vehicles[&id];
                let leader = ahead.map(|a| {
                    let a = &world.vehicles[&a];
                    LeaderInfo {
                        gap: a.position - cf.vehicle_length - v.position - cf.min_gap,
                        speed: a.speed,
                    }
                });
                let speed = if v.role == Role::Follower {
                    let accel = self.follower_accel(id, &updates);
                    (v.speed + accel * dt).clamp(0.0, cf.v_max)
                } else {
                    let desired = world.effective_desired_speed(v);
                    let proposed = match v.cf_mode {
                        CfMode::Krauss => krauss_speed(v.speed, desired, leader, &cf, dt),
                        _ => {
                            let leader_next = ahead.map_or(0.0, |a| updates[&a].0);
                            acc_speed(v.speed, desired, leader, leader_next, &cf, dt)
                        }
                    };
                    let lo = (v.speed - cf.max_decel * dt).max(0.0);
                    let hi = (v.speed + cf.max_accel * dt).min(cf.v_max);
                    let mut next = proposed.clamp(lo, hi);
                    if let Some(l) = leader {
                        let cap = safe_speed(l.gap, l.speed, &cf, dt);
                        next = next.min(cap);
                    }
                    next
                };
                updates.insert(id, (speed, (speed - v.speed) / dt));
                ahead = Some(id);
            }
        }

        let mut crossings = 0;
        let mut positions: BTreeMap<VehicleId, PlatoonPosition> = BTreeMap::new();
        for p in self.world.platoons.values() {
            for (k, &m) in p.members.iter().enumerate() {
                positions.insert(m, PlatoonPosition::of(k, p.len()));
            }
        }
        for (id, (speed, accel)) in updates {
            let v = self.world.vehicles.get_mut(&id).expect("vehicle exists");
            let old = v.position;
            v.speed = speed;
            v.acceleration = accel;
            v.position = (old + speed * dt).min(self.world.config.road_length);
            crossings += self
                .detectors
                .iter()
                .filter(|&&d| old < d && v.position >= d)
                .count() as u64;
            let position = positions.get(&id).copied().unwrap_or(PlatoonPosition::Solo);
            let fuel = fuel_step(&self.fuel, speed, accel, position, dt);
            let desired = v.desired_speed;
            v.trip
                .record(dt, speed, desired, fuel, position != PlatoonPosition::Solo);
        }
        self.crossings += crossings;
    }

    fn follower_accel(&self, id: VehicleId, updates: &BTreeMap<VehicleId, (f64, f64)>) -> f64 {
        let world = &self.world;
        let cf = &world.config.cf;
        let v = &world.vehicles[&id];
        let platoon = world.platoon_of(id).expect("follower has a platoon");
        let k = platoon.index_of(id).expect("follower is a member");
        let pred = &world.vehicles[&platoon.members[k - 1]];
        let lead = &world.vehicles[&platoon.leader()];
        let new_accel = |x: VehicleId| updates.get(&x).map_or(0.0, |&(_, a)| a);
        let ctx = PlatoonContext {
            gap: pred.position - cf.vehicle_length - v.position,
            pred_speed: pred.speed,
            pred_accel: new_accel(pred.id),
            leader_speed: lead.speed,
            leader_accel: new_accel(lead.id),
        };
        cacc_accel(v.speed, &ctx, cf)
    }

    fn sample(&mut self) {
        if self.world.clock + TIME_EPS < self.next_sample {
            return;
        }
        let cfg = &self.world.config;
        let interval = cfg.sample_interval;
        let vehicles = self.world.vehicles.len();
        let lane_km = cfg.lanes as f64 * cfg.road_length / 1000.0;
        let mut sizes: BTreeMap<usize, usize> = BTreeMap::new();
        let mut in_platoons = 0;
        for p in self.world.platoons.values() {
            *sizes.entry(p.len()).or_default() += 1;
            in_platoons += p.len();
        }
        if vehicles > in_platoons {
            sizes.insert(1, vehicles - in_platoons);
        }
        let mean_speed = if vehicles == 0 {
            0.0
        } else {
            self.world.vehicles.values().map(|v| v.speed).sum::<f64>() / vehicles as f64
        };
        let detector_lanes = (self.detectors.len() * cfg.lanes).max(1) as f64;
        let sample = TrafficSample {
            time: self.world.clock,
            vehicles,
            density: vehicles as f64 / lane_km,
            flow: self.crossings as f64 / detector_lanes * 3600.0 / interval,
            departure_flow: self.departures as f64 * 3600.0 / interval,
            mean_speed,
            formation_sizes: sizes,
        };
        self.ledger.record_sample(sample);
        self.crossings = 0;
        self.departures = 0;
        while self.next_sample <= self.world.clock + TIME_EPS {
            self.next_sample += interval;
        }
    }

    fn write_trace(&mut self) -> Result<()> {
        let Some(w) = self.trace.as_mut() else {
            return Ok(());
        };
        let f = crate::metrics::format_float;
        for v in self.world.vehicles.values() {
            w.write_record([
                f(self.world.clock),
                v.id.to_string(),
                v.lane.to_string(),
                f(v.position),
                f(v.speed),
                f(v.acceleration),
                v.role.as_str().to_string(),
                v.platoon_id.map(|p| p.to_string()).unwrap_or_default(),
            ])?;
        }
        Ok(())
    }
}
