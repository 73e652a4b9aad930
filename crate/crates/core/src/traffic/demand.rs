use rand::Rng;

use super::car_following::{follower_tolerates, safe_speed};
use super::lanes::LaneIndex;
use super::world::WorldState;
use crate::model::{Role, ScenarioConfig, VehicleId, VehicleState};

/// A generated vehicle waiting for room at its on-ramp.
#[derive(Debug, Clone, PartialEq)]
pub struct PendingVehicle {
    pub id: VehicleId,
    pub desired_speed: f64,
    pub ramp: f64,
    pub created: f64,
}

/// Trip duration at the mean desired speed, in whole seconds.
pub fn expected_trip_time(config: &ScenarioConfig) -> f64 {
    (config.trip_length / config.speed_mean).round()
}

/// Vehicles per hour that keep the road at the target density when each trip
/// takes the expected trip time.
pub fn departure_rate(config: &ScenarioConfig) -> u64 {
    let trip_time = expected_trip_time(config);
    if trip_time <= 0.0 {
        return 0;
    }
    let vehicles = config.target_density * config.lanes as f64 * config.road_length / 1000.0;
    (vehicles * 3600.0 / trip_time).round() as u64
}

/// Speed at which a vehicle can enter `lane` at `position`, if there is room.
fn insertion_speed(
    world: &WorldState,
    index: &LaneIndex,
    lane: usize,
    position: f64,
    desired: f64,
) -> Option<f64> {
    let cf = &world.config.cf;
    let dt = world.config.step_length;
    let mut speed = desired.min(cf.v_max);
    if let Some(a) = index.ahead_of(lane, position, &[]) {
        let a = &world.vehicles[&a];
        let gap = a.position - cf.vehicle_length - position;
        if gap < cf.min_gap {
            return None;
        }
        speed = speed.min(safe_speed(gap - cf.min_gap, a.speed, cf, dt));
    }
    if let Some(b) = index.at_or_behind(lane, position, &[]) {
        let b = &world.vehicles[&b];
        let gap = position - cf.vehicle_length - b.position;
        if b.role == Role::Follower
            || gap < cf.min_gap
            || !follower_tolerates(b.speed, gap - cf.min_gap, speed, cf, dt)
        {
            return None;
        }
    }
    Some(speed)
}

fn first_free_lane(
    world: &WorldState,
    index: &LaneIndex,
    position: f64,
    desired: f64,
) -> Option<(usize, f64)> {
    (0..world.config.lanes)
        .find_map(|lane| insertion_speed(world, index, lane, position, desired).map(|v| (lane, v)))
}

fn place(world: &mut WorldState, index: &mut LaneIndex, v: VehicleState) {
    index.insert(v.lane, v.position, v.id);
    world.vehicles.insert(v.id, v);
}

/// Generates this step's demand and inserts queued vehicles where there is room.
/// Vehicles that cannot enter stay queued in generation order.
pub fn spawn_step(world: &mut WorldState) -> Vec<VehicleId> {
    let cfg = world.config.clone();
    let per_step = departure_rate(&cfg) as f64 * cfg.step_length / 3600.0;
    let ramps = cfg.depart_ramps();
    if per_step > 0.0 && !ramps.is_empty() {
        let whole = per_step.floor();
        let extra = world.rng.random_bool(per_step - whole);
        for _ in 0..(whole as u64 + extra as u64) {
            let id = world.allocate_id();
            let desired_speed = cfg.sample_desired_speed(&mut world.rng);
            let ramp = ramps[world.rng.random_range(0..ramps.len())];
            world.queue.push_back(PendingVehicle {
                id,
                desired_speed,
                ramp,
                created: world.clock,
            });
            world.counters.spawned += 1;
        }
    }
    if world.queue.is_empty() {
        return Vec::new();
    }

    let mut index = LaneIndex::build(world);
    let mut inserted = Vec::new();
    let mut waiting = std::collections::VecDeque::with_capacity(world.queue.len());
    while let Some(p) = world.queue.pop_front() {
        match first_free_lane(world, &index, p.ramp, p.desired_speed) {
            Some((lane, speed)) => {
                let mut v = VehicleState::new(
                    p.id,
                    p.desired_speed,
                    p.ramp,
                    lane,
                    cfg.approach.individual_cf_mode(),
                );
                v.speed = speed;
                v.depart_time = world.clock;
                v.arrival_position = p.ramp + cfg.trip_length;
                if cfg.approach.is_platooning() {
                    v.next_formation = world.clock + cfg.formation.execution_interval;
                }
                place(world, &mut index, v);
                inserted.push(p.id);
            }
            None => waiting.push_back(p),
        }
    }
    world.queue = waiting;
    inserted
}

/// Fills the road with the target number of vehicles as if they had been driving
/// for a while: each gets a random depart ramp and a random share of its trip
/// already covered, so the remaining trip is uniform in `(0, trip_length]`.
/// Positions that are taken are redrawn. For distributed formation every vehicle
/// also gets a random phase within the execution interval.
pub fn prefill(world: &mut WorldState) -> usize {
    let cfg = world.config.clone();
    let target = cfg.target_vehicle_count();
    let mut index = LaneIndex::build(world);
    let interval_steps = cfg.formation.execution_interval.round().max(1.0) as u64;
    let ramps = cfg.depart_ramps();
    if ramps.is_empty() {
        return 0;
    }
    let mut placed = 0;
    let mut attempts = 0;
    while placed < target && attempts < target * 100 {
        attempts += 1;
        let lane = world.rng.random_range(0..cfg.lanes);
        let ramp = ramps[world.rng.random_range(0..ramps.len())];
        let progress = cfg.trip_length * world.rng.random::<f64>();
        let position = ramp + progress;
        let desired = cfg.sample_desired_speed(&mut world.rng);
        let phase = world.rng.random_range(1..=interval_steps) as f64;
        let Some(speed) = insertion_speed(world, &index, lane, position, desired) else {
            continue;
        };
        let id = world.allocate_id();
        let mut v = VehicleState::new(
            id,
            desired,
            position,
            lane,
            cfg.approach.individual_cf_mode(),
        );
        v.speed = speed;
        v.depart_time = world.clock;
        v.depart_position = ramp;
        v.arrival_position = ramp + cfg.trip_length;
        if cfg.approach.is_platooning() {
            v.next_formation = world.clock + phase;
        }
        place(world, &mut index, v);
        world.counters.prefilled += 1;
        placed += 1;
    }
    placed
}
