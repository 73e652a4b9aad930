//! Fixtures shared by unit tests, integration tests, benches and the CLI's
//! acceptance checks.

use std::collections::BTreeMap;

use rand::Rng;

use crate::model::{
    kmh_to_ms, Approach, CfMode, FormationParams, PlatoonableEntity, ScenarioConfig, VehicleId,
    VehicleState,
};
use crate::traffic::WorldState;

/// `(id, desired speed in km/h, position in m)` of the four-vehicle example.
pub const FOUR_VEHICLES: [(u32, f64, f64); 4] = [
    (5, 121.0, 430.0),
    (13, 89.0, 270.0),
    (20, 107.0, 250.0),
    (37, 93.0, 70.0),
];

pub fn four_vehicle_params() -> FormationParams {
    FormationParams {
        alpha: 0.6,
        speed_window: 0.6,
        position_range: 400.0,
        ..FormationParams::default()
    }
}

pub fn four_vehicle_entities() -> Vec<PlatoonableEntity> {
    FOUR_VEHICLES
        .iter()
        .map(|&(id, kmh, pos)| PlatoonableEntity::individual(VehicleId(id), kmh_to_ms(kmh), pos))
        .collect()
}

/// The four example vehicles alone on lane 0 of a desk-scale road.
pub fn four_vehicle_world() -> WorldState {
    let mut config = ScenarioConfig::desk();
    config.approach = Approach::CentralizedSolver;
    config.formation = four_vehicle_params();
    let mut world = WorldState::new(config);
    for e in four_vehicle_entities() {
        let v = VehicleState::new(e.id, e.desired_speed, e.front_position, 0, CfMode::Acc);
        world.insert_vehicle(v);
    }
    world
}

/// Random searchers and targets on a 3 km stretch. Every searcher is also a
/// target; platoons only receive. Parameters are drawn so that eligibility varies.
pub fn random_instance<R: Rng + ?Sized>(
    rng: &mut R,
    searchers: usize,
    platoons: usize,
) -> (
    Vec<PlatoonableEntity>,
    Vec<PlatoonableEntity>,
    FormationParams,
) {
    let params = FormationParams {
        alpha: rng.random_range(0.0..=1.0),
        speed_window: rng.random_range(0.1..=0.6),
        position_range: rng.random_range(200.0..=1500.0),
        ..FormationParams::default()
    };
    let individuals: Vec<PlatoonableEntity> = (1..=searchers as u32)
        .map(|id| {
            PlatoonableEntity::individual(
                VehicleId(id),
                rng.random_range(22.0..44.0),
                rng.random_range(0.0..3000.0),
            )
        })
        .collect();
    let mut targets = individuals.clone();
    for k in 0..platoons as u32 {
        let front = rng.random_range(0.0..3000.0);
        let len = 10.0 * rng.random_range(1..=6) as f64;
        targets.push(PlatoonableEntity::platoon(
            VehicleId(searchers as u32 + 1 + k),
            rng.random_range(22.0..44.0),
            front,
            (front - len).max(0.0),
        ));
    }
    (individuals, targets, params)
}

/// `random_instance` driven by a seeded generator.
pub fn seeded_instance(
    seed: u64,
    searchers: usize,
    platoons: usize,
) -> (
    Vec<PlatoonableEntity>,
    Vec<PlatoonableEntity>,
    FormationParams,
) {
    use rand::SeedableRng;
    random_instance(
        &mut rand_chacha::ChaCha8Rng::seed_from_u64(seed),
        searchers,
        platoons,
    )
}

/// Tracks follower gaps of platoons whose membership and lane have not changed
/// for at least `settle_time` seconds.
#[derive(Debug, Clone)]
pub struct SettledGapMonitor {
    pub settle_time: f64,
    /// Settled follower gaps inspected so far.
    pub checked: u64,
    /// Largest `|gap - cacc_gap|` among them.
    pub worst_error: f64,
    stable_since: BTreeMap<VehicleId, (Vec<VehicleId>, usize, f64)>,
}

impl SettledGapMonitor {
    pub fn new(settle_time: f64) -> Self {
        SettledGapMonitor {
            settle_time,
            checked: 0,
            worst_error: 0.0,
            stable_since: BTreeMap::new(),
        }
    }

    /// Call once after every simulation step.
    pub fn observe(&mut self, world: &WorldState) {
        let cf = &world.config.cf;
        let mut next = BTreeMap::new();
        for (&pid, p) in &world.platoons {
            let lane = world.vehicles[&p.leader()].lane;
            let since = match self.stable_since.get(&pid) {
                Some((members, l, t)) if *members == p.members && *l == lane => *t,
                _ => world.clock,
            };
            next.insert(pid, (p.members.clone(), lane, since));
            if world.clock - since < self.settle_time {
                continue;
            }
            for pair in p.members.windows(2) {
                let ahead = &world.vehicles[&pair[0]];
                let behind = &world.vehicles[&pair[1]];
                let gap = ahead.position - cf.vehicle_length - behind.position;
                self.checked += 1;
                self.worst_error = self.worst_error.max((gap - cf.cacc_gap).abs());
            }
        }
        self.stable_since = next;
    }
}
