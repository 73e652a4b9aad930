use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::demand::PendingVehicle;
use crate::error::{Error, Result};
use crate::model::{
    entity_view, CfMode, Platoon, PlatoonableEntity, Role, ScenarioConfig, VehicleId, VehicleState,
};

/// Slack on the minimum gap when checking the no-overlap invariant.
const GAP_SLACK: f64 = 0.01;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counters {
    /// Vehicles generated by demand, queued or inserted.
    pub spawned: u64,
    pub arrived: u64,
    pub prefilled: u64,
    pub joins_started: u64,
    pub joins_completed: u64,
    pub joins_aborted: u64,
    pub lane_changes: u64,
}

#[derive(Debug, Clone)]
pub struct WorldState {
    pub clock: f64,
    pub step_index: u64,
    pub vehicles: BTreeMap<VehicleId, VehicleState>,
    /// Keyed by the current leader.
    pub platoons: BTreeMap<VehicleId, Platoon>,
    pub rng: ChaCha8Rng,
    pub config: ScenarioConfig,
    /// Generated vehicles still waiting for a free slot at their ramp.
    pub queue: VecDeque<PendingVehicle>,
    pub counters: Counters,
    next_id: u32,
}

impl WorldState {
    pub fn new(config: ScenarioConfig) -> Self {
        WorldState {
            clock: 0.0,
            step_index: 0,
            vehicles: BTreeMap::new(),
            platoons: BTreeMap::new(),
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            config,
            queue: VecDeque::new(),
            counters: Counters::default(),
            next_id: 1,
        }
    }

    pub fn allocate_id(&mut self) -> VehicleId {
        let id = VehicleId(self.next_id);
        self.next_id += 1;
        id
    }

    /// Places an individual vehicle driving at its desired speed. No safety
    /// checks are made; meant for building scenarios by hand.
    pub fn insert_individual(
        &mut self,
        desired_speed: f64,
        position: f64,
        lane: usize,
    ) -> VehicleId {
        let id = self.allocate_id();
        let mut v = VehicleState::new(
            id,
            desired_speed,
            position,
            lane,
            self.config.approach.individual_cf_mode(),
        );
        v.depart_time = self.clock;
        v.arrival_position = self.config.road_length;
        if self.config.approach.is_platooning() {
            v.next_formation = self.clock + self.config.formation.execution_interval;
        }
        self.vehicles.insert(id, v);
        self.counters.spawned += 1;
        id
    }

    /// Adds a fully built vehicle, counted as generated demand. Later ids are
    /// allocated above its id.
    pub fn insert_vehicle(&mut self, v: VehicleState) {
        self.next_id = self.next_id.max(v.id.0 + 1);
        self.vehicles.insert(v.id, v);
        self.counters.spawned += 1;
    }

    /// Makes `members` (front to back, same lane) one platoon led by the first.
    pub fn form_platoon(&mut self, members: &[VehicleId]) -> Result<()> {
        if members.len() < 2 {
            return Err(Error::Invariant("a platoon needs two members".into()));
        }
        for id in members {
            let v = self.vehicles.get(id).ok_or(Error::UnknownVehicle(*id))?;
            if v.role != Role::Individual {
                return Err(Error::Unavailable(*id));
            }
        }
        let leader = members[0];
        let desired_speed = self.vehicles[&leader].desired_speed;
        for (k, id) in members.iter().enumerate() {
            let v = self.vehicles.get_mut(id).expect("checked above");
            v.platoon_id = Some(leader);
            if k == 0 {
                v.role = Role::Leader;
                v.cf_mode = CfMode::Acc;
            } else {
                v.role = Role::Follower;
                v.cf_mode = CfMode::Cacc;
            }
        }
        self.platoons.insert(
            leader,
            Platoon {
                members: members.to_vec(),
                desired_speed,
            },
        );
        Ok(())
    }

    /// Individuals free to search, ascending id.
    pub fn searchers(&self) -> Vec<PlatoonableEntity> {
        self.vehicles
            .values()
            .filter(|v| v.can_search())
            .map(|v| PlatoonableEntity::individual(v.id, v.desired_speed, v.position))
            .collect()
    }

    /// Individuals and platoon leaders free to receive a joiner, ascending id.
    pub fn targets(&self) -> Vec<PlatoonableEntity> {
        self.vehicles
            .values()
            .filter(|v| v.can_be_target())
            .filter_map(|v| entity_view(self, v.id).ok())
            .collect()
    }

    pub fn platoon_of(&self, id: VehicleId) -> Option<&Platoon> {
        let pid = self.vehicles.get(&id)?.platoon_id?;
        self.platoons.get(&pid)
    }

    /// Desired speed the vehicle actually tracks: its platoon's when leading one.
    pub fn effective_desired_speed(&self, v: &VehicleState) -> f64 {
        let desired = match (v.role, v.platoon_id) {
            (Role::Leader, Some(pid)) => self
                .platoons
                .get(&pid)
                .map_or(v.desired_speed, |p| p.desired_speed),
            _ => v.desired_speed,
        };
        desired.min(self.config.cf.v_max)
    }

    /// Vehicles on the road plus those waiting to enter.
    pub fn population(&self) -> u64 {
        (self.vehicles.len() + self.queue.len()) as u64
    }

    pub fn check_invariants(&self) -> Result<()> {
        let problems = self.invariant_problems();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Invariant(format!(
                "{}\n{}",
                problems.join("\n"),
                self.dump()
            )))
        }
    }

    fn invariant_problems(&self) -> Vec<String> {
        let cf = &self.config.cf;
        let mut problems = Vec::new();
        let mut lanes: Vec<Vec<&VehicleState>> = vec![Vec::new(); self.config.lanes];
        for v in self.vehicles.values() {
            if v.lane >= self.config.lanes {
                problems.push(format!("{} on lane {}", v.id, v.lane));
                continue;
            }
            if !(0.0..=self.config.road_length).contains(&v.position) {
                problems.push(format!("{} off road at {}", v.id, v.position));
            }
            if !(v.speed >= 0.0 && v.speed <= cf.v_max + 1e-9) {
                problems.push(format!("{} has speed {}", v.id, v.speed));
            }
            lanes[v.lane].push(v);
        }
        for lane in &mut lanes {
            lane.sort_by(|a, b| a.position.total_cmp(&b.position).then(a.id.cmp(&b.id)));
            for pair in lane.windows(2) {
                let gap = pair[1].position - cf.vehicle_length - pair[0].position;
                if gap < cf.min_gap - GAP_SLACK {
                    problems.push(format!(
                        "gap {gap:.3} m between {} and {} on lane {}",
                        pair[0].id, pair[1].id, pair[0].lane
                    ));
                }
            }
        }
        let population = self.population() + self.counters.arrived;
        if self.counters.spawned + self.counters.prefilled != population {
            problems.push(format!(
                "conservation: spawned {} + prefilled {} != arrived {} + on road {} + queued {}",
                self.counters.spawned,
                self.counters.prefilled,
                self.counters.arrived,
                self.vehicles.len(),
                self.queue.len()
            ));
        }
        for (&pid, p) in &self.platoons {
            if p.len() < 2 || p.leader() != pid {
                problems.push(format!("platoon {pid} malformed: {:?}", p.members));
                continue;
            }
            let mut prev: Option<&VehicleState> = None;
            for (k, id) in p.members.iter().enumerate() {
                let Some(v) = self.vehicles.get(id) else {
                    problems.push(format!("platoon {pid} member {id} missing"));
                    break;
                };
                let role = if k == 0 { Role::Leader } else { Role::Follower };
                if v.role != role || v.platoon_id != Some(pid) {
                    problems.push(format!("platoon {pid} member {id} has role {:?}", v.role));
                }
                if let Some(front) = prev {
                    if v.lane != front.lane || v.position >= front.position {
                        problems.push(format!("platoon {pid} out of order at {id}"));
                    }
                }
                prev = Some(v);
            }
        }
        for v in self.vehicles.values() {
            if v.role != Role::Individual
                && v.platoon_id
                    .is_none_or(|pid| !self.platoons.contains_key(&pid))
            {
                problems.push(format!("{} is {:?} without a platoon", v.id, v.role));
            }
            if let crate::model::Maneuver::Joining { target, .. } = v.maneuver {
                if self.vehicles.get(&target).and_then(|t| t.receiving) != Some(v.id) {
                    problems.push(format!("{} joins {target} which does not expect it", v.id));
                }
            }
        }
        problems
    }

    /// Human-readable snapshot of every vehicle and platoon.
    pub fn dump(&self) -> String {
        let mut out = format!("t={} step={}\n", self.clock, self.step_index);
        for v in self.vehicles.values() {
            let _ = writeln!(
                out,
                "  {} lane={} pos={:.3} v={:.3} a={:.3} {} {} platoon={:?} maneuver={:?} receiving={:?}",
                v.id,
                v.lane,
                v.position,
                v.speed,
                v.acceleration,
                v.role.as_str(),
                v.cf_mode.as_str(),
                v.platoon_id.map(|p| p.0),
                v.maneuver,
                v.receiving.map(|r| r.0)
            );
        }
        for (pid, p) in &self.platoons {
            let ids: Vec<u32> = p.members.iter().map(|m| m.0).collect();
            let _ = writeln!(out, "  platoon {pid}: {ids:?}");
        }
        out
    }
}
