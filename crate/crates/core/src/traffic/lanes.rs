use super::car_following::{follower_tolerates, safe_speed};
use super::world::WorldState;
use crate::model::{Role, VehicleId};

/// Minimum time between two lane changes of the same vehicle or platoon.
pub const LANE_CHANGE_COOLDOWN: f64 = 3.0;
/// Speed advantage needed before overtaking.
const SPEED_GAIN: f64 = 1.0;

/// Vehicles of each lane sorted by position, then id.
#[derive(Debug, Clone, Default)]
pub struct LaneIndex {
    lanes: Vec<Vec<(f64, VehicleId)>>,
}

impl LaneIndex {
    pub fn build(world: &WorldState) -> Self {
        let mut lanes = vec![Vec::new(); world.config.lanes];
        for v in world.vehicles.values() {
            lanes[v.lane].push((v.position, v.id));
        }
        for lane in &mut lanes {
            lane.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        }
        LaneIndex { lanes }
    }

    pub fn lane(&self, lane: usize) -> &[(f64, VehicleId)] {
        &self.lanes[lane]
    }

    /// Nearest vehicle strictly ahead of `position`, ignoring `skip`.
    pub fn ahead_of(&self, lane: usize, position: f64, skip: &[VehicleId]) -> Option<VehicleId> {
        let l = &self.lanes[lane];
        let start = l.partition_point(|&(p, _)| p <= position);
        l[start..]
            .iter()
            .map(|&(_, id)| id)
            .find(|id| !skip.contains(id))
    }

    /// Nearest vehicle at or behind `position`, ignoring `skip`.
    pub fn at_or_behind(
        &self,
        lane: usize,
        position: f64,
        skip: &[VehicleId],
    ) -> Option<VehicleId> {
        let l = &self.lanes[lane];
        let end = l.partition_point(|&(p, _)| p <= position);
        l[..end]
            .iter()
            .rev()
            .map(|&(_, id)| id)
            .find(|id| !skip.contains(id))
    }

    pub fn insert(&mut self, lane: usize, position: f64, id: VehicleId) {
        let l = &mut self.lanes[lane];
        let at = l.partition_point(|&(p, i)| p < position || (p == position && i < id));
        l.insert(at, (position, id));
    }

    pub fn remove(&mut self, lane: usize, id: VehicleId) {
        self.lanes[lane].retain(|&(_, i)| i != id);
    }
}

/// Checks that a block of vehicles (front to back) can occupy `lane` right now:
/// the block keeps a safe distance to the vehicle ahead without braking, the
/// vehicle behind tolerates it with comfortable braking, and no platoon is split.
pub(crate) fn block_fits(
    world: &WorldState,
    index: &LaneIndex,
    lane: usize,
    block: &[VehicleId],
) -> bool {
    let cf = &world.config.cf;
    let dt = world.config.step_length;
    let front = &world.vehicles[&block[0]];
    let rear = &world.vehicles[block.last().expect("non-empty block")];
    let rear_end = rear.position - cf.vehicle_length;

    let ahead = index
        .ahead_of(lane, front.position, block)
        .map(|id| &world.vehicles[&id]);
    let behind = index
        .at_or_behind(lane, front.position, block)
        .map(|id| &world.vehicles[&id]);
    if let Some(a) = ahead {
        let gap = a.position - cf.vehicle_length - front.position;
        if gap < cf.min_gap || safe_speed(gap - cf.min_gap, a.speed, cf, dt) < front.speed {
            return false;
        }
    }
    if let Some(b) = behind {
        if b.role == Role::Follower {
            return false;
        }
        let gap = rear_end - b.position;
        if gap < cf.min_gap || !follower_tolerates(b.speed, gap - cf.min_gap, rear.speed, cf, dt) {
            return false;
        }
    }
    true
}

fn anticipated_speed(
    world: &WorldState,
    index: &LaneIndex,
    lane: usize,
    position: f64,
    desired: f64,
    block: &[VehicleId],
) -> f64 {
    let cf = &world.config.cf;
    let lookahead = (6.0 * desired).max(100.0);
    match index.ahead_of(lane, position, block) {
        Some(id) => {
            let a = &world.vehicles[&id];
            if a.position - cf.vehicle_length - position < lookahead {
                desired.min(a.speed)
            } else {
                desired
            }
        }
        None => desired,
    }
}

fn plan(world: &WorldState, index: &LaneIndex, id: VehicleId) -> Option<(usize, Vec<VehicleId>)> {
    let v = &world.vehicles[&id];
    if world.clock - v.last_lane_change < LANE_CHANGE_COOLDOWN {
        return None;
    }
    let block = match (v.role, world.platoon_of(id)) {
        (Role::Leader, Some(p)) => p.members.clone(),
        (Role::Individual, _) => vec![id],
        _ => return None,
    };
    let desired = world.effective_desired_speed(v);
    let current = anticipated_speed(world, index, v.lane, v.position, desired, &block);
    if current < desired - SPEED_GAIN && v.lane + 1 < world.config.lanes {
        let left = anticipated_speed(world, index, v.lane + 1, v.position, desired, &block);
        if left > current + SPEED_GAIN && block_fits(world, index, v.lane + 1, &block) {
            return Some((v.lane + 1, block));
        }
    }
    if v.lane > 0 {
        let right = anticipated_speed(world, index, v.lane - 1, v.position, desired, &block);
        if right >= desired - SPEED_GAIN
            && right >= current
            && block_fits(world, index, v.lane - 1, &block)
        {
            return Some((v.lane - 1, block));
        }
    }
    None
}

/// Overtakes on the left when the current lane is slower than desired and keeps
/// right otherwise. Platoons move as a whole; followers never move alone.
pub fn lane_change_step(world: &mut WorldState) -> usize {
    let mut index = LaneIndex::build(world);
    let movers: Vec<VehicleId> = world
        .vehicles
        .values()
        .filter(|v| v.role != Role::Follower)
        .map(|v| v.id)
        .collect();
    let mut changes = 0;
    for id in movers {
        let Some((lane, block)) = plan(world, &index, id) else {
            continue;
        };
        let clock = world.clock;
        for m in &block {
            let v = world.vehicles.get_mut(m).expect("block member exists");
            index.remove(v.lane, *m);
            index.insert(lane, v.position, *m);
            v.lane = lane;
            v.last_lane_change = clock;
        }
        changes += 1;
    }
    world.counters.lane_changes += changes as u64;
    changes
}
