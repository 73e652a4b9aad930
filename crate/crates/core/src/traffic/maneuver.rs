use super::car_following::follower_tolerates;
use super::lanes::LaneIndex;
use super::world::WorldState;
use crate::model::{entity_view, CfMode, Maneuver, Platoon, Role, VehicleId, VehicleState};

/// Lower bound on the speed surplus used to estimate a join's approach time.
pub const MIN_CLOSING_SPEED: f64 = 1.0;

/// Approach time for closing `distance` at `closing_speed`, at least one second.
pub fn join_duration(distance: f64, closing_speed: f64) -> f64 {
    (distance / closing_speed).max(1.0)
}

/// Time at which `searcher` would reach the slot behind `target`'s last member
/// under ideal conditions, or `None` if either vehicle is unknown.
pub fn join_completion_time(
    world: &WorldState,
    searcher: VehicleId,
    target: VehicleId,
) -> Option<f64> {
    let cf = &world.config.cf;
    let s = world.vehicles.get(&searcher)?;
    let t = world.vehicles.get(&target)?;
    let view = entity_view(world, target).ok()?;
    let slot = view.rear_position - cf.vehicle_length - cf.cacc_gap;
    let distance = (slot - s.position).abs();
    let m = world.config.formation.speed_window;
    let allowed = s.desired_speed * m;
    let margin = cf.v_max.min((1.0 + m) * s.desired_speed) - t.speed;
    let closing = allowed.min(margin).max(MIN_CLOSING_SPEED);
    Some(world.clock + join_duration(distance, closing))
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ManeuverOutcome {
    /// `(joiner, platoon leader)` of every completed join.
    pub completed: Vec<(VehicleId, VehicleId)>,
    pub aborted: Vec<VehicleId>,
}

fn abort_join(world: &mut WorldState, joiner: VehicleId) {
    if let Some(v) = world.vehicles.get_mut(&joiner) {
        if let Maneuver::Joining { target, .. } = v.maneuver {
            v.maneuver = Maneuver::None;
            if let Some(t) = world.vehicles.get_mut(&target) {
                if t.receiving == Some(joiner) {
                    t.receiving = None;
                }
            }
            world.counters.joins_aborted += 1;
        }
    }
}

/// Slot behind the formation of `target` if the join can be completed now.
fn join_slot(
    world: &WorldState,
    joiner: &VehicleState,
    target: VehicleId,
) -> Option<(f64, usize, VehicleId)> {
    let cf = &world.config.cf;
    let t = world.vehicles.get(&target)?;
    if t.role == Role::Follower || t.receiving != Some(joiner.id) {
        return None;
    }
    let last_id = match t.role {
        Role::Leader => world.platoons.get(&target)?.last(),
        _ => target,
    };
    let last = &world.vehicles[&last_id];
    let slot = last.position - cf.vehicle_length - cf.cacc_gap;
    if slot < 0.0 || slot >= joiner.arrival_position {
        return None;
    }
    let index = LaneIndex::build(world);
    if let Some(b) = index.at_or_behind(last.lane, last.position, &[joiner.id, last_id]) {
        let b = &world.vehicles[&b];
        let gap = slot - cf.vehicle_length - b.position;
        if b.role == Role::Follower
            || gap < cf.min_gap
            || !follower_tolerates(
                b.speed,
                gap - cf.min_gap,
                last.speed,
                cf,
                world.config.step_length,
            )
        {
            return None;
        }
    }
    Some((slot, last.lane, last_id))
}

/// Completes joins whose approach time has elapsed by moving the joiner into the
/// slot behind the target's last member. Joins whose slot is unusable are aborted.
pub fn maneuver_step(world: &mut WorldState) -> ManeuverOutcome {
    let mut outcome = ManeuverOutcome::default();
    let due: Vec<(VehicleId, VehicleId)> = world
        .vehicles
        .values()
        .filter_map(|v| match v.maneuver {
            Maneuver::Joining {
                target,
                completion_time,
                ..
            } if completion_time <= world.clock + 1e-9 => Some((v.id, target)),
            _ => None,
        })
        .collect();
    for (joiner, target) in due {
        let slot = world
            .vehicles
            .get(&joiner)
            .and_then(|j| join_slot(world, j, target));
        let Some((position, lane, last_id)) = slot else {
            abort_join(world, joiner);
            outcome.aborted.push(joiner);
            continue;
        };
        let clock = world.clock;
        let (speed, accel) = {
            let last = &world.vehicles[&last_id];
            (last.speed, last.acceleration)
        };

        let t = world
            .vehicles
            .get_mut(&target)
            .expect("checked by join_slot");
        t.receiving = None;
        if t.role == Role::Individual {
            t.role = Role::Leader;
            t.cf_mode = CfMode::Acc;
            t.platoon_id = Some(target);
            t.trip.time_to_platoon.get_or_insert(clock - t.depart_time);
            let desired_speed = t.desired_speed;
            world.platoons.insert(
                target,
                Platoon {
                    members: vec![target],
                    desired_speed,
                },
            );
        }
        world
            .platoons
            .get_mut(&target)
            .expect("leader has a platoon")
            .members
            .push(joiner);

        let j = world.vehicles.get_mut(&joiner).expect("joiner exists");
        j.position = position;
        j.lane = lane;
        j.speed = speed;
        j.acceleration = accel;
        j.role = Role::Follower;
        j.cf_mode = CfMode::Cacc;
        j.maneuver = Maneuver::None;
        j.platoon_id = Some(target);
        j.last_lane_change = clock;
        j.trip.time_to_platoon.get_or_insert(clock - j.depart_time);
        world.counters.joins_completed += 1;
        outcome.completed.push((joiner, target));
    }
    outcome
}

/// Removes a vehicle from the road and repairs everything that referred to it:
/// its join partner, and its platoon (promoting the next member when the leader
/// leaves, dissolving it when one vehicle remains).
pub fn remove_vehicle(world: &mut WorldState, id: VehicleId) -> Option<VehicleState> {
    if world.vehicles.get(&id)?.is_joining() {
        abort_join(world, id);
    }
    let v = world.vehicles.remove(&id)?;
    let mut pending_receiver = v.receiving;

    if let Some(pid) = v.platoon_id {
        if let Some(mut platoon) = world.platoons.remove(&pid) {
            platoon.members.retain(|&m| m != id);
            let was_leader = v.role == Role::Leader;
            if platoon.members.len() >= 2 {
                let leader = platoon.leader();
                for &m in &platoon.members {
                    world
                        .vehicles
                        .get_mut(&m)
                        .expect("member exists")
                        .platoon_id = Some(leader);
                }
                let l = world.vehicles.get_mut(&leader).expect("member exists");
                l.role = Role::Leader;
                l.cf_mode = CfMode::Acc;
                if was_leader {
                    l.receiving = pending_receiver.take();
                }
                world.platoons.insert(leader, platoon);
                if was_leader {
                    retarget(world, leader);
                }
            } else if let Some(&rest) = platoon.members.first() {
                let individual_mode = world.config.approach.individual_cf_mode();
                let r = world.vehicles.get_mut(&rest).expect("member exists");
                r.role = Role::Individual;
                r.cf_mode = individual_mode;
                r.platoon_id = None;
                if was_leader {
                    r.receiving = pending_receiver.take();
                }
                if was_leader {
                    retarget(world, rest);
                }
            }
        }
    }
    if let Some(joiner) = pending_receiver {
        if let Some(j) = world.vehicles.get_mut(&joiner) {
            j.maneuver = Maneuver::None;
            world.counters.joins_aborted += 1;
        }
    }
    world.counters.arrived += 1;
    Some(v)
}

/// Points the joiner approaching `receiver` (if any) at it.
fn retarget(world: &mut WorldState, receiver: VehicleId) {
    let Some(joiner) = world.vehicles[&receiver].receiving else {
        return;
    };
    if let Some(j) = world.vehicles.get_mut(&joiner) {
        if let Maneuver::Joining { target, .. } = &mut j.maneuver {
            *target = receiver;
        }
    }
}

/// Removes every vehicle whose front reached its arrival position.
pub(crate) fn process_arrivals(world: &mut WorldState) -> Vec<VehicleState> {
    let done: Vec<VehicleId> = world
        .vehicles
        .values()
        .filter(|v| v.position >= v.arrival_position)
        .map(|v| v.id)
        .collect();
    done.into_iter()
        .filter_map(|id| remove_vehicle(world, id))
        .collect()
}
