use crate::model::{Maneuver, VehicleId};
use crate::traffic::{join_completion_time, WorldState};

/// Starts a join maneuver for every non-self pair whose searcher and target are
/// both still available, in the given order. Returns the number of started joins.
pub fn apply_solution(world: &mut WorldState, pairs: &[(VehicleId, VehicleId)]) -> usize {
    let mut started = 0;
    for &(searcher, target) in pairs {
        if searcher == target {
            continue;
        }
        let available = world
            .vehicles
            .get(&searcher)
            .is_some_and(|v| v.can_search())
            && world
                .vehicles
                .get(&target)
                .is_some_and(|v| v.can_be_target());
        if !available {
            continue;
        }
        let Some(completion_time) = join_completion_time(world, searcher, target) else {
            continue;
        };
        let start_time = world.clock;
        if let Some(v) = world.vehicles.get_mut(&searcher) {
            v.maneuver = Maneuver::Joining {
                target,
                start_time,
                completion_time,
            };
        }
        if let Some(t) = world.vehicles.get_mut(&target) {
            t.receiving = Some(searcher);
        }
        world.counters.joins_started += 1;
        started += 1;
    }
    started
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formation::{build_exact_model, solve_exact, SolveLimits};
    use crate::testing::{four_vehicle_params, four_vehicle_world};

    #[test]
    fn solver_pairs_both_start() {
        let mut world = four_vehicle_world();
        let m = build_exact_model(&world, &four_vehicle_params());
        let s = solve_exact(&m, SolveLimits::unlimited());
        assert_eq!(apply_solution(&mut world, &s.joins()), 2);
        assert!(world.vehicles[&VehicleId(20)].is_joining());
        assert_eq!(world.vehicles[&VehicleId(5)].receiving, Some(VehicleId(20)));
        assert_eq!(
            world.vehicles[&VehicleId(13)].receiving,
            Some(VehicleId(37))
        );
    }

    #[test]
    fn self_pairs_start_nothing() {
        let mut world = four_vehicle_world();
        assert_eq!(
            apply_solution(&mut world, &[(VehicleId(5), VehicleId(5))]),
            0
        );
        assert!(world.vehicles.values().all(|v| !v.in_maneuver()));
    }

    #[test]
    fn busy_target_skips_later_pair() {
        let mut world = four_vehicle_world();
        let pairs = [
            (VehicleId(13), VehicleId(5)),
            (VehicleId(20), VehicleId(13)),
        ];
        assert_eq!(apply_solution(&mut world, &pairs), 1);
        assert!(!world.vehicles[&VehicleId(20)].is_joining());
    }

    #[test]
    fn completion_time_is_in_the_future() {
        let mut world = four_vehicle_world();
        apply_solution(&mut world, &[(VehicleId(37), VehicleId(13))]);
        match world.vehicles[&VehicleId(37)].maneuver {
            Maneuver::Joining {
                completion_time,
                start_time,
                ..
            } => {
                assert!(completion_time >= start_time + 1.0)
            }
            Maneuver::None => panic!("join not started"),
        }
    }
}
