//! Discrete-time freeway simulation.

mod car_following;
mod demand;
mod lanes;
mod maneuver;
mod sim;
mod world;

pub use car_following::{
    acc_accel, acc_speed, braking_distance, cacc_accel, follower_tolerates, krauss_speed,
    safe_speed, LeaderInfo, PlatoonContext,
};
pub use demand::{departure_rate, expected_trip_time, prefill, spawn_step, PendingVehicle};
pub use lanes::{lane_change_step, LaneIndex, LANE_CHANGE_COOLDOWN};
pub use maneuver::{
    join_completion_time, join_duration, maneuver_step, remove_vehicle, ManeuverOutcome,
};
pub use sim::Simulation;
pub use world::{Counters, WorldState};
