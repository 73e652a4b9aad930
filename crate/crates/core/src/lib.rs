//! Vehicle-to-platoon assignment and a deterministic freeway platooning simulator.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] holds the domain types (vehicles, platoons, scenario configuration)
//!   and the unified `{id, desired speed, front, rear}` view of a joinable entity.
//! * [`similarity`] computes the weighted speed/position deviation between a
//!   searching vehicle and a target, together with the eligibility windows.
//! * [`formation`] implements the three assignment strategies: an exact
//!   branch-and-bound solver, a centralized greedy heuristic and a distributed
//!   greedy heuristic, plus an exhaustive oracle used for verification.
//! * [`traffic`] is the discrete-time freeway simulation (demand, car following,
//!   lane changes, join/leave emulation).
//! * [`metrics`] records per-vehicle and per-execution measurements, the fuel
//!   model, aggregation and CSV output.

pub mod error;
pub mod formation;
pub mod metrics;
pub mod model;
pub mod similarity;
pub mod testing;
pub mod traffic;

pub use error::{Error, Result};
pub use formation::{
    apply_solution, brute_force_solve, build_exact_model, collect_candidates_centralized,
    collect_candidates_distributed, greedy_select, solve_exact, AssignmentSolution, CandidateEntry,
    ExactModel, SolveLimits,
};
pub use metrics::{MetricsLedger, Summary, VehicleTripRecord};
pub use model::{
    entity_view, Approach, CarFollowingParams, FormationParams, Platoon, PlatoonableEntity,
    ScenarioConfig, VehicleId, VehicleState,
};
pub use similarity::{deviation, is_eligible, position_deviation, speed_deviation, Deviation};
pub use traffic::{departure_rate, Simulation, WorldState};
