//! Vehicle-to-platoon assignment strategies.
//!
//! Every strategy consumes the same candidate list: eligible `(searcher, target,
//! deviation)` triples where the searcher drives individually and the target is an
//! individual or a platoon leader, neither being in a maneuver. The exact solver
//! additionally gives each searcher a self-assignment with cost 1.0.

mod apply;
mod brute;
mod candidates;
mod exact;
mod greedy;
mod round;
mod solution;

pub use apply::apply_solution;
pub use brute::{brute_force_solve, BRUTE_FORCE_MAX_SEARCHERS};
pub use candidates::{
    candidates_between, collect_candidates_centralized, collect_candidates_distributed,
    scan_centralized, scan_distributed, CandidateEntry, CandidateScan, SearcherTally,
};
pub use exact::{
    build_exact_model, build_model, solve_exact, Constraint, ExactModel, SolveLimits, Variable,
};
pub use greedy::greedy_select;
pub use round::{run_centralized_round, run_distributed_round};
pub use solution::{validate_solution, AssignmentSolution};
