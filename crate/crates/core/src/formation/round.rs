use std::time::{Duration, Instant};

use super::apply::apply_solution;
use super::candidates::{scan_centralized, scan_distributed, CandidateScan};
use super::exact::{solve_exact, ExactModel, SolveLimits};
use super::greedy::greedy_select;
use crate::metrics::FormationRecord;
use crate::model::{Approach, VehicleId};
use crate::traffic::WorldState;

fn tally_moments(scan: &CandidateScan, record: &mut FormationRecord) {
    for t in &scan.tallies {
        record.searchers += 1;
        record.found += t.found as u64;
        record.filtered += t.filtered as u64;
        record.found_sq += (t.found * t.found) as u64;
        record.filtered_sq += (t.filtered * t.filtered) as u64;
    }
}

/// Full and reported objective of a greedy choice, without building a model.
fn greedy_objectives(scan: &CandidateScan, pairs: &[(VehicleId, VehicleId)]) -> (f64, f64) {
    let mut full = 0.0;
    let mut credit = 0usize;
    for t in &scan.tallies {
        let joined = pairs.iter().find(|(s, _)| *s == t.searcher);
        full += match joined {
            Some(&(s, target)) => scan
                .entries
                .iter()
                .find(|e| e.searcher == s && e.target == target)
                .map_or(1.0, |e| e.deviation.total),
            None => 1.0,
        };
        let receives = pairs.iter().any(|(_, target)| *target == t.searcher);
        if receives && t.found > 0 {
            credit += 1;
        }
    }
    (full, full - credit as f64)
}

/// One synchronized execution of a centralized strategy over the whole road.
pub fn run_centralized_round(world: &mut WorldState, approach: Approach) -> FormationRecord {
    let params = world.config.formation;
    let scan = scan_centralized(world, &params);
    let mut record = FormationRecord::new(world.clock, approach);
    tally_moments(&scan, &mut record);

    let (pairs, solve_time) = match approach {
        Approach::CentralizedSolver => {
            let started = Instant::now();
            let model = ExactModel::from_candidates(&scan.searchers(), &scan.entries);
            let solution = solve_exact(&model, SolveLimits::from_params(&params));
            let elapsed = started.elapsed();
            record.objective = solution.objective;
            record.reported_objective = solution.reported_objective;
            record.gap = solution.gap;
            record.nodes = solution.nodes;
            (solution.joins(), elapsed)
        }
        _ => {
            let started = Instant::now();
            let pairs = greedy_select(&scan.entries);
            let elapsed = started.elapsed();
            let (full, reported) = greedy_objectives(&scan, &pairs);
            record.objective = full;
            record.reported_objective = reported;
            (pairs, elapsed)
        }
    };
    record.solve_time = measured(world, solve_time);
    record.joins = apply_solution(world, &pairs) as u64;
    record
}

/// Executions of every vehicle in `due`, each with its own local view, merged
/// into one record. Each vehicle acts on the state left by the previous one.
pub fn run_distributed_round(world: &mut WorldState, due: &[VehicleId]) -> FormationRecord {
    let params = world.config.formation;
    let mut record = FormationRecord::new(world.clock, Approach::DistributedGreedy);
    let mut total_time = Duration::ZERO;
    for &ego in due {
        let Ok(scan) = scan_distributed(ego, world, &params) else {
            continue;
        };
        tally_moments(&scan, &mut record);
        let started = Instant::now();
        let pairs = greedy_select(&scan.entries);
        total_time += started.elapsed();
        let (full, reported) = greedy_objectives(&scan, &pairs);
        record.objective += full;
        record.reported_objective += reported;
        record.joins += apply_solution(world, &pairs) as u64;
    }
    record.solve_time = measured(world, total_time);
    record
}

fn measured(world: &WorldState, elapsed: Duration) -> f64 {
    if world.config.record_solve_time {
        elapsed.as_secs_f64()
    } else {
        0.0
    }
}
