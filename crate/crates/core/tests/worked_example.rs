use platoon_core::formation::{collect_candidates_distributed, validate_solution};
use platoon_core::similarity::Deviation;
use platoon_core::testing::{four_vehicle_entities, four_vehicle_params, four_vehicle_world};
use platoon_core::{
    collect_candidates_centralized, greedy_select, solve_exact, AssignmentSolution, CandidateEntry,
    ExactModel, SolveLimits, VehicleId,
};

/// `(searcher, target, printed total)` of the six possible assignments.
const PRINTED: [(u32, u32, f64); 6] = [
    (13, 5, 0.519),
    (20, 5, 0.31),
    (20, 13, 0.188),
    (37, 5, 0.66),
    (37, 13, 0.242),
    (37, 20, 0.33),
];

fn ids(pairs: &[(u32, u32)]) -> Vec<(VehicleId, VehicleId)> {
    pairs
        .iter()
        .map(|&(a, b)| (VehicleId(a), VehicleId(b)))
        .collect()
}

fn truncate3(x: f64) -> f64 {
    (x * 1000.0 + 1e-9).floor() / 1000.0
}

/// Candidate list with every deviation component and total cut to three decimals.
fn truncated_candidates() -> Vec<CandidateEntry> {
    let params = four_vehicle_params();
    collect_candidates_centralized(&four_vehicle_world(), &params)
        .into_iter()
        .map(|e| {
            let speed_dev = truncate3(e.deviation.speed_dev);
            let position_dev = truncate3(e.deviation.position_dev);
            let total = truncate3(params.alpha * speed_dev + (1.0 - params.alpha) * position_dev);
            CandidateEntry {
                deviation: Deviation {
                    speed_dev,
                    position_dev,
                    total,
                },
                ..e
            }
        })
        .collect()
}

fn searchers() -> Vec<VehicleId> {
    four_vehicle_entities().iter().map(|e| e.id).collect()
}

#[test]
fn candidate_list_matches_the_six_printed_pairs() {
    let entries = collect_candidates_centralized(&four_vehicle_world(), &four_vehicle_params());
    let pairs: Vec<(u32, u32)> = entries.iter().map(|e| (e.searcher.0, e.target.0)).collect();
    let expected: Vec<(u32, u32)> = PRINTED.iter().map(|&(c, t, _)| (c, t)).collect();
    assert_eq!(pairs, expected);
    for (e, &(_, _, printed)) in entries.iter().zip(&PRINTED) {
        assert!(
            (e.deviation.total - printed).abs() < 1.5e-3,
            "{:?} -> {} vs {printed}",
            (e.searcher, e.target),
            e.deviation.total
        );
    }
}

#[test]
fn three_decimal_components_reproduce_printed_totals_exactly() {
    for (e, &(_, _, printed)) in truncated_candidates().iter().zip(&PRINTED) {
        assert!(
            (e.deviation.total - printed).abs() < 1e-12,
            "{} vs {printed}",
            e.deviation.total
        );
    }
}

#[test]
fn exact_solver_picks_the_optimal_pairs() {
    let model = ExactModel::from_candidates(&searchers(), &truncated_candidates());
    let solution = solve_exact(&model, SolveLimits::unlimited());
    validate_solution(&model, &solution).unwrap();
    assert_eq!(solution.joins(), ids(&[(20, 5), (37, 13)]));
    assert!((solution.objective - 2.552).abs() < 1e-12);
    assert!((solution.reported_objective - 1.552).abs() < 1e-12);
    assert_eq!(solution.gap, 0.0);

    let entries = collect_candidates_centralized(&four_vehicle_world(), &four_vehicle_params());
    let model = ExactModel::from_candidates(&searchers(), &entries);
    let solution = solve_exact(&model, SolveLimits::unlimited());
    assert_eq!(solution.joins(), ids(&[(20, 5), (37, 13)]));
    assert!((solution.reported_objective - 1.552).abs() < 3e-3);
}

#[test]
fn greedy_follows_searcher_order() {
    let entries = truncated_candidates();
    let pairs = greedy_select(&entries);
    assert_eq!(pairs, ids(&[(13, 5), (37, 20)]));
    let model = ExactModel::from_candidates(&searchers(), &entries);
    let greedy = AssignmentSolution::from_pairs(&model, &pairs);
    validate_solution(&model, &greedy).unwrap();
    assert!((greedy.objective - 2.849).abs() < 1e-12);
    assert!((greedy.reported_objective - 1.849).abs() < 1e-12);

    let exact = solve_exact(&model, SolveLimits::unlimited());
    assert!(exact.objective < greedy.objective);
}

#[test]
fn distributed_view_of_the_rearmost_vehicle() {
    let mut world = four_vehicle_world();
    let found = |world: &platoon_core::WorldState| -> Vec<(u32, u32)> {
        collect_candidates_distributed(VehicleId(37), world, &world.config.formation)
            .unwrap()
            .iter()
            .map(|e| (e.searcher.0, e.target.0))
            .collect()
    };
    world.config.formation.comm_range = 500.0;
    assert_eq!(found(&world), vec![(37, 5), (37, 13), (37, 20)]);
    world.config.formation.comm_range = 250.0;
    assert_eq!(found(&world), vec![(37, 13), (37, 20)]);
}
