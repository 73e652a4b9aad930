use std::collections::{BTreeMap, BTreeSet};
use std::time::Duration;

use super::exact::ExactModel;
use crate::model::VehicleId;

#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentSolution {
    /// Chosen target per searcher; a searcher mapped to itself stays individual.
    pub assignments: BTreeMap<VehicleId, VehicleId>,
    /// Sum of chosen costs, self-assignments included.
    pub objective: f64,
    /// `objective` without the self-assignment cost of searchers that receive a
    /// joiner while also having a non-self option.
    pub reported_objective: f64,
    /// Relative distance to the best lower bound, 0 when optimality is proven.
    pub gap: f64,
    pub solve_time: Duration,
    pub nodes: u64,
    pub proven_optimal: bool,
}

impl AssignmentSolution {
    /// Non-self pairs in searcher order.
    pub fn joins(&self) -> Vec<(VehicleId, VehicleId)> {
        self.assignments
            .iter()
            .filter(|(s, t)| s != t)
            .map(|(&s, &t)| (s, t))
            .collect()
    }

    /// Solution for `model` that realises `pairs` and self-assigns everyone else.
    pub fn from_pairs(model: &ExactModel, pairs: &[(VehicleId, VehicleId)]) -> Self {
        let mut assignments: BTreeMap<VehicleId, VehicleId> =
            model.searchers.iter().map(|&s| (s, s)).collect();
        for &(s, t) in pairs {
            assignments.insert(s, t);
        }
        let choice = model.choice_of(&assignments);
        let objective = model.objective_of(&choice);
        AssignmentSolution {
            reported_objective: model.reported_objective_of(&choice),
            objective,
            assignments,
            gap: 0.0,
            solve_time: Duration::ZERO,
            nodes: 0,
            proven_optimal: false,
        }
    }
}

/// Checks the assignment structure directly against the model's variables:
/// every searcher picks exactly one of its own options, a target receives at most
/// one joiner, and a vehicle that receives a joiner does not join anyone itself.
pub fn validate_solution(model: &ExactModel, solution: &AssignmentSolution) -> Result<(), String> {
    let searchers: BTreeSet<VehicleId> = model.searchers.iter().copied().collect();
    let assigned: BTreeSet<VehicleId> = solution.assignments.keys().copied().collect();
    if searchers != assigned {
        return Err(format!(
            "assigned searchers {assigned:?} differ from model searchers {searchers:?}"
        ));
    }
    let pairs: BTreeSet<(VehicleId, VehicleId)> = model
        .variables
        .iter()
        .map(|v| (v.searcher, v.target))
        .collect();
    let mut incoming: BTreeMap<VehicleId, usize> = BTreeMap::new();
    for (&s, &t) in &solution.assignments {
        if !pairs.contains(&(s, t)) {
            return Err(format!("{s} -> {t} is not an option"));
        }
        if s != t {
            *incoming.entry(t).or_default() += 1;
        }
    }
    for (&t, &n) in &incoming {
        if n > 1 {
            return Err(format!("{t} receives {n} joiners"));
        }
        if let Some(&own) = solution.assignments.get(&t) {
            if own != t {
                return Err(format!("{t} receives a joiner but joins {own}"));
            }
        }
    }
    Ok(())
}
