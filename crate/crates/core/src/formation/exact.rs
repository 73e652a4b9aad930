use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use super::candidates::{candidates_between, scan_centralized, CandidateEntry};
use super::greedy::greedy_select;
use super::solution::AssignmentSolution;
use crate::model::{FormationParams, PlatoonableEntity, VehicleId};
use crate::traffic::WorldState;

/// One binary decision `x(searcher, target)`. Self-assignments have cost 1.0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Variable {
    pub searcher: VehicleId,
    pub target: VehicleId,
    pub cost: f64,
}

impl Variable {
    pub fn is_self(&self) -> bool {
        self.searcher == self.target
    }
}

/// Constraint rows over variable indices.
#[derive(Debug, Clone, PartialEq)]
pub enum Constraint {
    /// The searcher picks exactly one of `vars`.
    ExactlyOne {
        searcher: VehicleId,
        vars: Vec<usize>,
    },
    /// At most one searcher joins `target`.
    AtMostOneIncoming { target: VehicleId, vars: Vec<usize> },
    /// A searcher that receives a joiner (any of `incoming`) must not join
    /// anyone else (any of `outgoing`).
    JoinExcludesReceive {
        vehicle: VehicleId,
        incoming: Vec<usize>,
        outgoing: Vec<usize>,
    },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExactModel {
    /// Ascending ids.
    pub searchers: Vec<VehicleId>,
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    /// Variable indices of each searcher, ordered by target id.
    by_searcher: Vec<Vec<usize>>,
}

impl ExactModel {
    /// `entries` must be ordered by searcher then target and only name searchers
    /// from `searchers`.
    pub fn from_candidates(searchers: &[VehicleId], entries: &[CandidateEntry]) -> Self {
        let mut searchers = searchers.to_vec();
        searchers.sort();
        searchers.dedup();
        let mut grouped: BTreeMap<VehicleId, Vec<(VehicleId, f64)>> =
            searchers.iter().map(|&s| (s, vec![(s, 1.0)])).collect();
        for e in entries {
            if let Some(row) = grouped.get_mut(&e.searcher) {
                row.push((e.target, e.deviation.total));
            }
        }

        let mut variables = Vec::new();
        let mut by_searcher = Vec::with_capacity(searchers.len());
        for (&s, row) in grouped.iter_mut() {
            row.sort_by_key(|&(t, _)| t);
            let mut indices = Vec::with_capacity(row.len());
            for &(target, cost) in row.iter() {
                indices.push(variables.len());
                variables.push(Variable {
                    searcher: s,
                    target,
                    cost,
                });
            }
            by_searcher.push(indices);
        }

        let mut constraints = Vec::new();
        for (&s, vars) in searchers.iter().zip(&by_searcher) {
            constraints.push(Constraint::ExactlyOne {
                searcher: s,
                vars: vars.clone(),
            });
        }
        let mut incoming: BTreeMap<VehicleId, Vec<usize>> = BTreeMap::new();
        for (i, v) in variables.iter().enumerate() {
            if !v.is_self() {
                incoming.entry(v.target).or_default().push(i);
            }
        }
        for (&target, vars) in &incoming {
            constraints.push(Constraint::AtMostOneIncoming {
                target,
                vars: vars.clone(),
            });
        }
        for (&s, vars) in searchers.iter().zip(&by_searcher) {
            let Some(inc) = incoming.get(&s) else {
                continue;
            };
            let outgoing: Vec<usize> = vars
                .iter()
                .copied()
                .filter(|&i| !variables[i].is_self())
                .collect();
            if !outgoing.is_empty() {
                constraints.push(Constraint::JoinExcludesReceive {
                    vehicle: s,
                    incoming: inc.clone(),
                    outgoing,
                });
            }
        }

        ExactModel {
            searchers,
            variables,
            constraints,
            by_searcher,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.searchers.is_empty()
    }

    /// Variable indices of the `k`-th searcher, ordered by target id.
    pub fn options(&self, k: usize) -> &[usize] {
        &self.by_searcher[k]
    }

    pub fn pair_variable_count(&self) -> usize {
        self.variables.iter().filter(|v| !v.is_self()).count()
    }

    /// Every pair of variables that may not both be set because one makes a
    /// vehicle a joiner and the other makes it a receiver.
    pub fn pairwise_exclusions(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.constraints.iter().flat_map(|c| {
            let pairs: Vec<(usize, usize)> = match c {
                Constraint::JoinExcludesReceive {
                    incoming, outgoing, ..
                } => incoming
                    .iter()
                    .flat_map(|&i| outgoing.iter().map(move |&o| (i, o)))
                    .collect(),
                _ => Vec::new(),
            };
            pairs
        })
    }

    /// Sum of the chosen costs in searcher order. Every solver reports this exact
    /// summation so objectives compare bit for bit.
    pub fn objective_of(&self, choice: &[usize]) -> f64 {
        choice.iter().map(|&i| self.variables[i].cost).sum()
    }

    pub(crate) fn reported_objective_of(&self, choice: &[usize]) -> f64 {
        let mut receivers = std::collections::BTreeSet::new();
        for &i in choice {
            let v = &self.variables[i];
            if !v.is_self() {
                receivers.insert(v.target);
            }
        }
        let credit = self
            .searchers
            .iter()
            .zip(&self.by_searcher)
            .filter(|(s, vars)| receivers.contains(*s) && vars.len() > 1)
            .count();
        self.objective_of(choice) - credit as f64
    }

    /// Variable index per searcher for a complete assignment map.
    pub(crate) fn choice_of(&self, assignments: &BTreeMap<VehicleId, VehicleId>) -> Vec<usize> {
        self.searchers
            .iter()
            .zip(&self.by_searcher)
            .map(|(s, vars)| {
                let target = assignments.get(s).copied().unwrap_or(*s);
                vars.iter()
                    .copied()
                    .find(|&i| self.variables[i].target == target)
                    .unwrap_or_else(|| {
                        vars.iter()
                            .copied()
                            .find(|&i| self.variables[i].is_self())
                            .expect("self option present")
                    })
            })
            .collect()
    }

    pub(crate) fn solution_from_choice(
        &self,
        choice: &[usize],
        gap: f64,
        solve_time: Duration,
        nodes: u64,
        proven_optimal: bool,
    ) -> AssignmentSolution {
        let assignments = choice
            .iter()
            .map(|&i| (self.variables[i].searcher, self.variables[i].target))
            .collect();
        AssignmentSolution {
            assignments,
            objective: self.objective_of(choice),
            reported_objective: self.reported_objective_of(choice),
            gap,
            solve_time,
            nodes,
            proven_optimal,
        }
    }

    /// Searcher indices grouped by the connected components of the candidate
    /// graph, each group ascending, groups ordered by their first searcher.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let ids = self.vehicle_ids();
        let index = |id: VehicleId| ids.binary_search(&id).expect("id collected above");
        let mut parent: Vec<usize> = (0..ids.len()).collect();
        fn root(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for v in self.variables.iter().filter(|v| !v.is_self()) {
            let a = root(&mut parent, index(v.searcher));
            let b = root(&mut parent, index(v.target));
            parent[a.max(b)] = a.min(b);
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (k, &s) in self.searchers.iter().enumerate() {
            let r = root(&mut parent, index(s));
            groups.entry(r).or_default().push(k);
        }
        let mut groups: Vec<Vec<usize>> = groups.into_values().collect();
        groups.sort_by_key(|g| g[0]);
        groups
    }

    /// Every searcher and target id, ascending.
    fn vehicle_ids(&self) -> Vec<VehicleId> {
        let mut ids: Vec<VehicleId> = self
            .variables
            .iter()
            .flat_map(|v| [v.searcher, v.target])
            .collect();
        ids.sort();
        ids.dedup();
        ids
    }

    fn non_self_entries(&self) -> Vec<CandidateEntry> {
        self.variables
            .iter()
            .filter(|v| !v.is_self())
            .map(|v| CandidateEntry {
                searcher: v.searcher,
                target: v.target,
                deviation: crate::similarity::Deviation {
                    speed_dev: f64::NAN,
                    position_dev: f64::NAN,
                    total: v.cost,
                },
            })
            .collect()
    }
}

/// Model over explicit searcher and target entities.
pub fn build_model(
    searchers: &[PlatoonableEntity],
    targets: &[PlatoonableEntity],
    params: &FormationParams,
) -> ExactModel {
    let entries = candidates_between(searchers, targets, params);
    let ids: Vec<VehicleId> = searchers.iter().map(|s| s.id).collect();
    ExactModel::from_candidates(&ids, &entries)
}

pub fn build_exact_model(world: &WorldState, params: &FormationParams) -> ExactModel {
    let scan = scan_centralized(world, params);
    ExactModel::from_candidates(&scan.searchers(), &scan.entries)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveLimits {
    pub time_limit: Duration,
    /// Deterministic budget on search nodes; `None` for unlimited.
    pub node_limit: Option<u64>,
}

impl SolveLimits {
    pub fn unlimited() -> Self {
        SolveLimits {
            time_limit: Duration::MAX,
            node_limit: None,
        }
    }

    pub fn from_params(params: &FormationParams) -> Self {
        SolveLimits {
            time_limit: Duration::from_secs_f64(params.solver_time_limit),
            node_limit: params.solver_node_limit,
        }
    }
}

const PRUNE_EPS: f64 = 1e-9;
const CLOCK_CHECK_MASK: u64 = 127;

#[derive(Clone, Copy)]
struct Opt {
    cost: f64,
    target: usize,
    var: usize,
}

struct SearcherOpts {
    vehicle: usize,
    options: Vec<Opt>,
    self_var: usize,
}

struct Search<'a> {
    model: &'a ExactModel,
    searchers: Vec<SearcherOpts>,
    receiving: Vec<bool>,
    joining: Vec<bool>,
    choice: Vec<usize>,
    best: Vec<usize>,
    best_obj: f64,
    nodes: u64,
    limits: SolveLimits,
    start: Instant,
    aborted: bool,
    open_bound: f64,
}

impl Search<'_> {
    fn bound(&self, depth: usize, cost: f64) -> f64 {
        let mut b = cost;
        for s in &self.searchers[depth..] {
            if self.receiving[s.vehicle] {
                b += 1.0;
                continue;
            }
            let cheapest = s
                .options
                .iter()
                .find(|o| !self.receiving[o.target] && !self.joining[o.target])
                .map_or(1.0, |o| o.cost.min(1.0));
            b += cheapest;
        }
        b
    }

    fn out_of_budget(&self) -> bool {
        if let Some(limit) = self.limits.node_limit {
            if self.nodes > limit {
                return true;
            }
        }
        self.nodes & CLOCK_CHECK_MASK == 0 && self.start.elapsed() >= self.limits.time_limit
    }

    fn better_than_best(&self) -> bool {
        let obj = self.model.objective_of(&self.choice);
        if obj < self.best_obj {
            return true;
        }
        obj == self.best_obj && self.target_ids(&self.choice) < self.target_ids(&self.best)
    }

    fn target_ids(&self, choice: &[usize]) -> Vec<VehicleId> {
        choice
            .iter()
            .map(|&i| self.model.variables[i].target)
            .collect()
    }

    fn dfs(&mut self, depth: usize, cost: f64) {
        self.nodes += 1;
        let bound = self.bound(depth, cost);
        if self.out_of_budget() {
            self.aborted = true;
            self.open_bound = self.open_bound.min(bound);
            return;
        }
        if depth == self.searchers.len() {
            if self.better_than_best() {
                self.best_obj = self.model.objective_of(&self.choice);
                self.best.clone_from(&self.choice);
            }
            return;
        }
        if bound > self.best_obj + PRUNE_EPS {
            return;
        }

        let me = self.searchers[depth].vehicle;
        let n_opts = self.searchers[depth].options.len();
        if !self.receiving[me] {
            for k in 0..n_opts {
                let o = self.searchers[depth].options[k];
                if self.receiving[o.target] || self.joining[o.target] {
                    continue;
                }
                self.choice[depth] = o.var;
                self.joining[me] = true;
                self.receiving[o.target] = true;
                self.dfs(depth + 1, cost + o.cost);
                self.joining[me] = false;
                self.receiving[o.target] = false;
                if self.aborted {
                    // The self branch and later options stay unexplored.
                    self.open_bound = self.open_bound.min(bound);
                    return;
                }
            }
        }
        self.choice[depth] = self.searchers[depth].self_var;
        self.dfs(depth + 1, cost + 1.0);
    }
}

/// Exact branch and bound over searchers in ascending id order.
///
/// Searchers that share no candidate pair, directly or through other searchers,
/// are solved independently, smallest groups first so that a large group cannot
/// starve the others of the shared node budget. Within each group the incumbent starts from the
/// greedy assignment and each node's bound adds, for every unassigned searcher,
/// its cheapest option still feasible at that node. Large groups also start from
/// a maximum-weight matching, which supplies a near-optimal incumbent and a lower
/// bound. Among optimal assignments
/// the one with the lexicographically smallest target vector is returned. When a
/// limit is hit the best assignment found so far is returned with a positive gap.
/// The search stops early enough to return within the time limit.
pub fn solve_exact(model: &ExactModel, limits: SolveLimits) -> AssignmentSolution {
    let start = Instant::now();
    let limits = SolveLimits {
        time_limit: limits.time_limit - finishing_reserve(limits.time_limit),
        ..limits
    };
    let mut choice = vec![usize::MAX; model.searchers.len()];
    let mut nodes = 0u64;
    let mut aborted = false;
    let mut best_total = 0.0;
    let mut lower_total = 0.0;

    let mut groups = model.components();
    groups.sort_by_key(|g| g.len());
    for group in groups {
        if group.len() == 1 && model.options(group[0]).len() == 1 {
            choice[group[0]] = model.options(group[0])[0];
            best_total += 1.0;
            lower_total += 1.0;
            continue;
        }
        let searchers: Vec<VehicleId> = group.iter().map(|&k| model.searchers[k]).collect();
        let entries: Vec<CandidateEntry> = model
            .non_self_entries()
            .into_iter()
            .filter(|e| searchers.binary_search(&e.searcher).is_ok())
            .collect();
        let sub = ExactModel::from_candidates(&searchers, &entries);
        let budget = SolveLimits {
            time_limit: limits.time_limit,
            node_limit: limits.node_limit.map(|n| n.saturating_sub(nodes)),
        };
        let outcome = search_component(&sub, budget, start);
        nodes += outcome.nodes;
        aborted |= outcome.aborted;
        best_total += outcome.best_obj;
        lower_total += outcome.lower;
        for (local, &k) in group.iter().enumerate() {
            let v = sub.variables[outcome.best[local]];
            choice[k] = model
                .options(k)
                .iter()
                .copied()
                .find(|&i| model.variables[i].target == v.target)
                .expect("sub-model option exists in the full model");
        }
    }

    let gap = if aborted && best_total > 0.0 {
        ((best_total - lower_total) / best_total).max(0.0)
    } else {
        0.0
    };
    model.solution_from_choice(&choice, gap, start.elapsed(), nodes, gap == 0.0)
}

/// Share of the time limit left for assembling the result after the search stops.
fn finishing_reserve(limit: Duration) -> Duration {
    (limit / 20).min(Duration::from_secs(1))
}

/// Groups with more searchers than this also get a matching-based incumbent.
const MATCHING_MIN_SEARCHERS: usize = 12;
/// Fixed-point scale of the integer pair weights handed to the matching solver.
const MATCHING_SCALE: f64 = (1u32 << 20) as f64;

/// Since every vehicle takes part in at most one join, an assignment is a
/// matching between vehicles weighted by the saving `1 - cost` over staying
/// alone. Solves that matching on rounded weights and returns its choice vector
/// together with a lower bound on the optimal objective that accounts for the
/// rounding. Gives up with `None` once `deadline` passes.
fn matching_incumbent(
    model: &ExactModel,
    ids: &[VehicleId],
    deadline: Option<Instant>,
) -> Option<(Vec<usize>, f64)> {
    let index = |id: VehicleId| ids.binary_search(&id).expect("id collected above");
    let mut edges: BTreeMap<(usize, usize), (i32, usize)> = BTreeMap::new();
    for (i, v) in model.variables.iter().enumerate() {
        let weight = ((1.0 - v.cost) * MATCHING_SCALE).round() as i32;
        if v.is_self() || weight <= 0 {
            continue;
        }
        let (a, b) = (index(v.searcher), index(v.target));
        let key = (a.min(b), a.max(b));
        let entry = edges.entry(key).or_insert((weight, i));
        if weight > entry.0 {
            *entry = (weight, i);
        }
    }

    let mut assignments: BTreeMap<VehicleId, VehicleId> =
        model.searchers.iter().map(|&s| (s, s)).collect();
    let mut total: i64 = 0;
    if !edges.is_empty() {
        let list = edges.iter().map(|(&(a, b), &(w, _))| (a, b, w)).collect();
        let mates = solve_matching(list, deadline)?;
        for (&(a, b), &(w, var)) in &edges {
            if mates.get(a) == Some(&b) {
                let v = model.variables[var];
                assignments.insert(v.searcher, v.target);
                total += i64::from(w);
            }
        }
    }
    let max_pairs = model.searchers.len().min(ids.len() / 2) as f64;
    let max_saving = (total as f64 + 0.5 * max_pairs) / MATCHING_SCALE;
    let bound = model.searchers.len() as f64 - max_saving;
    Some((model.choice_of(&assignments), bound))
}

/// Maximum-weight matching, computed on a worker thread when a deadline applies
/// so that the caller regains control in time. A late result is discarded.
fn solve_matching(
    edges: Vec<(usize, usize, i32)>,
    deadline: Option<Instant>,
) -> Option<Vec<usize>> {
    let Some(deadline) = deadline else {
        return Some(mwmatching::Matching::new(edges).solve());
    };
    let (tx, rx) = std::sync::mpsc::channel();
    std::thread::spawn(move || {
        let _ = tx.send(mwmatching::Matching::new(edges).solve());
    });
    rx.recv_timeout(deadline.saturating_duration_since(Instant::now()))
        .ok()
}

struct ComponentOutcome {
    best: Vec<usize>,
    best_obj: f64,
    lower: f64,
    nodes: u64,
    aborted: bool,
}

fn search_component(model: &ExactModel, limits: SolveLimits, start: Instant) -> ComponentOutcome {
    let ids = model.vehicle_ids();
    let index = |id: VehicleId| ids.binary_search(&id).expect("id collected above");

    let searchers: Vec<SearcherOpts> = model
        .searchers
        .iter()
        .enumerate()
        .map(|(k, &s)| {
            let vars = model.options(k);
            let self_var = vars
                .iter()
                .copied()
                .find(|&i| model.variables[i].is_self())
                .expect("self option present");
            let mut options: Vec<Opt> = vars
                .iter()
                .copied()
                .filter(|&i| !model.variables[i].is_self())
                .map(|i| Opt {
                    cost: model.variables[i].cost,
                    target: index(model.variables[i].target),
                    var: i,
                })
                .collect();
            options.sort_by(|a, b| {
                a.cost.total_cmp(&b.cost).then(
                    model.variables[a.var]
                        .target
                        .cmp(&model.variables[b.var].target),
                )
            });
            SearcherOpts {
                vehicle: index(s),
                options,
                self_var,
            }
        })
        .collect();

    let greedy = greedy_select(&model.non_self_entries());
    let mut assignments: BTreeMap<VehicleId, VehicleId> =
        model.searchers.iter().map(|&s| (s, s)).collect();
    assignments.extend(greedy);
    let mut incumbent = model.choice_of(&assignments);
    let mut floor = f64::NEG_INFINITY;
    if model.searchers.len() > MATCHING_MIN_SEARCHERS && start.elapsed() < limits.time_limit {
        if let Some((matched, bound)) =
            matching_incumbent(model, &ids, start.checked_add(limits.time_limit))
        {
            if model.objective_of(&matched) < model.objective_of(&incumbent) {
                incumbent = matched;
            }
            floor = bound;
        }
    }

    let n = searchers.len();
    let mut search = Search {
        model,
        receiving: vec![false; ids.len()],
        joining: vec![false; ids.len()],
        choice: vec![usize::MAX; n],
        best_obj: model.objective_of(&incumbent),
        best: incumbent,
        searchers,
        nodes: 0,
        limits,
        start,
        aborted: false,
        open_bound: f64::INFINITY,
    };
    let exhausted = limits.node_limit == Some(0) || start.elapsed() >= limits.time_limit;
    if exhausted {
        search.aborted = true;
        search.open_bound = search.bound(0, 0.0);
    } else {
        search.dfs(0, 0.0);
    }

    let lower = if search.aborted {
        search.open_bound.max(floor).min(search.best_obj)
    } else {
        search.best_obj
    };
    ComponentOutcome {
        best: search.best,
        best_obj: search.best_obj,
        lower,
        nodes: search.nodes,
        aborted: search.aborted,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formation::{brute_force_solve, validate_solution};
    use crate::testing::{
        four_vehicle_params, four_vehicle_world, random_instance, seeded_instance,
    };
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn example_model() -> ExactModel {
        build_exact_model(&four_vehicle_world(), &four_vehicle_params())
    }

    #[test]
    fn example_model_shape() {
        let m = example_model();
        assert_eq!(m.searchers.len(), 4);
        assert_eq!(m.variables.len(), 10);
        assert_eq!(m.pair_variable_count(), 6);
        // 5 receives from 13, 20, 37 and has no outgoing; 13 and 20 both join and receive.
        let exclusions: Vec<(usize, usize)> = m.pairwise_exclusions().collect();
        assert_eq!(exclusions.len(), 4);
    }

    #[test]
    fn example_optimum() {
        let m = example_model();
        let s = solve_exact(&m, SolveLimits::unlimited());
        let joins: Vec<(u32, u32)> = s.joins().iter().map(|(a, b)| (a.0, b.0)).collect();
        assert_eq!(joins, vec![(20, 5), (37, 13)]);
        assert!(s.proven_optimal);
        assert_eq!(s.gap, 0.0);
        validate_solution(&m, &s).unwrap();
        assert!((s.objective - 2.552).abs() < 3e-3);
        assert!((s.reported_objective - 1.552).abs() < 3e-3);
    }

    #[test]
    fn empty_model_solves_trivially() {
        let m = ExactModel::from_candidates(&[], &[]);
        let s = solve_exact(&m, SolveLimits::unlimited());
        assert!(s.assignments.is_empty());
        assert_eq!(s.objective, 0.0);
    }

    #[test]
    fn searcher_without_options_stays_alone() {
        let m = ExactModel::from_candidates(&[VehicleId(3)], &[]);
        let s = solve_exact(&m, SolveLimits::unlimited());
        assert_eq!(s.assignments[&VehicleId(3)], VehicleId(3));
        assert_eq!(s.objective, 1.0);
    }

    #[test]
    fn node_limit_returns_incumbent_with_gap() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let (searchers, targets, params) = random_instance(&mut rng, 40, 10);
        let m = build_model(&searchers, &targets, &params);
        let limited = solve_exact(
            &m,
            SolveLimits {
                time_limit: Duration::MAX,
                node_limit: Some(5),
            },
        );
        validate_solution(&m, &limited).unwrap();
        assert!(limited.nodes <= 6);
        let greedy = AssignmentSolution::from_pairs(&m, &greedy_select(&m.non_self_entries()));
        assert!(limited.objective <= greedy.objective + 1e-12);
        if !limited.proven_optimal {
            assert!(limited.gap > 0.0 && limited.gap < 1.0);
        }
    }

    #[test]
    fn solving_is_deterministic() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let (searchers, targets, params) = random_instance(&mut rng, 12, 4);
        let m = build_model(&searchers, &targets, &params);
        let a = solve_exact(&m, SolveLimits::unlimited());
        let b = solve_exact(&m, SolveLimits::unlimited());
        assert_eq!(a.assignments, b.assignments);
        assert_eq!(a.nodes, b.nodes);
    }

    #[test]
    fn large_instance_is_solved_to_a_tiny_gap() {
        let (searchers, targets, params) = seeded_instance(3, 150, 20);
        let m = build_model(&searchers, &targets, &params);
        let s = solve_exact(&m, SolveLimits::from_params(&FormationParams::default()));
        validate_solution(&m, &s).unwrap();
        assert!(s.gap < 1e-4, "gap {}", s.gap);
        let greedy = AssignmentSolution::from_pairs(&m, &greedy_select(&m.non_self_entries()));
        assert!(s.objective < greedy.objective);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn matching_brackets_the_optimum(seed in any::<u64>(), n in 0usize..=8, k in 0usize..=5) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let (searchers, targets, params) = random_instance(&mut rng, n, k);
            let m = build_model(&searchers, &targets, &params);
            let brute = brute_force_solve(&m).unwrap();
            let (choice, bound) = matching_incumbent(&m, &m.vehicle_ids(), None).unwrap();
            let matched = m.solution_from_choice(&choice, 0.0, Duration::ZERO, 0, false);
            prop_assert!(validate_solution(&m, &matched).is_ok());
            prop_assert!(bound <= brute.objective + 1e-12);
            prop_assert!(matched.objective <= brute.objective + n as f64 / MATCHING_SCALE);
        }

        #[test]
        fn matches_brute_force(seed in any::<u64>(), n in 0usize..=8, k in 0usize..=5) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let (searchers, targets, params) = random_instance(&mut rng, n, k);
            let m = build_model(&searchers, &targets, &params);
            let exact = solve_exact(&m, SolveLimits::unlimited());
            let brute = brute_force_solve(&m).unwrap();
            prop_assert!(validate_solution(&m, &exact).is_ok());
            prop_assert_eq!(exact.objective, brute.objective);
            prop_assert_eq!(&exact.assignments, &brute.assignments);
        }

        #[test]
        fn never_worse_than_greedy(seed in any::<u64>(), n in 0usize..=14, k in 0usize..=5) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let (searchers, targets, params) = random_instance(&mut rng, n, k);
            let m = build_model(&searchers, &targets, &params);
            let exact = solve_exact(&m, SolveLimits::unlimited());
            let greedy = AssignmentSolution::from_pairs(&m, &greedy_select(&m.non_self_entries()));
            prop_assert!(validate_solution(&m, &greedy).is_ok());
            prop_assert!(exact.objective <= greedy.objective + 1e-12);
        }
    }
}
