//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use platoon_cli::{run_scenario, RunOptions};
use platoon_core::formation::{build_model, candidates_between, validate_solution};
use platoon_core::metrics::{aggregate, fuel_step, platoon_fuel_factor, FuelModel};
use platoon_core::model::PlatoonPosition;
use platoon_core::similarity::Deviation;
use platoon_core::testing::{
    four_vehicle_entities, four_vehicle_params, four_vehicle_world, seeded_instance,
    SettledGapMonitor,
};
use platoon_core::{
    brute_force_solve, collect_candidates_centralized, departure_rate, greedy_select, solve_exact,
    Approach, AssignmentSolution, CandidateEntry, ExactModel, ScenarioConfig, Simulation,
    SolveLimits, Summary, VehicleId,
};
use rayon::prelude::*;

/// Oracle instances for criteria 3 and 4.
const INSTANCES: u64 = 1000;
const SETTLED_GAP_TOLERANCE: f64 = 0.1;
const FUEL_TOLERANCE: f64 = 5e-5;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn truncate3(x: f64) -> f64 {
    (x * 1000.0 + 1e-9).floor() / 1000.0
}

fn golden() -> Outcome {
    let start = Instant::now();
    let printed = [
        (13, 5, 0.519),
        (20, 5, 0.31),
        (20, 13, 0.188),
        (37, 5, 0.66),
        (37, 13, 0.242),
        (37, 20, 0.33),
    ];
    let params = four_vehicle_params();
    let entries = collect_candidates_centralized(&four_vehicle_world(), &params);
    let pairs: Vec<(u32, u32)> = entries.iter().map(|e| (e.searcher.0, e.target.0)).collect();
    let expected: Vec<(u32, u32)> = printed.iter().map(|&(c, t, _)| (c, t)).collect();
    let mut problems = Vec::new();
    if pairs != expected {
        problems.push(format!("candidates {pairs:?}"));
    }
    let truncated: Vec<CandidateEntry> = entries
        .iter()
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
                ..*e
            }
        })
        .collect();
    for (e, &(c, t, value)) in truncated.iter().zip(&printed) {
        if (e.deviation.total - value).abs() > 1e-9 {
            problems.push(format!("f({c},{t}) = {:.3}", e.deviation.total));
        }
    }

    let ids = |p: &[(u32, u32)]| -> Vec<(VehicleId, VehicleId)> {
        p.iter()
            .map(|&(a, b)| (VehicleId(a), VehicleId(b)))
            .collect()
    };
    let searchers: Vec<VehicleId> = four_vehicle_entities().iter().map(|e| e.id).collect();
    let model = ExactModel::from_candidates(&searchers, &truncated);
    let exact = solve_exact(&model, SolveLimits::unlimited());
    if exact.joins() != ids(&[(20, 5), (37, 13)]) || (exact.reported_objective - 1.552).abs() > 1e-9
    {
        problems.push(format!(
            "solver {:?} {}",
            exact.joins(),
            exact.reported_objective
        ));
    }
    let greedy_pairs = greedy_select(&truncated);
    let greedy = AssignmentSolution::from_pairs(&model, &greedy_pairs);
    if greedy_pairs != ids(&[(13, 5), (37, 20)]) || (greedy.reported_objective - 1.849).abs() > 1e-9
    {
        problems.push(format!(
            "greedy {greedy_pairs:?} {}",
            greedy.reported_objective
        ));
    }
    let elapsed = start.elapsed();
    if elapsed >= Duration::from_secs(1) {
        problems.push(format!("took {elapsed:?}"));
    }
    outcome(
        problems.is_empty(),
        if problems.is_empty() {
            format!(
                "six pairs match, solver 1.552, greedy 1.849 in {:.1} ms",
                elapsed.as_secs_f64() * 1e3
            )
        } else {
            problems.join("; ")
        },
    )
}

fn demand() -> Outcome {
    let rates: Vec<u64> = [5.0, 10.0, 15.0, 20.0, 25.0]
        .iter()
        .map(|&d| {
            departure_rate(&ScenarioConfig {
                target_density: d,
                ..ScenarioConfig::default()
            })
        })
        .collect();
    outcome(
        rates == [3564, 7129, 10693, 14257, 17822],
        format!("rates {rates:?} veh/h"),
    )
}

struct OracleStats {
    mismatches: Vec<u64>,
    invalid: Vec<u64>,
    greedy_worse: u64,
    exact_worse: Vec<u64>,
    elapsed: Duration,
}

fn oracle_runs() -> OracleStats {
    let start = Instant::now();
    let mut stats = OracleStats {
        mismatches: Vec::new(),
        invalid: Vec::new(),
        greedy_worse: 0,
        exact_worse: Vec::new(),
        elapsed: Duration::ZERO,
    };
    for seed in 0..INSTANCES {
        let (s, t, params) = seeded_instance(seed, (seed % 9) as usize, (seed / 9 % 4) as usize);
        let model = build_model(&s, &t, &params);
        let exact = solve_exact(&model, SolveLimits::unlimited());
        let brute = brute_force_solve(&model).expect("at most eight searchers");
        let greedy = AssignmentSolution::from_pairs(
            &model,
            &greedy_select(&candidates_between(&s, &t, &params)),
        );
        if exact.objective != brute.objective {
            stats.mismatches.push(seed);
        }
        if [&exact, &brute, &greedy]
            .iter()
            .any(|sol| validate_solution(&model, sol).is_err())
        {
            stats.invalid.push(seed);
        }
        if exact.objective > greedy.objective {
            stats.exact_worse.push(seed);
        } else if exact.objective < greedy.objective {
            stats.greedy_worse += 1;
        }
    }
    stats.elapsed = start.elapsed();
    stats
}

fn oracle(stats: &OracleStats) -> Outcome {
    let pass = stats.mismatches.is_empty()
        && stats.invalid.is_empty()
        && stats.elapsed < Duration::from_secs(60);
    outcome(
        pass,
        format!(
            "{INSTANCES} instances, {} objective mismatches, {} invalid solutions, {:.2} s",
            stats.mismatches.len(),
            stats.invalid.len(),
            stats.elapsed.as_secs_f64()
        ),
    )
}

fn dominance(stats: &OracleStats) -> Outcome {
    outcome(
        stats.exact_worse.is_empty() && stats.greedy_worse > 0,
        format!(
            "exact worse than greedy on {} instances, strictly better on {}",
            stats.exact_worse.len(),
            stats.greedy_worse
        ),
    )
}

fn desk(approach: Approach, density: f64) -> ScenarioConfig {
    let mut c = ScenarioConfig::desk();
    c.approach = approach;
    c.target_density = density;
    c.formation.speed_window = 0.2;
    c.record_solve_time = false;
    c
}

fn summarize(config: ScenarioConfig) -> Result<Summary, String> {
    let mut sim = Simulation::new(config.clone()).map_err(|e| e.to_string())?;
    sim.run().map_err(|e| format!("{}: {e}", config.approach))?;
    aggregate(&sim.ledger, &config)
        .pop()
        .ok_or_else(|| format!("{}: nothing recorded", config.approach))
}

fn knowledge(runs: &BTreeMap<Approach, Result<Summary, String>>) -> Outcome {
    let get = |a: Approach| runs[&a].as_ref().map_err(Clone::clone);
    let (dist, greedy, solver) = match (
        get(Approach::DistributedGreedy),
        get(Approach::CentralizedGreedy),
        get(Approach::CentralizedSolver),
    ) {
        (Ok(d), Ok(g), Ok(s)) => (d, g, s),
        (d, g, s) => {
            let errors: Vec<String> = [d.err(), g.err(), s.err()].into_iter().flatten().collect();
            return outcome(false, errors.join("; "));
        }
    };
    let mut pass = true;
    let mut parts = vec![format!(
        "distributed found {:.2} filtered {:.2}",
        dist.found_mean, dist.filtered_mean
    )];
    for c in [greedy, solver] {
        pass &= dist.found_mean < c.found_mean && c.filtered_mean >= 10.0 * dist.filtered_mean;
        parts.push(format!(
            "{} found {:.2} filtered {:.1} ({:.0}x)",
            c.approach,
            c.found_mean,
            c.filtered_mean,
            c.filtered_mean / dist.filtered_mean
        ));
    }
    outcome(pass, parts.join(", "))
}

fn benefit(runs: &BTreeMap<Approach, Result<Summary, String>>) -> Outcome {
    let human = match &runs[&Approach::Human] {
        Ok(h) => h,
        Err(e) => return outcome(false, e.clone()),
    };
    let mut pass = true;
    let mut parts = vec![format!("human |dev| {:.4}", human.abs_deviation_mean)];
    for approach in Approach::ALL.into_iter().filter(|a| a.is_platooning()) {
        match &runs[&approach] {
            Ok(s) => {
                pass &= s.abs_deviation_mean < human.abs_deviation_mean;
                parts.push(format!("{approach} {:.4}", s.abs_deviation_mean));
                if approach == Approach::CentralizedSolver {
                    pass &= s.window_violation < 0.10;
                    parts.push(format!("solver window violation {:.3}", s.window_violation));
                }
            }
            Err(e) => {
                pass = false;
                parts.push(e.clone());
            }
        }
    }
    outcome(pass, parts.join(", "))
}

fn invariants_for(approach: Approach) -> Result<String, String> {
    let mut sim = Simulation::new(desk(approach, 10.0)).map_err(|e| e.to_string())?;
    let mut monitor = SettledGapMonitor::new(60.0);
    for _ in 0..sim.total_steps() {
        sim.step().map_err(|e| format!("{approach}: {e}"))?;
        monitor.observe(&sim.world);
    }
    let c = &sim.world.counters;
    if c.spawned + c.prefilled != c.arrived + sim.world.population() {
        return Err(format!("{approach}: vehicle count not conserved"));
    }
    if approach.is_platooning() && monitor.checked == 0 {
        return Err(format!("{approach}: no settled platoon gaps observed"));
    }
    if monitor.worst_error > SETTLED_GAP_TOLERANCE {
        return Err(format!(
            "{approach}: settled gap off by {:.3} m",
            monitor.worst_error
        ));
    }

    let mut short = desk(approach, 10.0);
    short.sim_duration = 600.0;
    short.warmup = 200.0;
    let options = RunOptions {
        trace: true,
        figure: None,
    };
    let dirs = [tempfile::tempdir(), tempfile::tempdir()].map(|d| d.expect("temporary directory"));
    for dir in &dirs {
        run_scenario(&short, dir.path(), &options).map_err(|e| format!("{approach}: {e}"))?;
    }
    if !same_files(dirs[0].path(), dirs[1].path()) {
        return Err(format!("{approach}: repeated run differs"));
    }
    Ok(format!("{approach} gap error {:.4} m", monitor.worst_error))
}

fn same_files(a: &Path, b: &Path) -> bool {
    let names = |dir: &Path| -> Vec<_> {
        let mut v: Vec<_> = std::fs::read_dir(dir)
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        v.sort();
        v
    };
    let files = names(a);
    files == names(b)
        && files.len() >= 5
        && files
            .iter()
            .all(|f| std::fs::read(a.join(f)).unwrap() == std::fs::read(b.join(f)).unwrap())
}

fn simulation_invariants() -> Outcome {
    let results: Vec<Result<String, String>> = Approach::ALL
        .par_iter()
        .map(|&a| invariants_for(a))
        .collect();
    let pass = results.iter().all(Result::is_ok);
    let detail: Vec<String> = results
        .into_iter()
        .map(|r| r.unwrap_or_else(|e| e))
        .collect();
    outcome(pass, detail.join(", "))
}

fn fuel_ratios() -> Outcome {
    let mut sim = match Simulation::new(desk(Approach::Human, 10.0)) {
        Ok(s) => s,
        Err(e) => return outcome(false, e.to_string()),
    };
    let id = sim
        .world
        .vehicles
        .values()
        .max_by(|a, b| {
            (a.arrival_position - a.position).total_cmp(&(b.arrival_position - b.position))
        })
        .map(|v| v.id)
        .expect("pre-filled road");
    let mut trace = Vec::new();
    while let Some(v) = sim.world.vehicles.get(&id) {
        trace.push((v.speed, v.acceleration));
        if sim.world.step_index >= sim.total_steps() || sim.step().is_err() {
            break;
        }
    }
    let model = FuelModel::default();
    let replay = |p: PlatoonPosition| -> f64 {
        trace
            .iter()
            .map(|&(v, a)| fuel_step(&model, v, a, p, 1.0))
            .sum()
    };
    let solo = replay(PlatoonPosition::Solo);
    let mut pass = solo > 0.0 && trace.len() > 30;
    let mut parts = vec![format!("{} s trace", trace.len())];
    for (position, expected) in [
        (PlatoonPosition::Solo, 1.0),
        (PlatoonPosition::Leader, 0.9448),
        (PlatoonPosition::Middle, 0.8758),
        (PlatoonPosition::Last, 0.8942),
    ] {
        let ratio = replay(position) / solo;
        pass &= (ratio - expected).abs() < FUEL_TOLERANCE
            && (platoon_fuel_factor(position) - expected).abs() < 1e-12;
        parts.push(format!("{position:?} {ratio:.4}"));
    }
    outcome(pass, parts.join(", "))
}

fn median_solve_time(size: usize, limits: SolveLimits) -> (f64, f64, bool) {
    let mut times = Vec::new();
    let mut valid = true;
    for seed in 0..5 {
        let (s, t, params) = seeded_instance(1000 + seed, size, size / 5);
        let model = build_model(&s, &t, &params);
        let start = Instant::now();
        let sol = solve_exact(&model, limits);
        times.push(start.elapsed().as_secs_f64());
        valid &= validate_solution(&model, &sol).is_ok();
    }
    times.sort_by(f64::total_cmp);
    (times[times.len() / 2], times[times.len() - 1], valid)
}

fn solver_scaling() -> Outcome {
    let mut problems = Vec::new();
    let limits = SolveLimits {
        time_limit: Duration::from_secs(5),
        node_limit: Some(50_000),
    };
    let limit = limits.time_limit.as_secs_f64();
    let mut medians = Vec::new();
    for size in [8, 16, 32, 64, 128, 256] {
        let (median, max, valid) = median_solve_time(size, limits);
        medians.push(median);
        if max > limit || !valid {
            problems.push(format!("size {size}: max {max:.3} s, valid {valid}"));
        }
    }
    if medians.last() <= medians.first() {
        problems.push(format!("median runtimes {medians:?} do not grow"));
    }

    let (s, t, params) = seeded_instance(7, 1000, 100);
    let model = build_model(&s, &t, &params);
    let tight = SolveLimits {
        time_limit: Duration::from_millis(500),
        node_limit: None,
    };
    let start = Instant::now();
    let sol = solve_exact(&model, tight);
    let elapsed = start.elapsed().as_secs_f64();
    if elapsed > tight.time_limit.as_secs_f64() {
        problems.push(format!("oversized instance took {elapsed:.3} s"));
    }
    if sol.gap <= 0.0 || sol.gap.is_nan() || sol.proven_optimal {
        problems.push(format!("oversized instance gap {}", sol.gap));
    }
    if let Err(e) = validate_solution(&model, &sol) {
        problems.push(format!("oversized incumbent invalid: {e}"));
    }
    let detail = format!(
        "median ms by size 8..256: [{}]; 1000 searchers stopped at {:.3} s with gap {:.2e}",
        medians
            .iter()
            .map(|m| format!("{:.2}", m * 1e3))
            .collect::<Vec<_>>()
            .join(", "),
        elapsed,
        sol.gap
    );
    if problems.is_empty() {
        outcome(true, detail)
    } else {
        outcome(false, format!("{}; {detail}", problems.join("; ")))
    }
}

fn main() -> ExitCode {
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    results.push((1, "worked example", golden()));
    results.push((2, "departure rates", demand()));
    let stats = oracle_runs();
    results.push((3, "oracle equivalence", oracle(&stats)));
    results.push((4, "solver dominates greedy", dominance(&stats)));

    let dense: BTreeMap<Approach, Result<Summary, String>> = [
        Approach::Human,
        Approach::DistributedGreedy,
        Approach::CentralizedGreedy,
        Approach::CentralizedSolver,
    ]
    .par_iter()
    .map(|&a| (a, summarize(desk(a, 15.0))))
    .collect();
    results.push((5, "knowledge ordering", knowledge(&dense)));
    results.push((6, "simulation invariants", simulation_invariants()));
    results.push((7, "fuel ratios", fuel_ratios()));
    results.push((8, "platooning benefit", benefit(&dense)));
    results.push((9, "solver scaling", solver_scaling()));

    let mut failed = 0;
    for (n, name, o) in &results {
        println!(
            "{} criterion {n} ({name}): {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
