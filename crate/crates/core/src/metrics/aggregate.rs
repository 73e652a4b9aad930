use super::{travel_time_ratio, window_violation_ratio, MetricsLedger};
use crate::model::{Approach, ScenarioConfig};

/// Aggregate statistics of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub approach: Approach,
    pub speed_window: f64,
    pub density: f64,
    pub seed: u64,
    pub vehicles: usize,
    pub executions: usize,
    pub found_mean: f64,
    pub found_std: f64,
    pub filtered_mean: f64,
    pub filtered_std: f64,
    pub joins: u64,
    pub time_to_platoon_mean: f64,
    pub time_to_platoon_std: f64,
    pub platooned_share: f64,
    pub platoon_size_mean: f64,
    pub platoon_size_median: f64,
    pub platoon_size_q3: f64,
    pub platoon_size_max: f64,
    pub platoon_share: f64,
    pub observed_density: f64,
    pub flow: f64,
    pub departure_flow: f64,
    pub mean_speed: f64,
    pub deviation_mean: f64,
    pub deviation_q1: f64,
    pub deviation_median: f64,
    pub deviation_q3: f64,
    pub abs_deviation_mean: f64,
    pub window_violation: f64,
    pub travel_time_ratio_mean: f64,
    pub travel_time_ratio_q1: f64,
    pub travel_time_ratio_median: f64,
    pub travel_time_ratio_q3: f64,
    pub fuel_mean: f64,
    pub fuel_std: f64,
    pub solve_time_mean: f64,
    pub solve_time_std: f64,
    pub solve_time_max: f64,
    pub gap_max: f64,
}

pub const SUMMARY_COLUMNS: &[&str] = &[
    "approach",
    "speed_window",
    "density",
    "seed",
    "vehicles",
    "executions",
    "found_mean",
    "found_std",
    "filtered_mean",
    "filtered_std",
    "joins",
    "time_to_platoon_mean",
    "time_to_platoon_std",
    "platooned_share",
    "platoon_size_mean",
    "platoon_size_median",
    "platoon_size_q3",
    "platoon_size_max",
    "platoon_share",
    "observed_density",
    "flow",
    "departure_flow",
    "mean_speed",
    "deviation_mean",
    "deviation_q1",
    "deviation_median",
    "deviation_q3",
    "abs_deviation_mean",
    "window_violation",
    "travel_time_ratio_mean",
    "travel_time_ratio_q1",
    "travel_time_ratio_median",
    "travel_time_ratio_q3",
    "fuel_l_per_100km_mean",
    "fuel_l_per_100km_std",
    "solve_time_mean",
    "solve_time_std",
    "solve_time_max",
    "gap_max",
];

impl Summary {
    /// Cells in `SUMMARY_COLUMNS` order.
    pub fn cells(&self) -> Vec<String> {
        use super::format_float as f;
        vec![
            self.approach.to_string(),
            f(self.speed_window),
            f(self.density),
            self.seed.to_string(),
            self.vehicles.to_string(),
            self.executions.to_string(),
            f(self.found_mean),
            f(self.found_std),
            f(self.filtered_mean),
            f(self.filtered_std),
            self.joins.to_string(),
            f(self.time_to_platoon_mean),
            f(self.time_to_platoon_std),
            f(self.platooned_share),
            f(self.platoon_size_mean),
            f(self.platoon_size_median),
            f(self.platoon_size_q3),
            f(self.platoon_size_max),
            f(self.platoon_share),
            f(self.observed_density),
            f(self.flow),
            f(self.departure_flow),
            f(self.mean_speed),
            f(self.deviation_mean),
            f(self.deviation_q1),
            f(self.deviation_median),
            f(self.deviation_q3),
            f(self.abs_deviation_mean),
            f(self.window_violation),
            f(self.travel_time_ratio_mean),
            f(self.travel_time_ratio_q1),
            f(self.travel_time_ratio_median),
            f(self.travel_time_ratio_q3),
            f(self.fuel_mean),
            f(self.fuel_std),
            f(self.solve_time_mean),
            f(self.solve_time_std),
            f(self.solve_time_max),
            f(self.gap_max),
        ]
    }
}

fn sorted(mut values: Vec<f64>) -> Vec<f64> {
    values.sort_by(f64::total_cmp);
    values
}

/// Mean of sorted values; summing in sorted order keeps the result independent
/// of record order.
fn mean(sorted: &[f64]) -> f64 {
    if sorted.is_empty() {
        f64::NAN
    } else {
        sorted.iter().sum::<f64>() / sorted.len() as f64
    }
}

/// Sample standard deviation; 0 for fewer than two values.
fn std_dev(sorted: &[f64]) -> f64 {
    if sorted.len() < 2 {
        return if sorted.is_empty() { f64::NAN } else { 0.0 };
    }
    let m = mean(sorted);
    let ss: f64 = sorted.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (sorted.len() - 1) as f64).sqrt()
}

/// Linearly interpolated quantile of sorted values.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        n => {
            let h = (n - 1) as f64 * q;
            let lo = h.floor() as usize;
            let hi = (lo + 1).min(n - 1);
            sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
        }
    }
}

/// Per-searcher mean and spread from summed counts and squares.
fn pooled(count: u64, sum: u64, sum_sq: u64) -> (f64, f64) {
    if count == 0 {
        return (f64::NAN, f64::NAN);
    }
    let n = count as f64;
    let m = sum as f64 / n;
    let std = if count < 2 {
        0.0
    } else {
        ((sum_sq as f64 - n * m * m) / (n - 1.0)).max(0.0).sqrt()
    };
    (m, std)
}

/// One summary row for a run, or none if nothing was recorded.
pub fn aggregate(ledger: &MetricsLedger, config: &ScenarioConfig) -> Vec<Summary> {
    if ledger.is_empty() {
        return Vec::new();
    }
    let trips = ledger.trips();
    let formations = ledger.formations();
    let samples = ledger.samples();

    let mut searchers = 0;
    let (mut found, mut found_sq, mut filtered, mut filtered_sq, mut joins) = (0, 0, 0, 0, 0);
    for r in formations {
        searchers += r.searchers;
        found += r.found;
        found_sq += r.found_sq;
        filtered += r.filtered;
        filtered_sq += r.filtered_sq;
        joins += r.joins;
    }
    let (found_mean, found_std) = pooled(searchers, found, found_sq);
    let (filtered_mean, filtered_std) = pooled(searchers, filtered, filtered_sq);

    let ttp = sorted(trips.iter().filter_map(|t| t.time_to_platoon).collect());
    let deviation = sorted(trips.iter().map(|t| t.mean_speed_deviation_ratio).collect());
    let abs_deviation = sorted(
        trips
            .iter()
            .map(|t| t.mean_abs_speed_deviation_ratio)
            .collect(),
    );
    let ttr = sorted(trips.iter().map(travel_time_ratio).collect());
    let fuel = sorted(trips.iter().map(|t| t.fuel_per_100km()).collect());
    let solve = sorted(formations.iter().map(|r| r.solve_time).collect());
    let gaps = sorted(formations.iter().map(|r| r.gap).collect());

    let mut sizes = Vec::new();
    let mut shares = Vec::new();
    for s in samples {
        let mut in_platoons = 0;
        for (&size, &count) in &s.formation_sizes {
            if size >= 2 {
                sizes.extend(std::iter::repeat_n(size as f64, count));
                in_platoons += size * count;
            }
        }
        if s.vehicles > 0 {
            shares.push(in_platoons as f64 / s.vehicles as f64);
        }
    }
    let sizes = sorted(sizes);
    let sample_mean =
        |f: fn(&super::TrafficSample) -> f64| mean(&sorted(samples.iter().map(f).collect()));

    vec![Summary {
        approach: config.approach,
        speed_window: config.formation.speed_window,
        density: config.target_density,
        seed: config.seed,
        vehicles: trips.len(),
        executions: formations.len(),
        found_mean,
        found_std,
        filtered_mean,
        filtered_std,
        joins,
        time_to_platoon_mean: mean(&ttp),
        time_to_platoon_std: std_dev(&ttp),
        platooned_share: if trips.is_empty() {
            f64::NAN
        } else {
            ttp.len() as f64 / trips.len() as f64
        },
        platoon_size_mean: mean(&sizes),
        platoon_size_median: quantile(&sizes, 0.5),
        platoon_size_q3: quantile(&sizes, 0.75),
        platoon_size_max: sizes.last().copied().unwrap_or(f64::NAN),
        platoon_share: mean(&sorted(shares)),
        observed_density: sample_mean(|s| s.density),
        flow: sample_mean(|s| s.flow),
        departure_flow: sample_mean(|s| s.departure_flow),
        mean_speed: sample_mean(|s| s.mean_speed),
        deviation_mean: mean(&deviation),
        deviation_q1: quantile(&deviation, 0.25),
        deviation_median: quantile(&deviation, 0.5),
        deviation_q3: quantile(&deviation, 0.75),
        abs_deviation_mean: mean(&abs_deviation),
        window_violation: if trips.is_empty() {
            f64::NAN
        } else {
            window_violation_ratio(trips, config.formation.speed_window)
        },
        travel_time_ratio_mean: mean(&ttr),
        travel_time_ratio_q1: quantile(&ttr, 0.25),
        travel_time_ratio_median: quantile(&ttr, 0.5),
        travel_time_ratio_q3: quantile(&ttr, 0.75),
        fuel_mean: mean(&fuel),
        fuel_std: std_dev(&fuel),
        solve_time_mean: mean(&solve),
        solve_time_std: std_dev(&solve),
        solve_time_max: solve.last().copied().unwrap_or(f64::NAN),
        gap_max: gaps.last().copied().unwrap_or(f64::NAN),
    }]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{FormationRecord, VehicleTripRecord};
    use proptest::prelude::*;

    fn trip(id: u32, real: f64, abs_dev: f64, fuel: f64, ttp: Option<f64>) -> VehicleTripRecord {
        VehicleTripRecord {
            id,
            desired_speed: 30.0,
            depart_time: 1000.0,
            arrival_time: 1000.0 + real,
            depart_position: 0.0,
            arrival_position: 6000.0,
            expected_travel_time: 200.0,
            real_travel_time: real,
            time_to_platoon: ttp,
            time_in_platoon: 0.0,
            distance: 6000.0,
            fuel,
            mean_speed: 30.0,
            mean_speed_deviation_ratio: -abs_dev,
            mean_abs_speed_deviation_ratio: abs_dev,
        }
    }

    #[test]
    fn empty_ledger_gives_no_rows() {
        assert!(aggregate(&MetricsLedger::new(0.0), &ScenarioConfig::desk()).is_empty());
    }

    #[test]
    fn identical_vehicles_have_zero_spread() {
        let mut l = MetricsLedger::new(0.0);
        for i in 0..4 {
            l.record_trip(trip(i, 200.0, 0.1, 0.36, Some(50.0)));
        }
        let s = &aggregate(&l, &ScenarioConfig::desk())[0];
        assert_eq!(s.fuel_std, 0.0);
        assert_eq!(s.time_to_platoon_std, 0.0);
        assert!((s.fuel_mean - 6.0).abs() < 1e-12);
    }

    #[test]
    fn five_record_fixture() {
        let mut l = MetricsLedger::new(0.0);
        let reals = [180.0, 200.0, 220.0, 240.0, 260.0];
        let devs = [0.05, 0.1, 0.15, 0.3, 0.4];
        let ttps = [Some(10.0), None, Some(30.0), None, Some(50.0)];
        for i in 0..5 {
            l.record_trip(trip(i as u32, reals[i], devs[i], 0.3, ttps[i]));
        }
        let mut r = FormationRecord::new(10.0, Approach::CentralizedGreedy);
        r.searchers = 4;
        r.found = 8;
        r.found_sq = 2 * 2 + 3 * 3 + 1 + 2 * 2;
        l.record_formation(r);
        let mut c = ScenarioConfig::desk();
        c.formation.speed_window = 0.2;
        let s = &aggregate(&l, &c)[0];
        assert_eq!(s.vehicles, 5);
        assert!((s.travel_time_ratio_mean - 1.1).abs() < 1e-12);
        assert!((s.travel_time_ratio_median - 1.1).abs() < 1e-12);
        assert!((s.travel_time_ratio_q1 - 1.0).abs() < 1e-12);
        assert!((s.abs_deviation_mean - 0.2).abs() < 1e-12);
        assert!((s.window_violation - 0.4).abs() < 1e-12);
        assert!((s.time_to_platoon_mean - 30.0).abs() < 1e-12);
        assert!((s.time_to_platoon_std - 20.0).abs() < 1e-12);
        assert!((s.platooned_share - 0.6).abs() < 1e-12);
        assert_eq!(s.found_mean, 2.0);
        // Counts 2, 3, 1, 2: variance (0 + 1 + 1 + 0) / 3.
        assert!((s.found_std - (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn quantile_interpolates() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.5), 2.5);
        assert_eq!(quantile(&v, 0.25), 1.75);
        assert_eq!(quantile(&v, 1.0), 4.0);
        assert!(quantile(&[], 0.5).is_nan());
    }

    proptest! {
        #[test]
        fn aggregation_ignores_record_order(values in proptest::collection::vec((100.0f64..400.0, 0.0f64..0.5), 1..30),
                                            seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let trips: Vec<_> = values.iter().enumerate()
                .map(|(i, &(real, dev))| trip(i as u32, real, dev, 0.3, Some(real / 4.0)))
                .collect();
            let mut shuffled = trips.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let mut a = MetricsLedger::new(0.0);
            let mut b = MetricsLedger::new(0.0);
            trips.into_iter().for_each(|t| { a.record_trip(t); });
            shuffled.into_iter().for_each(|t| { b.record_trip(t); });
            let c = ScenarioConfig::desk();
            prop_assert_eq!(aggregate(&a, &c)[0].cells(), aggregate(&b, &c)[0].cells());
        }
    }
}
