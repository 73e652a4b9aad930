//! Trip, formation and traffic measurements and their aggregation.

mod aggregate;
mod fuel;
mod report;

use std::collections::BTreeMap;

pub use aggregate::{aggregate, quantile, Summary, SUMMARY_COLUMNS};
pub use fuel::{drag_reduction, fuel_step, platoon_fuel_factor, FuelModel, DRAG_FUEL_SHARE};
pub use report::{
    format_float, write_formation_csv, write_summary_csv, write_vehicles_csv, FORMATION_COLUMNS,
    VEHICLE_COLUMNS,
};

use crate::model::{Approach, VehicleState};

/// Running per-vehicle integrals, updated every step the vehicle drives.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TripAccumulator {
    pub time: f64,
    pub distance: f64,
    pub fuel: f64,
    pub speed_integral: f64,
    pub deviation_integral: f64,
    pub abs_deviation_integral: f64,
    pub time_in_platoon: f64,
    /// Time from departure to the first completed join, as joiner or as the
    /// vehicle that became leader.
    pub time_to_platoon: Option<f64>,
}

impl TripAccumulator {
    pub fn record(&mut self, dt: f64, speed: f64, desired: f64, fuel: f64, in_platoon: bool) {
        let ratio = speed_deviation_ratio(speed, desired);
        self.time += dt;
        self.distance += speed * dt;
        self.fuel += fuel;
        self.speed_integral += speed * dt;
        self.deviation_integral += ratio * dt;
        self.abs_deviation_integral += ratio.abs() * dt;
        if in_platoon {
            self.time_in_platoon += dt;
        }
    }
}

/// `(speed - desired) / desired`; negative when slower than desired.
pub fn speed_deviation_ratio(speed: f64, desired: f64) -> f64 {
    (speed - desired) / desired
}

#[derive(Debug, Clone, PartialEq)]
pub struct VehicleTripRecord {
    pub id: u32,
    pub desired_speed: f64,
    pub depart_time: f64,
    pub arrival_time: f64,
    pub depart_position: f64,
    pub arrival_position: f64,
    pub expected_travel_time: f64,
    pub real_travel_time: f64,
    pub time_to_platoon: Option<f64>,
    pub time_in_platoon: f64,
    pub distance: f64,
    pub fuel: f64,
    pub mean_speed: f64,
    pub mean_speed_deviation_ratio: f64,
    pub mean_abs_speed_deviation_ratio: f64,
}

impl VehicleTripRecord {
    pub fn from_vehicle(v: &VehicleState, arrival_time: f64) -> Self {
        let t = &v.trip;
        let per_time = |x: f64| if t.time > 0.0 { x / t.time } else { 0.0 };
        VehicleTripRecord {
            id: v.id.0,
            desired_speed: v.desired_speed,
            depart_time: v.depart_time,
            arrival_time,
            depart_position: v.depart_position,
            arrival_position: v.arrival_position,
            expected_travel_time: (v.arrival_position - v.depart_position) / v.desired_speed,
            real_travel_time: arrival_time - v.depart_time,
            time_to_platoon: t.time_to_platoon,
            time_in_platoon: t.time_in_platoon,
            distance: t.distance,
            fuel: t.fuel,
            mean_speed: per_time(t.speed_integral),
            mean_speed_deviation_ratio: per_time(t.deviation_integral),
            mean_abs_speed_deviation_ratio: per_time(t.abs_deviation_integral),
        }
    }

    pub fn fuel_per_100km(&self) -> f64 {
        if self.distance > 0.0 {
            self.fuel / self.distance * 100_000.0
        } else {
            0.0
        }
    }
}

/// Real over expected travel time; below 1 means faster than expected.
pub fn travel_time_ratio(record: &VehicleTripRecord) -> f64 {
    record.real_travel_time / record.expected_travel_time
}

/// Share of trips whose time-averaged absolute speed deviation exceeds `m`.
pub fn window_violation_ratio(trips: &[VehicleTripRecord], m: f64) -> f64 {
    if trips.is_empty() {
        return 0.0;
    }
    let violators = trips
        .iter()
        .filter(|t| t.mean_abs_speed_deviation_ratio > m)
        .count();
    violators as f64 / trips.len() as f64
}

/// One formation execution; distributed executions of one step are merged.
/// Candidate counts are summed over searchers, with sums of squares kept for
/// per-searcher spread.
#[derive(Debug, Clone, PartialEq)]
pub struct FormationRecord {
    pub time: f64,
    pub approach: Approach,
    pub searchers: u64,
    pub found: u64,
    pub filtered: u64,
    pub found_sq: u64,
    pub filtered_sq: u64,
    pub joins: u64,
    pub objective: f64,
    pub reported_objective: f64,
    pub solve_time: f64,
    pub gap: f64,
    pub nodes: u64,
}

impl FormationRecord {
    pub fn new(time: f64, approach: Approach) -> Self {
        FormationRecord {
            time,
            approach,
            searchers: 0,
            found: 0,
            filtered: 0,
            found_sq: 0,
            filtered_sq: 0,
            joins: 0,
            objective: 0.0,
            reported_objective: 0.0,
            solve_time: 0.0,
            gap: 0.0,
            nodes: 0,
        }
    }
}

/// Found and filtered candidate counts of one execution.
pub fn candidates_found_and_filtered(record: &FormationRecord) -> (u64, u64) {
    (record.found, record.filtered)
}

/// Periodic snapshot of macroscopic traffic state.
#[derive(Debug, Clone, PartialEq)]
pub struct TrafficSample {
    pub time: f64,
    pub vehicles: usize,
    /// Vehicles per lane-kilometre.
    pub density: f64,
    /// Detector flow, vehicles per hour and lane.
    pub flow: f64,
    /// Inserted vehicles per hour.
    pub departure_flow: f64,
    pub mean_speed: f64,
    /// Number of formations by size; size 1 counts individuals.
    pub formation_sizes: BTreeMap<usize, usize>,
}

/// Append-only store of everything measured after the warm-up period.
#[derive(Debug, Clone, Default)]
pub struct MetricsLedger {
    warmup: f64,
    trips: Vec<VehicleTripRecord>,
    formations: Vec<FormationRecord>,
    samples: Vec<TrafficSample>,
}

impl MetricsLedger {
    pub fn new(warmup: f64) -> Self {
        MetricsLedger {
            warmup,
            ..Default::default()
        }
    }

    /// Keeps the trip only if the vehicle departed after the warm-up.
    pub fn record_trip(&mut self, record: VehicleTripRecord) -> bool {
        let keep = record.depart_time >= self.warmup;
        if keep {
            self.trips.push(record);
        }
        keep
    }

    pub fn record_formation(&mut self, record: FormationRecord) -> bool {
        let keep = record.time >= self.warmup;
        if keep {
            self.formations.push(record);
        }
        keep
    }

    pub fn record_sample(&mut self, sample: TrafficSample) -> bool {
        let keep = sample.time > self.warmup;
        if keep {
            self.samples.push(sample);
        }
        keep
    }

    pub fn trips(&self) -> &[VehicleTripRecord] {
        &self.trips
    }

    pub fn formations(&self) -> &[FormationRecord] {
        &self.formations
    }

    pub fn samples(&self) -> &[TrafficSample] {
        &self.samples
    }

    pub fn is_empty(&self) -> bool {
        self.trips.is_empty() && self.formations.is_empty() && self.samples.is_empty()
    }
}
