use std::io::Write;

use super::aggregate::{Summary, SUMMARY_COLUMNS};
use super::{travel_time_ratio, FormationRecord, VehicleTripRecord};
use crate::error::Result;

pub const VEHICLE_COLUMNS: &[&str] = &[
    "id",
    "desired_speed",
    "depart_time",
    "arrival_time",
    "depart_position",
    "arrival_position",
    "expected_travel_time",
    "real_travel_time",
    "travel_time_ratio",
    "time_to_platoon",
    "time_in_platoon",
    "distance",
    "fuel",
    "fuel_l_per_100km",
    "mean_speed",
    "mean_speed_deviation_ratio",
    "mean_abs_speed_deviation_ratio",
];

pub const FORMATION_COLUMNS: &[&str] = &[
    "time",
    "strategy",
    "n_searchers",
    "n_candidates_found",
    "n_candidates_filtered",
    "n_joins_triggered",
    "objective_full",
    "objective_reported",
    "solve_time",
    "gap",
];

/// Six significant digits in the shortest of fixed or exponent notation, like
/// C's `%g`. NaN becomes an empty cell.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return String::new();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mantissa}e{sign}{:02}", exp.abs());
    }
    let decimals = (5 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

pub fn write_vehicles_csv<W: Write>(out: W, trips: &[VehicleTripRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(VEHICLE_COLUMNS)?;
    let f = format_float;
    for t in trips {
        w.write_record([
            t.id.to_string(),
            f(t.desired_speed),
            f(t.depart_time),
            f(t.arrival_time),
            f(t.depart_position),
            f(t.arrival_position),
            f(t.expected_travel_time),
            f(t.real_travel_time),
            f(travel_time_ratio(t)),
            opt(t.time_to_platoon),
            f(t.time_in_platoon),
            f(t.distance),
            f(t.fuel),
            f(t.fuel_per_100km()),
            f(t.mean_speed),
            f(t.mean_speed_deviation_ratio),
            f(t.mean_abs_speed_deviation_ratio),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_formation_csv<W: Write>(out: W, records: &[FormationRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(FORMATION_COLUMNS)?;
    let f = format_float;
    for r in records {
        w.write_record([
            f(r.time),
            r.approach.to_string(),
            r.searchers.to_string(),
            r.found.to_string(),
            r.filtered.to_string(),
            r.joins.to_string(),
            f(r.objective),
            f(r.reported_objective),
            f(r.solve_time),
            f(r.gap),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes summary rows, optionally keeping only the named columns (in the given
/// order). Unknown names are ignored.
pub fn write_summary_csv<W: Write>(
    out: W,
    rows: &[Summary],
    columns: Option<&[&str]>,
) -> Result<()> {
    let picks: Vec<usize> = match columns {
        Some(names) => names
            .iter()
            .filter_map(|n| SUMMARY_COLUMNS.iter().position(|c| c == n))
            .collect(),
        None => (0..SUMMARY_COLUMNS.len()).collect(),
    };
    let mut w = csv::Writer::from_writer(out);
    w.write_record(picks.iter().map(|&i| SUMMARY_COLUMNS[i]))?;
    for row in rows {
        let cells = row.cells();
        w.write_record(picks.iter().map(|&i| cells[i].as_str()))?;
    }
    w.flush()?;
    Ok(())
}
