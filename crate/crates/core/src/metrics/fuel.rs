use std::path::Path;

use crate::error::{Error, Result};
use crate::model::PlatoonPosition;

const DEFAULT_COEFFICIENTS: &str = include_str!("../../data/fuel_gasoline_car.txt");

/// Weight of the aerodynamic drag reduction in the fuel reduction.
pub const DRAG_FUEL_SHARE: f64 = 0.46;

/// Base consumption model: tractive power over engine efficiency plus an idle
/// floor. Braking and coasting burn only the idle rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuelModel {
    pub mass: f64,
    pub rolling_resistance: f64,
    pub drag_area: f64,
    pub air_density: f64,
    pub gravity: f64,
    pub efficiency: f64,
    pub energy_density: f64,
    pub idle_rate: f64,
}

impl Default for FuelModel {
    fn default() -> Self {
        FuelModel::parse(DEFAULT_COEFFICIENTS).expect("bundled fuel coefficients are valid")
    }
}

impl FuelModel {
    /// Reads `key = value` lines; `#` starts a comment. Every key must be present.
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = std::collections::BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::config("fuel", format!("line {}: expected key = value", n + 1))
            })?;
            let key = key.trim();
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::config(key, format!("line {}: not a number", n + 1)))?;
            values.insert(key.to_string(), value);
        }
        let mut take = |key: &str| {
            values
                .remove(key)
                .ok_or_else(|| Error::config(key, "missing fuel coefficient"))
        };
        let model = FuelModel {
            mass: take("mass")?,
            rolling_resistance: take("rolling_resistance")?,
            drag_area: take("drag_area")?,
            air_density: take("air_density")?,
            gravity: take("gravity")?,
            efficiency: take("efficiency")?,
            energy_density: take("energy_density")?,
            idle_rate: take("idle_rate")?,
        };
        if let Some(key) = values.keys().next() {
            return Err(Error::config(key, "unknown fuel coefficient"));
        }
        Ok(model)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        FuelModel::parse(&std::fs::read_to_string(path)?)
    }

    /// Litres per second at `speed` (m/s) and `accel` (m/s²).
    pub fn base_rate(&self, speed: f64, accel: f64) -> f64 {
        let v = speed.max(0.0);
        let power = self.mass * v * (accel + self.gravity * self.rolling_resistance)
            + 0.5 * self.air_density * self.drag_area * v.powi(3);
        self.idle_rate + power.max(0.0) / (self.efficiency * self.energy_density)
    }
}

/// Relative drag reduction at a position in a formation.
pub fn drag_reduction(position: PlatoonPosition) -> f64 {
    match position {
        PlatoonPosition::Solo => 0.0,
        PlatoonPosition::Leader => 0.12,
        PlatoonPosition::Middle => 0.27,
        PlatoonPosition::Last => 0.23,
    }
}

pub fn platoon_fuel_factor(position: PlatoonPosition) -> f64 {
    1.0 - DRAG_FUEL_SHARE * drag_reduction(position)
}

/// Litres consumed during one step.
pub fn fuel_step(
    model: &FuelModel,
    speed: f64,
    accel: f64,
    position: PlatoonPosition,
    dt: f64,
) -> f64 {
    model.base_rate(speed, accel) * platoon_fuel_factor(position) * dt
}
