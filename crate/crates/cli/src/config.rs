//! Flat `key = value` scenario files.
//!
//! Every field of [`ScenarioConfig`] has a key. Lines starting with `#` and blank
//! lines are ignored. Speeds are in m/s, lengths in m and durations in s.
//! The optional `preset` key (`full` or `desk`) selects the base configuration and
//! has to come before any other key.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use platoon_core::{Approach, ScenarioConfig};

use crate::error::ConfigError;

pub const KEYS: &[&str] = &[
    "road_length",
    "lanes",
    "ramp_interval",
    "trip_length",
    "speed_mean",
    "speed_rel_stddev",
    "speed_min",
    "speed_max",
    "target_density",
    "sim_duration",
    "warmup",
    "step_length",
    "seed",
    "approach",
    "alpha",
    "speed_window",
    "position_range",
    "execution_interval",
    "comm_range",
    "solver_time_limit",
    "solver_node_limit",
    "krauss_headway",
    "acc_headway",
    "acc_lambda",
    "acc_free_gain",
    "cacc_gap",
    "v_max",
    "max_accel",
    "max_decel",
    "comfort_decel",
    "vehicle_length",
    "min_gap",
    "sample_interval",
    "record_solve_time",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Preset {
    #[default]
    Full,
    Desk,
}

impl Preset {
    pub fn config(self) -> ScenarioConfig {
        match self {
            Preset::Full => ScenarioConfig::default(),
            Preset::Desk => ScenarioConfig::desk(),
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(Preset::Full),
            "desk" => Ok(Preset::Desk),
            _ => Err(format!("unknown preset `{s}` (expected full or desk)")),
        }
    }
}

fn parse<T: std::str::FromStr>(value: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| format!("cannot parse `{value}`: {e}"))
}

/// Assigns one key. Range checks happen later in [`ScenarioConfig::validate`].
pub fn set_key(config: &mut ScenarioConfig, key: &str, value: &str) -> Result<(), String> {
    let f = &mut config.formation;
    let cf = &mut config.cf;
    match key {
        "road_length" => config.road_length = parse(value)?,
        "lanes" => config.lanes = parse(value)?,
        "ramp_interval" => config.ramp_interval = parse(value)?,
        "trip_length" => config.trip_length = parse(value)?,
        "speed_mean" => config.speed_mean = parse(value)?,
        "speed_rel_stddev" => config.speed_rel_stddev = parse(value)?,
        "speed_min" => config.speed_min = parse(value)?,
        "speed_max" => config.speed_max = parse(value)?,
        "target_density" => config.target_density = parse(value)?,
        "sim_duration" => config.sim_duration = parse(value)?,
        "warmup" => config.warmup = parse(value)?,
        "step_length" => config.step_length = parse(value)?,
        "seed" => config.seed = parse(value)?,
        "approach" => config.approach = value.parse::<Approach>()?,
        "alpha" => f.alpha = parse(value)?,
        "speed_window" => f.speed_window = parse(value)?,
        "position_range" => f.position_range = parse(value)?,
        "execution_interval" => f.execution_interval = parse(value)?,
        "comm_range" => f.comm_range = parse(value)?,
        "solver_time_limit" => f.solver_time_limit = parse(value)?,
        "solver_node_limit" => {
            f.solver_node_limit = match value {
                "none" => None,
                v => Some(parse(v)?),
            }
        }
        "krauss_headway" => cf.krauss_headway = parse(value)?,
        "acc_headway" => cf.acc_headway = parse(value)?,
        "acc_lambda" => cf.acc_lambda = parse(value)?,
        "acc_free_gain" => cf.acc_free_gain = parse(value)?,
        "cacc_gap" => cf.cacc_gap = parse(value)?,
        "v_max" => cf.v_max = parse(value)?,
        "max_accel" => cf.max_accel = parse(value)?,
        "max_decel" => cf.max_decel = parse(value)?,
        "comfort_decel" => cf.comfort_decel = parse(value)?,
        "vehicle_length" => cf.vehicle_length = parse(value)?,
        "min_gap" => cf.min_gap = parse(value)?,
        "sample_interval" => config.sample_interval = parse(value)?,
        "record_solve_time" => config.record_solve_time = parse(value)?,
        _ => return Err(format!("unknown key `{key}`")),
    }
    Ok(())
}

/// Renders a configuration so that [`parse_config_str`] reads it back unchanged.
pub fn to_text(config: &ScenarioConfig) -> String {
    let f = &config.formation;
    let cf = &config.cf;
    let node_limit = f
        .solver_node_limit
        .map_or_else(|| "none".to_string(), |n| n.to_string());
    let values: [String; 34] = [
        config.road_length.to_string(),
        config.lanes.to_string(),
        config.ramp_interval.to_string(),
        config.trip_length.to_string(),
        config.speed_mean.to_string(),
        config.speed_rel_stddev.to_string(),
        config.speed_min.to_string(),
        config.speed_max.to_string(),
        config.target_density.to_string(),
        config.sim_duration.to_string(),
        config.warmup.to_string(),
        config.step_length.to_string(),
        config.seed.to_string(),
        config.approach.to_string(),
        f.alpha.to_string(),
        f.speed_window.to_string(),
        f.position_range.to_string(),
        f.execution_interval.to_string(),
        f.comm_range.to_string(),
        f.solver_time_limit.to_string(),
        node_limit,
        cf.krauss_headway.to_string(),
        cf.acc_headway.to_string(),
        cf.acc_lambda.to_string(),
        cf.acc_free_gain.to_string(),
        cf.cacc_gap.to_string(),
        cf.v_max.to_string(),
        cf.max_accel.to_string(),
        cf.max_decel.to_string(),
        cf.comfort_decel.to_string(),
        cf.vehicle_length.to_string(),
        cf.min_gap.to_string(),
        config.sample_interval.to_string(),
        config.record_solve_time.to_string(),
    ];
    let mut out = String::new();
    for (key, value) in KEYS.iter().zip(values) {
        let _ = writeln!(out, "{key} = {value}");
    }
    out
}

/// Parses file contents on top of `base`; `origin` names the source in errors.
pub fn parse_config_str(
    text: &str,
    base: ScenarioConfig,
    origin: &str,
) -> Result<ScenarioConfig, ConfigError> {
    let mut config = base;
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let err = |key: &str, message: String| ConfigError::Value {
            origin: origin.to_string(),
            line: Some(line),
            key: key.to_string(),
            message,
        };
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Syntax {
                origin: origin.to_string(),
                line,
                text: raw.to_string(),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        if let Some(first) = seen.get(key) {
            return Err(err(key, format!("already set on line {first}")));
        }
        if key == "preset" {
            if !seen.is_empty() {
                return Err(err(key, "must come before every other key".into()));
            }
            config = value.parse::<Preset>().map_err(|m| err(key, m))?.config();
        } else if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey {
                origin: origin.to_string(),
                line,
                key: key.to_string(),
            });
        } else {
            set_key(&mut config, key, value).map_err(|m| err(key, m))?;
        }
        seen.insert(key.to_string(), line);
    }
    validate(&config, origin, |key| seen.get(key).copied())?;
    Ok(config)
}

/// Reads and validates a configuration file on top of the full-scale defaults.
pub fn parse_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    parse_config_with_base(path, ScenarioConfig::default())
}

pub fn parse_config_with_base(
    path: &Path,
    base: ScenarioConfig,
) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.display().to_string(),
        source,
    })?;
    parse_config_str(&text, base, &path.display().to_string())
}

/// Range and consistency checks, attributing failures to the line that set the key.
pub fn validate(
    config: &ScenarioConfig,
    origin: &str,
    line_of: impl Fn(&str) -> Option<usize>,
) -> Result<(), ConfigError> {
    match config.validate() {
        Ok(()) => Ok(()),
        Err(platoon_core::Error::InvalidConfig { key, message }) => Err(ConfigError::Value {
            origin: origin.to_string(),
            line: line_of(&key),
            key,
            message,
        }),
        Err(other) => Err(ConfigError::Value {
            origin: origin.to_string(),
            line: None,
            key: String::new(),
            message: other.to_string(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ScenarioConfig, ConfigError> {
        parse_config_str(text, ScenarioConfig::default(), "test.cfg")
    }

    #[test]
    fn empty_text_gives_defaults() {
        assert_eq!(parse("").unwrap(), ScenarioConfig::default());
        assert_eq!(
            parse("# nothing\n\n   \n").unwrap(),
            ScenarioConfig::default()
        );
    }

    #[test]
    fn single_override() {
        let c = parse("target_density=25\n").unwrap();
        assert_eq!(c.target_density, 25.0);
        assert_eq!(
            c,
            ScenarioConfig {
                target_density: 25.0,
                ..ScenarioConfig::default()
            }
        );
    }

    #[test]
    fn out_of_range_value_names_key_and_line() {
        let e = parse("seed = 3\nalpha=1.5\n").unwrap_err();
        match &e {
            ConfigError::Value { key, line, .. } => {
                assert_eq!(key, "alpha");
                assert_eq!(*line, Some(2));
            }
            other => panic!("{other:?}"),
        }
        assert!(e.to_string().contains("test.cfg:2"), "{e}");
    }

    #[test]
    fn unknown_key_is_rejected() {
        let e = parse("\n\ndensity = 5\n").unwrap_err();
        assert!(
            matches!(&e, ConfigError::UnknownKey { key, line: 3, .. } if key == "density"),
            "{e:?}"
        );
    }

    #[test]
    fn malformed_values_and_lines() {
        assert!(matches!(
            parse("lanes = three").unwrap_err(),
            ConfigError::Value { line: Some(1), .. }
        ));
        assert!(matches!(
            parse("seed 4").unwrap_err(),
            ConfigError::Syntax { line: 1, .. }
        ));
        assert!(matches!(
            parse("seed = 4\nseed = 5").unwrap_err(),
            ConfigError::Value { line: Some(2), .. }
        ));
        assert!(parse("approach = teleport").is_err());
    }

    #[test]
    fn preset_selects_the_base() {
        let c = parse("preset = desk\ntarget_density = 15").unwrap();
        assert_eq!(c.road_length, 10_000.0);
        assert_eq!(c.target_density, 15.0);
        assert!(parse("seed = 2\npreset = desk").is_err());
    }

    #[test]
    fn rendered_text_round_trips() {
        let mut c = ScenarioConfig::desk();
        c.approach = platoon_core::Approach::CentralizedSolver;
        c.formation.speed_window = 0.1 + 0.2;
        c.formation.solver_node_limit = None;
        c.seed = u64::MAX;
        c.record_solve_time = false;
        assert_eq!(parse(&to_text(&c)).unwrap(), c);
        assert_eq!(to_text(&c).lines().count(), KEYS.len());
    }
}
