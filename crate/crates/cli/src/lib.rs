//! Configuration files, single runs and parallel parameter sweeps for the
//! `platoon` command.

pub mod config;
pub mod error;
pub mod figure;
pub mod run;
pub mod sweep;

pub use config::{parse_config, parse_config_str, Preset};
pub use error::{CliError, ConfigError};
pub use figure::figure_columns;
pub use run::{run_scenario, RunOptions};
pub use sweep::{run_seed, run_sweep, RunSpec, SweepReport, SweepSpec};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "PLATOON_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "platoon-out";
