use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use platoon_core::metrics::{
    aggregate, write_formation_csv, write_summary_csv, write_vehicles_csv,
};
use platoon_core::{ScenarioConfig, Simulation, Summary};

use crate::config::to_text;
use crate::error::CliError;
use crate::figure::figure_columns;

pub const VERSION: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    " (",
    env!("PLATOON_GIT_DESCRIBE"),
    ")"
);

pub const VEHICLES_FILE: &str = "vehicles.csv";
pub const FORMATION_FILE: &str = "formation.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const MANIFEST_FILE: &str = "manifest.cfg";
pub const TRACE_FILE: &str = "trace.csv";

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub trace: bool,
    pub figure: Option<u32>,
}

/// The configuration file that reproduces a run, headed by the producing version.
pub fn manifest(config: &ScenarioConfig) -> String {
    format!("# platoon {VERSION}\n{}", to_text(config))
}

pub fn figure_file(figure: u32) -> String {
    format!("figure_{figure}.csv")
}

/// Writes the summary and, if requested, the column subset of one figure.
pub fn write_summaries(dir: &Path, rows: &[Summary], figure: Option<u32>) -> Result<(), CliError> {
    write_summary_csv(create(&dir.join(SUMMARY_FILE))?, rows, None)?;
    if let Some(n) = figure {
        let columns =
            figure_columns(n).ok_or_else(|| CliError::Failed(format!("no data for figure {n}")))?;
        write_summary_csv(create(&dir.join(figure_file(n)))?, rows, Some(&columns))?;
    }
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Failed(format!("cannot create {}: {e}", path.display())))
}

/// Simulates one scenario and writes its output files into `dir`.
pub fn run_scenario(
    config: &ScenarioConfig,
    dir: &Path,
    options: &RunOptions,
) -> Result<Vec<Summary>, CliError> {
    config.validate()?;
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Failed(format!("cannot create {}: {e}", dir.display())))?;
    fs::write(dir.join(MANIFEST_FILE), manifest(config))?;

    let mut sim = Simulation::new(config.clone())?;
    if options.trace {
        sim = sim.with_trace(Box::new(create(&dir.join(TRACE_FILE))?))?;
    }
    sim.run()?;

    write_vehicles_csv(create(&dir.join(VEHICLES_FILE))?, sim.ledger.trips())?;
    write_formation_csv(create(&dir.join(FORMATION_FILE))?, sim.ledger.formations())?;
    let rows = aggregate(&sim.ledger, config);
    write_summaries(dir, &rows, options.figure)?;
    Ok(rows)
}
