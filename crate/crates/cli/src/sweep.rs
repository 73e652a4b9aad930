use std::panic::{self, AssertUnwindSafe};
use std::path::Path;

use platoon_core::{Approach, ScenarioConfig, Summary};
use rayon::prelude::*;

use crate::error::CliError;
use crate::run::{run_scenario, write_summaries, RunOptions};

pub const RUNS_DIR: &str = "runs";

/// Cartesian parameter grid. Baseline approaches ignore the speed window and run
/// once per density with the first listed window.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub base: ScenarioConfig,
    pub approaches: Vec<Approach>,
    pub speed_windows: Vec<f64>,
    pub densities: Vec<f64>,
    pub repetitions: u32,
    pub base_seed: u64,
}

impl SweepSpec {
    /// The full grid of the evaluation.
    pub fn evaluation(base: ScenarioConfig) -> Self {
        SweepSpec {
            base_seed: base.seed,
            base,
            approaches: Approach::ALL.to_vec(),
            speed_windows: vec![0.1, 0.2, 0.3],
            densities: vec![5.0, 10.0, 15.0, 20.0, 25.0],
            repetitions: 1,
        }
    }

    pub fn runs(&self) -> Vec<RunSpec> {
        let mut runs = Vec::new();
        for &approach in &self.approaches {
            let windows = if approach.is_platooning() {
                &self.speed_windows[..]
            } else {
                &self.speed_windows[..self.speed_windows.len().min(1)]
            };
            for &m in windows {
                for &density in &self.densities {
                    for repetition in 0..self.repetitions {
                        let mut config = self.base.clone();
                        config.approach = approach;
                        config.formation.speed_window = m;
                        config.target_density = density;
                        config.seed = run_seed(self.base_seed, approach, m, density, repetition);
                        runs.push(RunSpec {
                            id: format!("{approach}_m{m}_d{density}_r{repetition}"),
                            config,
                        });
                    }
                }
            }
        }
        runs
    }
}

#[derive(Debug, Clone)]
pub struct RunSpec {
    pub id: String,
    pub config: ScenarioConfig,
}

/// Seed of one run: FNV-1a over the base seed and the run coordinates.
pub fn run_seed(base_seed: u64, approach: Approach, m: f64, density: f64, repetition: u32) -> u64 {
    fnv1a(&[
        &base_seed.to_le_bytes(),
        approach.as_str().as_bytes(),
        &m.to_bits().to_le_bytes(),
        &density.to_bits().to_le_bytes(),
        &repetition.to_le_bytes(),
    ])
}

fn fnv1a(parts: &[&[u8]]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    parts
        .iter()
        .flat_map(|p| p.iter())
        .fold(OFFSET, |hash, &b| (hash ^ u64::from(b)).wrapping_mul(PRIME))
}

#[derive(Debug)]
pub struct SweepReport {
    pub rows: Vec<Summary>,
    pub failures: Vec<(String, CliError)>,
}

impl SweepReport {
    /// Exit code of the first failed run in grid order, 0 if all succeeded.
    pub fn exit_code(&self) -> u8 {
        self.failures.first().map_or(0, |(_, e)| e.exit_code())
    }
}

/// Runs every spec on a pool of `jobs` threads (0 picks the core count). Each run
/// writes into `out/runs/<id>`; the merged summary lists rows in spec order.
pub fn run_sweep(
    runs: &[RunSpec],
    out: &Path,
    jobs: usize,
    options: &RunOptions,
) -> Result<SweepReport, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Failed(e.to_string()))?;
    let per_run = RunOptions {
        figure: None,
        ..options.clone()
    };
    let results: Vec<Result<Vec<Summary>, CliError>> = pool.install(|| {
        runs.par_iter()
            .map(|spec| {
                let dir = out.join(RUNS_DIR).join(&spec.id);
                panic::catch_unwind(AssertUnwindSafe(|| {
                    run_scenario(&spec.config, &dir, &per_run)
                }))
                .unwrap_or_else(|_| Err(CliError::Failed(format!("run {} panicked", spec.id))))
            })
            .collect()
    });

    let mut report = SweepReport {
        rows: Vec::new(),
        failures: Vec::new(),
    };
    for (spec, result) in runs.iter().zip(results) {
        match result {
            Ok(rows) => report.rows.extend(rows),
            Err(e) => report.failures.push((spec.id.clone(), e)),
        }
    }
    std::fs::create_dir_all(out)?;
    write_summaries(out, &report.rows, options.figure)?;
    Ok(report)
}
