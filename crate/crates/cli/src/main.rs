use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use platoon_cli::config::{self, parse_config_with_base, set_key, Preset};
use platoon_cli::error::{CliError, ConfigError};
use platoon_cli::figure::FIGURES;
use platoon_cli::{run_scenario, run_sweep, RunOptions, SweepSpec, DEFAULT_OUT_DIR, OUT_DIR_ENV};
use platoon_core::{Approach, ScenarioConfig};

/// Freeway platooning simulator: single scenarios and parameter sweeps.
#[derive(Parser)]
#[command(name = "platoon", version = platoon_cli::run::VERSION)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario.
    Run {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        approach: Option<Approach>,
        /// Target density in vehicles per lane and km.
        #[arg(long)]
        density: Option<f64>,
        #[arg(long)]
        speed_window: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
        /// Also write every vehicle's state per step to trace.csv.
        #[arg(long)]
        trace: bool,
    },
    /// Simulate a grid of approaches, speed windows, densities and repetitions.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Approaches to run [default: all].
        #[arg(long, value_delimiter = ',')]
        approach: Vec<Approach>,
        /// Densities in vehicles per lane and km [default: 5,10,15,20,25].
        #[arg(long, value_delimiter = ',')]
        density: Vec<f64>,
        /// Speed windows of the platooning approaches [default: 0.1,0.2,0.3].
        #[arg(long, value_delimiter = ',')]
        speed_window: Vec<f64>,
        #[arg(long, default_value_t = 1)]
        repetitions: u32,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Print the effective configuration in file format.
    ShowConfig {
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
}

#[derive(Args)]
struct ScenarioArgs {
    /// Configuration file with `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base configuration the file and flags apply to.
    #[arg(long, value_enum, default_value_t = Preset::Full)]
    preset: Preset,
    #[arg(long)]
    seed: Option<u64>,
    /// Any configuration key, e.g. `--set sim_duration=900`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, env = OUT_DIR_ENV, default_value = DEFAULT_OUT_DIR)]
    out_dir: PathBuf,
    /// Additionally write figure_<n>.csv with the summary columns of that figure.
    #[arg(long, value_parser = clap::value_parser!(u32).range(*FIGURES.start() as i64..=*FIGURES.end() as i64))]
    figure: Option<u32>,
}

fn flag_error(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Value {
        origin: "command line".into(),
        line: None,
        key: key.into(),
        message: message.into(),
    }
}

impl ScenarioArgs {
    /// Defaults, then the file, then the flags.
    fn build(&self, flags: &[(&str, String)]) -> Result<ScenarioConfig, ConfigError> {
        let mut config = match &self.config {
            Some(path) => parse_config_with_base(path, self.preset.config())?,
            None => self.preset.config(),
        };
        let mut assignments: Vec<(String, String)> = Vec::new();
        for item in &self.set {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| flag_error(item, "expected KEY=VALUE"))?;
            assignments.push((key.trim().into(), value.trim().into()));
        }
        if let Some(seed) = self.seed {
            assignments.push(("seed".into(), seed.to_string()));
        }
        assignments.extend(flags.iter().map(|(k, v)| (k.to_string(), v.clone())));
        for (key, value) in &assignments {
            set_key(&mut config, key, value).map_err(|m| flag_error(key, m))?;
        }
        config::validate(&config, "command line", |_| None)?;
        Ok(config)
    }
}

fn execute(command: Command) -> Result<u8, CliError> {
    match command {
        Command::Run {
            scenario,
            approach,
            density,
            speed_window,
            output,
            trace,
        } => {
            let mut flags = Vec::new();
            if let Some(a) = approach {
                flags.push(("approach", a.to_string()));
            }
            if let Some(d) = density {
                flags.push(("target_density", d.to_string()));
            }
            if let Some(m) = speed_window {
                flags.push(("speed_window", m.to_string()));
            }
            let config = scenario.build(&flags)?;
            let options = RunOptions {
                trace,
                figure: output.figure,
            };
            run_scenario(&config, &output.out_dir, &options)?;
            eprintln!("results written to {}", output.out_dir.display());
            Ok(0)
        }
        Command::Sweep {
            scenario,
            approach,
            density,
            speed_window,
            repetitions,
            jobs,
            output,
        } => {
            let base = scenario.build(&[])?;
            let mut spec = SweepSpec::evaluation(base);
            if !approach.is_empty() {
                spec.approaches = approach;
            }
            if !density.is_empty() {
                spec.densities = density;
            }
            if !speed_window.is_empty() {
                spec.speed_windows = speed_window;
            }
            spec.repetitions = repetitions;
            let runs = spec.runs();
            eprintln!("running {} scenarios", runs.len());
            let options = RunOptions {
                trace: false,
                figure: output.figure,
            };
            let report = run_sweep(&runs, &output.out_dir, jobs, &options)?;
            for (id, error) in &report.failures {
                eprintln!("run {id} failed: {error}");
            }
            eprintln!(
                "{} of {} runs succeeded, results written to {}",
                runs.len() - report.failures.len(),
                runs.len(),
                output.out_dir.display()
            );
            Ok(report.exit_code())
        }
        Command::ShowConfig { scenario } => {
            print!("{}", config::to_text(&scenario.build(&[])?));
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
