//! Command-line front end for the co-design experiments.

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ncs_codesign::energy::EceKind;
use ncs_codesign::harness::{
    load_config, run_cdf_experiment, run_lqr_sweeps, run_se_tightness, write_csv, write_json, write_results,
    ExperimentResult, Method, OutputFormat, SystemConfig,
};
use ncs_codesign::optimizer::optimize;
use ncs_codesign::Error;

#[derive(Parser)]
#[command(name = "ncs", version, about = "URLLC networked control co-design experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file (`key = value` per line).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo versus closed-form control-phase SE over antenna counts.
    SeTightness(Common),
    /// LQR cost over control latency and reliability grids.
    LqrSweep(Common),
    /// Optimize one sampled scenario and print the outcome as JSON.
    Optimize {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "fece")]
        variant: EceKind,
        /// Trial index whose channel draw is used.
        #[arg(long, default_value_t = 0)]
        trial: u64,
    },
    /// Empirical CDF of optimized and baseline ECE over sampled scenarios.
    Cdf {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "fece")]
        variant: EceKind,
    },
    /// Validate the configuration and print it.
    ValidateConfig(Common),
}

impl Common {
    fn load(&self) -> Result<SystemConfig, Error> {
        let mut overrides = self.overrides.clone();
        if let Some(seed) = self.seed {
            overrides.push(format!("seed={seed}"));
        }
        if let Some(trials) = self.trials {
            overrides.push(format!("trials={trials}"));
        }
        load_config(self.config.as_deref(), &overrides)
    }

    fn emit(&self, result: &ExperimentResult) -> Result<(), Error> {
        match &self.out {
            Some(path) => write_results(result, path, self.format),
            None => {
                let stdout = io::stdout().lock();
                let written = match self.format {
                    OutputFormat::Csv => write_csv(result, stdout).map_err(|e| e.to_string()),
                    OutputFormat::Json => write_json(result, stdout).map_err(|e| e.to_string()),
                };
                written.map_err(|reason| Error::Output {
                    path: "<stdout>".into(),
                    reason,
                })
            }
        }
    }

    fn emit_json(&self, value: &impl serde::Serialize) -> Result<(), Error> {
        let text = serde_json::to_string_pretty(value).expect("serializable") + "\n";
        match &self.out {
            Some(path) => std::fs::write(path, text).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            }),
            None => io::stdout().lock().write_all(text.as_bytes()).map_err(|source| Error::Io {
                path: "<stdout>".into(),
                source,
            }),
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::SeTightness(c) => c.emit(&run_se_tightness(&c.load()?)?),
        Command::LqrSweep(c) => c.emit(&run_lqr_sweeps(&c.load()?)?),
        Command::Cdf { common, variant } => common.emit(&run_cdf_experiment(&common.load()?, variant, &Method::ALL)?),
        Command::Optimize { common, variant, trial } => {
            let cfg = common.load()?;
            let (_, system) = cfg.sample_system(trial)?;
            let outcome = optimize(variant, &system, &cfg.solver_settings())?;
            common.emit_json(&outcome)
        }
        Command::ValidateConfig(c) => {
            let cfg = c.load()?;
            c.emit_json(&cfg)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Infeasible(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
