use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tbsched::harness::output::{
    threshold_table, write_assignments, write_metrics, write_standings, write_threshold_table,
};
use tbsched::harness::{run_experiment, simulate, Prioritizers, SimOptions};
use tbsched::scenario::{Scenario, ScenarioConfig};
use tbsched::scheduler::SelectionPolicy;
use tbsched::selftest;

#[derive(Parser)]
#[command(name = "tbsched", version, about = "Time-balance radar scheduling lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Threshold table over the published (K, r, theta0) grid as CSV.
    ThresholdTable {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One scenario under one policy; per-assignment CSV.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "decp")]
        policy: SelectionPolicy,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo comparison; metrics CSV then standings CSV.
    Compare {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        scenarios: usize,
        #[arg(long, value_delimiter = ',', default_value = "conventional,decp,minte,purmm")]
        policies: Vec<SelectionPolicy>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        metrics_out: Option<PathBuf>,
        #[arg(long)]
        standings_out: Option<PathBuf>,
    },
    /// Runs the built-in property checks.
    Selftest,
}

type BoxError = Box<dyn std::error::Error>;

fn load_config(path: Option<&Path>, seed: Option<u64>) -> Result<ScenarioConfig, BoxError> {
    let mut cfg = match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
            ScenarioConfig::from_toml_str(&text).map_err(|e| format!("{}: {e}", p.display()))?
        }
        None => ScenarioConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, BoxError> {
    Ok(match path {
        Some(p) => Box::new(File::create(p).map_err(|e| format!("{}: {e}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cli: Cli) -> Result<bool, BoxError> {
    match cli.command {
        Command::ThresholdTable { out } => {
            write_threshold_table(sink(out.as_deref())?, &threshold_table()?)?;
        }
        Command::Simulate {
            config,
            seed,
            policy,
            out,
        } => {
            let cfg = load_config(config.as_deref(), seed)?;
            let scenario = Scenario::generate(&cfg, cfg.seed)?;
            let prioritizers = Prioritizers::for_policies(&[policy])?;
            let options = SimOptions {
                record_assignments: true,
                record_logs: false,
            };
            let output = simulate(&scenario, policy, &prioritizers, options, None)?;
            write_assignments(sink(out.as_deref())?, &output.assignments)?;
        }
        Command::Compare {
            config,
            scenarios,
            policies,
            seed,
            metrics_out,
            standings_out,
        } => {
            let cfg = load_config(config.as_deref(), seed)?;
            let result = run_experiment(&cfg, &policies, scenarios)?;
            match (metrics_out, standings_out) {
                (None, None) => {
                    let mut out = io::stdout().lock();
                    write_metrics(&mut out, &result)?;
                    writeln!(out)?;
                    write_standings(&mut out, &result)?;
                }
                (m, s) => {
                    write_metrics(sink(m.as_deref())?, &result)?;
                    write_standings(sink(s.as_deref())?, &result)?;
                }
            }
        }
        Command::Selftest => {
            let checks = selftest::run_all();
            let mut out = io::stdout().lock();
            for c in &checks {
                writeln!(out, "{} {}{}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail_suffix())?;
            }
            return Ok(checks.iter().all(|c| c.passed));
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("tbsched: error: {e}");
            ExitCode::from(2)
        }
    }
}
