//! Command-line front end for `qcrb-lab`: parameter sweeps, figure data,
//! Monte Carlo runs and the cross-method validation battery.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use anyhow::Result;
use clap::{Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod output;
pub mod validate;

use config::{Options, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "qcrb-lab", version, about = "Quantum limits of loss estimation with Gaussian and Fock probes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Λ, QFI and measurement variance for one state and channel
    Report,
    /// Λ over a grid of T and optionally s, Tp, eta-p, eta-a
    Sweep,
    /// Λ(T) for every state family and squeezing level, lossless
    Figure2,
    /// Λ(T) for Fock, bSMSS and bTMSS with lossy preparation
    Figure3,
    /// Sample the measurement and compare with its closed-form variance
    Mc,
    /// Run the cross-method checks; exits 2 if any fails
    Validate {
        #[arg(long, hide = true, allow_hyphen_values = true)]
        perturb_sigma: Option<f64>,
        #[arg(long, default_value_t = 100)]
        mc_configs: usize,
        #[arg(long, default_value_t = 20_000)]
        mc_trials: usize,
    },
}

/// What `main` should do after a successful run.
#[derive(Debug, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    ValidationFailed,
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let opts = cli.options.merged()?;
    let cfg = RunConfig::resolve(&opts)?;
    let table = match &cli.command {
        Command::Report => commands::report(&cfg)?,
        Command::Sweep => commands::sweep(&cfg)?,
        Command::Figure2 => commands::figure2(&cfg)?,
        Command::Figure3 => commands::figure3(&cfg)?,
        Command::Mc => commands::monte_carlo(&cfg)?,
        Command::Validate { perturb_sigma, mc_configs, mc_trials } => {
            let results = validate::run_battery(&validate::BatteryOptions {
                perturb_sigma: *perturb_sigma,
                mc_configs: *mc_configs,
                mc_trials: *mc_trials,
                seed: cfg.seed,
            });
            for r in results.iter().filter(|r| !r.passed) {
                log::error!("{} failed: max error {:e} > {:e} {}", r.name, r.max_error, r.tolerance, r.detail);
            }
            validate::summary_table(&results).write(cfg.format, cfg.out.as_deref())?;
            return Ok(if results.iter().all(|r| r.passed) { Outcome::Ok } else { Outcome::ValidationFailed });
        }
    };
    table.write(cfg.format, cfg.out.as_deref())?;
    Ok(Outcome::Ok)
}
