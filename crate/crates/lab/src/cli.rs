//! Command line interface of the `gpphs` binary.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::ExperimentConfig;
use crate::error::LabError;
use crate::pipeline;

#[derive(Debug, Parser)]
#[command(name = "gpphs", version, about = "Learn a port-Hamiltonian model from data and track a reference with it")]
pub struct Cli {
    /// TOML experiment file; defaults are used for anything it leaves out.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Overrides the seed in the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Run directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// `section.key=value`, repeatable.
    #[arg(long = "override", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,

    /// Validate the configuration, print the resolved form and exit.
    #[arg(long, global = true)]
    pub check_config: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Noise-free open-loop response to the excitation.
    Simulate,
    /// Open-loop response with measurement noise.
    GenerateData,
    /// Filter the dataset and fit the GP-PHS model.
    Train,
    /// Check the desired Hamiltonian and solve for the reference plan.
    Plan,
    /// Sample the dissipation condition around the plan.
    Verify,
    /// Closed-loop simulation under the tracking controller.
    Control,
    /// All stages in order.
    Pipeline,
    /// Recompute metrics.json from an existing run directory.
    Report,
}

pub fn run(cli: &Cli) -> Result<(), LabError> {
    let cfg = ExperimentConfig::load(cli.config.as_deref(), &cli.overrides, cli.seed)?;
    if cli.check_config {
        print!("{}", cfg.to_toml_string());
        return Ok(());
    }
    let dir = pipeline::resolve_output_dir(&cfg, cli.out.as_deref());
    match cli.command {
        Command::Simulate => pipeline::run_simulate(&cfg, &dir).map(drop),
        Command::GenerateData => pipeline::run_generate_data(&cfg, &dir).map(drop),
        Command::Train => pipeline::run_train(&cfg, &dir).map(drop),
        Command::Plan => pipeline::run_plan(&cfg, &dir).map(drop),
        Command::Verify => pipeline::run_verify(&cfg, &dir).map(drop),
        Command::Control => pipeline::run_control(&cfg, &dir).map(drop),
        Command::Pipeline => pipeline::run_pipeline(&cfg, &dir).map(drop),
        Command::Report => pipeline::run_report(&cfg, &dir).map(drop),
    }?;
    println!("{}", dir.display());
    Ok(())
}
