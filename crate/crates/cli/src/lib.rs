//! Command-line front end: one subcommand per pipeline stage, configured by
//! flat `key = value` files.

pub mod commands;
pub mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand};
use rayon::prelude::*;

use config::Config;

#[derive(Debug, Parser)]
#[command(name = "socdist", version, about = "Pedestrian tracking and social-distancing analysis")]
pub struct Cli {
    /// Config file; repeat to process several videos.
    #[arg(long = "config", global = true, value_name = "FILE")]
    pub configs: Vec<PathBuf>,
    /// Override a config key in every config.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub sets: Vec<String>,
    /// Configs processed in parallel.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Generate a synthetic scene with ground truth.
    Synth,
    /// Background-subtract, calibrate and crop image frames.
    Preprocess,
    /// Track detections.
    Track,
    /// Detect violations and write events and the report.
    Analyze,
    /// CLEAR metrics of tracks against ground truth.
    EvalMot,
    /// Precision and recall of group validation against annotated groups.
    EvalGroups,
}

impl Command {
    fn run(self, cfg: &Config) -> Result<()> {
        match self {
            Command::Synth => commands::synth(cfg),
            Command::Preprocess => commands::preprocess(cfg),
            Command::Track => commands::track(cfg),
            Command::Analyze => commands::analyze(cfg),
            Command::EvalMot => commands::eval_mot(cfg),
            Command::EvalGroups => commands::eval_groups(cfg),
        }
    }
}

fn load_configs(cli: &Cli) -> Result<Vec<Config>> {
    let mut configs = if cli.configs.is_empty() {
        vec![Config::empty("command line")]
    } else {
        cli.configs.iter().map(|p| Config::load(p)).collect::<Result<_>>()?
    };
    for c in &mut configs {
        for kv in &cli.sets {
            c.apply_override(kv)?;
        }
    }
    Ok(configs)
}

/// Runs the command for every config; returns the failures.
pub fn execute(cli: &Cli) -> Result<Vec<(String, anyhow::Error)>> {
    if cli.jobs == 0 {
        bail!("--jobs must be at least 1");
    }
    let configs = load_configs(cli)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build()?;
    let results: Vec<_> = pool.install(|| {
        configs
            .par_iter()
            .map(|c| cli.command.run(c).map_err(|e| (c.source.clone(), e)))
            .collect()
    });
    Ok(results.into_iter().filter_map(Result::err).collect())
}

pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match execute(&cli) {
        Ok(failures) if failures.is_empty() => ExitCode::SUCCESS,
        Ok(failures) => {
            for (source, e) in failures {
                eprintln!("error: {source}: {e:#}");
            }
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

/// Convenience for callers that build a config in code.
pub fn run_with_config(command: Command, cfg: &Config) -> Result<()> {
    command.run(cfg)
}
