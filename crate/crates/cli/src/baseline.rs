//! The `baseline` subcommand: run the simulator across the whole horizon
//! with no agent at all, for side-by-side comparison with trained runs.
//!
//! History plays out exactly as in training; from the control handoff
//! onwards the fleet either just retires (`zero-investment`) or keeps
//! following cost-based diffusion (`diffusion`).

use std::fs;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use gridrl_core::env::trace::EpisodeTrace;
use gridrl_core::env::reward_value;
use gridrl_core::sim::PowerSystem;
use gridrl_core::types::{PerRegionTech, PerTech, Technology};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::manifest::{write_manifest, Manifest};
use crate::presets::Preset;
use crate::train::{load_scenario, resolve_scenario};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Continuation {
    /// No investment after the handoff: capacity only retires.
    ZeroInvestment,
    /// Keep the historical diffusion dynamics running to the end year.
    Diffusion,
}

impl Continuation {
    fn key(self) -> &'static str {
        match self {
            Continuation::ZeroInvestment => "zero-investment",
            Continuation::Diffusion => "diffusion",
        }
    }
}

#[derive(Args, Debug)]
pub struct BaselineArgs {
    /// Scenario TOML (defaults to the preset's packaged path).
    #[arg(long)]
    pub scenario: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Preset::Desk)]
    pub preset: Preset,

    /// What the system does after the control handoff.
    #[arg(long, value_enum, default_value_t = Continuation::ZeroInvestment)]
    pub continuation: Continuation,

    /// Artifact directory; created if absent.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct BaselineSummary {
    continuation: String,
    years: usize,
    cumulative_co2_gt: f64,
    control_co2_gt: f64,
    mean_reward: f64,
    final_year_mix: std::collections::BTreeMap<String, f64>,
}

pub fn cmd_baseline(args: &BaselineArgs) -> CliResult<()> {
    let scenario_path = resolve_scenario(args.scenario.as_deref(), args.preset)?;
    let (scenario, stamp) = load_scenario(&scenario_path)?;
    fs::create_dir_all(&args.out).map_err(|e| {
        CliError::config(format!("cannot create output dir {}: {e}", args.out.display()))
    })?;

    let mut manifest = Manifest::new("baseline", 0, stamp);
    manifest.continuation = Some(args.continuation.key());
    write_manifest(&args.out, &manifest)?;

    let reward_cfg = scenario.reward;
    let end_year = scenario.horizon.end_year;
    let mut system = PowerSystem::new(scenario.into_arc());

    let mut trace = EpisodeTrace::default();
    for record in system.historical_rollout()? {
        trace
            .rewards
            .push(reward_value(&reward_cfg, record.cumulative_co2_gt, record.lcoe_without_tax));
        trace.records.push(record);
    }
    trace.historical_len = trace.records.len();

    let zeros = PerRegionTech::zeros();
    while system.state.year < end_year {
        let record = match args.continuation {
            Continuation::ZeroInvestment => system.run_control_year(&zeros)?,
            Continuation::Diffusion => system.run_diffusion_year()?,
        };
        trace
            .rewards
            .push(reward_value(&reward_cfg, record.cumulative_co2_gt, record.lcoe_without_tax));
        trace.records.push(record);
    }

    let trace_path = args.out.join("trace.csv");
    let mut buffer = Vec::new();
    trace
        .write_csv(&mut buffer)
        .map_err(CliError::io("formatting trace"))?;
    fs::write(&trace_path, buffer)
        .map_err(CliError::io(format!("writing {}", trace_path.display())))?;

    let metrics = trace.metrics()?;
    let final_mix: PerTech<f64> = metrics.final_mix;
    let summary = BaselineSummary {
        continuation: args.continuation.key().to_string(),
        years: trace.records.len(),
        cumulative_co2_gt: *metrics.cumulative_co2_gt.last().expect("non-empty"),
        control_co2_gt: trace.control_co2_gt(),
        mean_reward: trace.control_rewards().iter().sum::<f64>()
            / trace.control_rewards().len().max(1) as f64,
        final_year_mix: Technology::ALL
            .iter()
            .map(|&t| (t.key().to_string(), final_mix[t]))
            .collect(),
    };
    let text = toml::to_string_pretty(&summary)
        .map_err(|e| CliError::runtime(format!("serialising summary: {e}")))?;
    fs::write(args.out.join("summary.toml"), text)
        .map_err(CliError::io("writing summary.toml"))?;

    println!(
        "baseline ({}): {} years, cumulative CO2 {:.6} Gt",
        args.continuation.key(),
        summary.years,
        summary.cumulative_co2_gt
    );
    Ok(())
}
