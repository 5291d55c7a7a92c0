//! Named hyperparameter bundles and the grid-label conventions.

use clap::ValueEnum;
use gridrl_core::ddpg::{AgentConfig, NoiseConfig, NoiseKind};
use gridrl_core::env::OBS_LEN;
use gridrl_core::types::N_ACTIONS;

use crate::error::{CliError, CliResult};

/// A preset picks the default scenario file, iteration budget, and agent
/// configuration. Individual flags can override any of the three.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Desk scale: 2017-2030 control horizon, small networks, minutes to
    /// train on one core.
    Desk,
    /// Full scale: 2050 horizon, 400x300 networks, a 10^6-slot replay
    /// buffer and 40k samples per iteration. Hours, not minutes.
    Full,
}

impl Preset {
    pub fn scenario_path(self) -> &'static str {
        match self {
            Preset::Desk => "scenarios/desk.toml",
            Preset::Full => "scenarios/full.toml",
        }
    }

    pub fn iterations(self) -> u64 {
        match self {
            Preset::Desk => 24,
            Preset::Full => 10,
        }
    }

    pub fn agent_config(self) -> AgentConfig {
        match self {
            Preset::Desk => AgentConfig {
                observation_dim: OBS_LEN,
                action_dim: N_ACTIONS,
                actor_hidden: vec![64, 64],
                critic_hidden: vec![64, 64],
                actor_learning_rate: 3.0e-4,
                critic_learning_rate: 1.0e-3,
                discount: 0.99,
                soft_update_tau: 0.01,
                minibatch: 64,
                replay_capacity: 100_000,
                warmup_steps: 2_000,
                samples_per_iteration: 2_000,
                update_every: 1,
                noise: NoiseConfig {
                    kind: NoiseKind::OrnsteinUhlenbeck,
                    theta: 0.15,
                    sigma_initial: 0.4,
                    sigma_final: 0.05,
                    anneal_steps: 30_000,
                },
            },
            Preset::Full => AgentConfig::full_scale(OBS_LEN, N_ACTIONS),
        }
    }
}

/// Parse a hidden-layer spec like `400x300` (or a single `256`).
pub fn parse_hidden(text: &str) -> CliResult<Vec<usize>> {
    let dims: Result<Vec<usize>, _> =
        text.split('x').map(|part| part.trim().parse::<usize>()).collect();
    match dims {
        Ok(widths) if !widths.is_empty() && widths.iter().all(|&w| w > 0) => Ok(widths),
        _ => Err(CliError::config(format!(
            "bad hidden-layer spec `{text}`: expected positive widths like 400x300"
        ))),
    }
}

/// Parse a sweep grid: comma-separated hidden specs, e.g.
/// `400x300,300x500,256x256`.
pub fn parse_grid(text: &str) -> CliResult<Vec<Vec<usize>>> {
    let entries: Vec<&str> = text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if entries.is_empty() {
        return Err(CliError::config("sweep grid is empty"));
    }
    entries.into_iter().map(parse_hidden).collect()
}

/// Human label keying sweep outputs, e.g. `[400, 300]`.
pub fn hidden_label(dims: &[usize]) -> String {
    let mut label = String::from("[");
    for (i, d) in dims.iter().enumerate() {
        if i > 0 {
            label.push_str(", ");
        }
        label.push_str(&d.to_string());
    }
    label.push(']');
    label
}

/// Filesystem-safe form of a hidden spec, e.g. `400x300`.
pub fn hidden_slug(dims: &[usize]) -> String {
    dims.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("x")
}
