//! The `evaluate` subcommand: noise-free rollouts of a trained checkpoint,
//! per-episode trace CSVs, and a TOML summary (optionally with a paired
//! uniform-random baseline run by the same command).

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::path::PathBuf;

use clap::Args;
use gridrl_core::ddpg::{read_agent, Agent};
use gridrl_core::env::{Environment, PowerEnv, OBS_LEN};
use gridrl_core::types::{PerTech, Technology, N_ACTIONS};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::manifest::{write_manifest, Manifest};
use crate::presets::Preset;
use crate::train::{load_scenario, resolve_scenario};

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Agent checkpoint to roll out.
    #[arg(long)]
    pub checkpoint: PathBuf,

    /// Scenario TOML (defaults to the preset's packaged path).
    #[arg(long)]
    pub scenario: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Preset::Desk)]
    pub preset: Preset,

    /// Number of noise-free episodes to roll out.
    #[arg(long, default_value_t = 20)]
    pub episodes: usize,

    /// Base seed for the episode resets (and the random baseline).
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Artifact directory; created if absent.
    #[arg(long)]
    pub out: PathBuf,

    /// Also roll out a uniform-random policy for the same episode count and
    /// report the paired comparison.
    #[arg(long)]
    pub compare_random: bool,
}

#[derive(Serialize)]
struct Summary {
    evaluation: EvaluationBlock,
    final_year_mix: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    random: Option<RandomBlock>,
}

#[derive(Serialize)]
struct EvaluationBlock {
    episodes: usize,
    mean_reward: f64,
    /// Cumulative CO2 over the whole horizon, final episode, Gt.
    cumulative_co2_gt: f64,
    /// CO2 accrued during the control period only, mean over episodes, Gt.
    mean_control_co2_gt: f64,
    /// Mean zero-emission share of generation over the final three years.
    zero_emission_share_final3: f64,
}

#[derive(Serialize)]
struct RandomBlock {
    episodes: usize,
    mean_reward: f64,
    mean_control_co2_gt: f64,
    /// (trained - random) / |random|, on mean episode reward.
    reward_improvement: f64,
    /// trained / random, on mean control-period CO2.
    co2_ratio: f64,
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> CliResult<()> {
    if args.episodes == 0 {
        return Err(CliError::config("--episodes must be at least 1"));
    }
    let mut file = File::open(&args.checkpoint).map_err(|e| {
        CliError::config(format!("cannot open checkpoint {}: {e}", args.checkpoint.display()))
    })?;
    let agent = read_agent(&mut file).map_err(|e| {
        CliError::config(format!("cannot load checkpoint {}: {e}", args.checkpoint.display()))
    })?;
    if agent.config().observation_dim != OBS_LEN || agent.config().action_dim != N_ACTIONS {
        return Err(CliError::config(format!(
            "checkpoint incompatible with this scenario: networks expect \
             {} observations / {} actions, the environment provides {} / {}",
            agent.config().observation_dim,
            agent.config().action_dim,
            OBS_LEN,
            N_ACTIONS,
        )));
    }

    let scenario_path = resolve_scenario(args.scenario.as_deref(), args.preset)?;
    let (scenario, stamp) = load_scenario(&scenario_path)?;
    fs::create_dir_all(&args.out).map_err(|e| {
        CliError::config(format!("cannot create output dir {}: {e}", args.out.display()))
    })?;

    let mut manifest = Manifest::new("evaluate", args.seed, stamp);
    manifest.episodes = Some(args.episodes);
    manifest.agent = Some(agent.config());
    write_manifest(&args.out, &manifest)?;

    let emission_factor = PerTech::from_fn(|t| scenario.techs[t].emission_factor);
    let mut env = PowerEnv::new(scenario.into_arc());

    let mut returns = Vec::with_capacity(args.episodes);
    let mut control_co2 = Vec::with_capacity(args.episodes);
    let mut final_mix = PerTech::zeros();
    let mut share_final3 = 0.0;
    let mut cumulative_co2 = 0.0;
    for episode in 0..args.episodes {
        returns.push(rollout_greedy(&mut env, &agent, args.seed + episode as u64)?);
        control_co2.push(env.trace().control_co2_gt());

        let path = args.out.join(format!("trace_ep{episode:03}.csv"));
        let mut buffer = Vec::new();
        env.trace()
            .write_csv(&mut buffer)
            .map_err(CliError::io("formatting trace"))?;
        fs::write(&path, buffer).map_err(CliError::io(format!("writing {}", path.display())))?;

        let metrics = env.trace().metrics()?;
        final_mix = metrics.final_mix;
        share_final3 = metrics.zero_emission_share_final(3, &emission_factor);
        cumulative_co2 = *metrics.cumulative_co2_gt.last().expect("non-empty trace");
    }
    let mean_reward = mean(&returns);
    let mean_co2 = mean(&control_co2);

    let random = if args.compare_random {
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed.wrapping_add(0x5eed_ba5e));
        let mut random_returns = Vec::with_capacity(args.episodes);
        let mut random_co2 = Vec::with_capacity(args.episodes);
        for episode in 0..args.episodes {
            env.reset(args.seed + episode as u64)?;
            let mut total = 0.0;
            loop {
                let action: Vec<f64> =
                    (0..N_ACTIONS).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                let step = env.step(&action)?;
                total += step.reward;
                if step.done {
                    break;
                }
            }
            random_returns.push(total);
            random_co2.push(env.trace().control_co2_gt());
        }
        let random_mean = mean(&random_returns);
        let random_co2_mean = mean(&random_co2);
        Some(RandomBlock {
            episodes: args.episodes,
            mean_reward: random_mean,
            mean_control_co2_gt: random_co2_mean,
            reward_improvement: (mean_reward - random_mean) / random_mean.abs(),
            co2_ratio: mean_co2 / random_co2_mean,
        })
    } else {
        None
    };

    let summary = Summary {
        evaluation: EvaluationBlock {
            episodes: args.episodes,
            mean_reward,
            cumulative_co2_gt: cumulative_co2,
            mean_control_co2_gt: mean_co2,
            zero_emission_share_final3: share_final3,
        },
        final_year_mix: Technology::ALL
            .iter()
            .map(|&t| (t.key().to_string(), final_mix[t]))
            .collect(),
        random,
    };
    let text = toml::to_string_pretty(&summary)
        .map_err(|e| CliError::runtime(format!("serialising summary: {e}")))?;
    let summary_path = args.out.join("summary.toml");
    fs::write(&summary_path, &text)
        .map_err(CliError::io(format!("writing {}", summary_path.display())))?;

    println!(
        "evaluated {} episode(s): mean reward {:.3}, control CO2 {:.6} Gt, \
         final-3yr zero-emission share {:.3}",
        args.episodes, mean_reward, mean_co2, share_final3
    );
    if let Some(r) = &summary.random {
        println!(
            "vs uniform-random: reward improvement {:.1}%, CO2 ratio {:.3}",
            r.reward_improvement * 100.0,
            r.co2_ratio
        );
    }
    Ok(())
}

/// One episode with the deterministic policy; the env's trace is left
/// holding the full horizon for export.
fn rollout_greedy(env: &mut PowerEnv, agent: &Agent, seed: u64) -> CliResult<f64> {
    let mut observation = env.reset(seed)?;
    let mut total = 0.0;
    loop {
        let action = agent.act(observation.as_slice())?;
        let step = env.step(&action)?;
        total += step.reward;
        observation = step.observation;
        if step.done {
            return Ok(total);
        }
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}
