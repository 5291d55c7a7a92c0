//! The `train` subcommand and the run executor it shares with `sweep`.

use std::fs::{self, File};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Args;
use gridrl_core::ddpg::{read_agent, train_iteration, write_agent, Agent, AgentConfig, IterationReport};
use gridrl_core::env::PowerEnv;
use gridrl_core::scenario::Scenario;

use crate::error::{CliError, CliResult};
use crate::manifest::{write_manifest, Manifest, ScenarioStamp};
use crate::metrics::{MetricsLog, METRICS_NAME};
use crate::presets::{parse_hidden, Preset};

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Scenario TOML (defaults to the preset's packaged path).
    #[arg(long)]
    pub scenario: Option<PathBuf>,

    /// Named bundle of hyperparameters and default scenario.
    #[arg(long, value_enum, default_value_t = Preset::Desk)]
    pub preset: Preset,

    /// Seed for weight init, exploration, and minibatch sampling.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Total training iterations (lifetime total when resuming).
    #[arg(long)]
    pub iterations: Option<u64>,

    /// Artifact directory; created if absent.
    #[arg(long)]
    pub out: PathBuf,

    /// Continue from an agent checkpoint written under the same config.
    #[arg(long)]
    pub resume: Option<PathBuf>,

    /// Write a numbered checkpoint every N iterations (0: only the final).
    #[arg(long, default_value_t = 10)]
    pub checkpoint_every: u64,

    /// Override hidden widths of both networks, e.g. 400x300.
    #[arg(long)]
    pub hidden: Option<String>,

    /// Override environment steps collected per iteration.
    #[arg(long)]
    pub samples: Option<usize>,

    /// Record wall_seconds as 0.000 so metrics files are byte-reproducible.
    #[arg(long)]
    pub fixed_clock: bool,
}

/// A fully resolved training run: what `execute_run` needs to know.
pub struct RunPlan {
    pub command: &'static str,
    pub scenario_path: PathBuf,
    pub agent_config: AgentConfig,
    pub seed: u64,
    pub iterations: u64,
    pub out: PathBuf,
    pub resume: Option<PathBuf>,
    pub checkpoint_every: u64,
    pub fixed_clock: bool,
    /// Suppress per-iteration stdout (sweep workers).
    pub quiet: bool,
}

pub struct RunOutcome {
    pub final_report: Option<IterationReport>,
    pub env_steps_total: u64,
}

pub fn cmd_train(args: &TrainArgs) -> CliResult<()> {
    let mut config = args.preset.agent_config();
    if let Some(spec) = &args.hidden {
        let dims = parse_hidden(spec)?;
        config.actor_hidden = dims.clone();
        config.critic_hidden = dims;
    }
    if let Some(samples) = args.samples {
        config.samples_per_iteration = samples;
    }
    let plan = RunPlan {
        command: "train",
        scenario_path: resolve_scenario(args.scenario.as_deref(), args.preset)?,
        agent_config: config,
        seed: args.seed,
        iterations: args.iterations.unwrap_or_else(|| args.preset.iterations()),
        out: args.out.clone(),
        resume: args.resume.clone(),
        checkpoint_every: args.checkpoint_every,
        fixed_clock: args.fixed_clock,
        quiet: false,
    };
    let outcome = execute_run(&plan)?;
    if let Some(report) = outcome.final_report {
        println!(
            "done: {} iterations, {} env steps, final reward mean {:.3}",
            report.iteration, report.env_steps_total, report.reward_mean
        );
    }
    Ok(())
}

/// Use the explicit path when given; otherwise fall back to the preset's
/// conventional location (relative to the working directory).
pub fn resolve_scenario(explicit: Option<&Path>, preset: Preset) -> CliResult<PathBuf> {
    let path = match explicit {
        Some(p) => p.to_path_buf(),
        None => PathBuf::from(preset.scenario_path()),
    };
    if !path.exists() {
        return Err(CliError::config(format!(
            "scenario file {} not found (pass --scenario explicitly?)",
            path.display()
        )));
    }
    Ok(path)
}

pub fn load_scenario(path: &Path) -> CliResult<(Scenario, ScenarioStamp)> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read scenario {}: {e}", path.display())))?;
    let scenario = Scenario::from_toml_str(&text)?;
    Ok((scenario, ScenarioStamp::new(path, &text)))
}

/// Run (or continue) one training run to its iteration budget, writing the
/// manifest, metrics log, and checkpoints into `plan.out`.
pub fn execute_run(plan: &RunPlan) -> CliResult<RunOutcome> {
    let (scenario, stamp) = load_scenario(&plan.scenario_path)?;
    fs::create_dir_all(&plan.out).map_err(|e| {
        CliError::config(format!("cannot create output dir {}: {e}", plan.out.display()))
    })?;
    let ckpt_dir = plan.out.join("checkpoints");
    fs::create_dir_all(&ckpt_dir).map_err(|e| {
        CliError::config(format!("cannot create {}: {e}", ckpt_dir.display()))
    })?;

    let mut agent = match &plan.resume {
        Some(path) => {
            let mut file = File::open(path).map_err(|e| {
                CliError::config(format!("cannot open checkpoint {}: {e}", path.display()))
            })?;
            let agent = read_agent(&mut file).map_err(|e| {
                CliError::config(format!("cannot load checkpoint {}: {e}", path.display()))
            })?;
            agent
                .verify_config(&plan.agent_config)
                .map_err(|e| CliError::config(e.to_string()))?;
            agent
        }
        None => Agent::new(plan.agent_config.clone(), plan.seed)
            .map_err(|e| CliError::config(e.to_string()))?,
    };

    let mut manifest = Manifest::new(plan.command, plan.seed, stamp);
    manifest.iterations = Some(plan.iterations);
    manifest.checkpoint_every = Some(plan.checkpoint_every);
    manifest.fixed_clock = Some(plan.fixed_clock);
    manifest.resume = plan.resume.as_ref().map(|p| p.display().to_string());
    manifest.agent = Some(&plan.agent_config);
    write_manifest(&plan.out, &manifest)?;

    let metrics_path = plan.out.join(METRICS_NAME);
    let mut metrics = if plan.resume.is_some() && metrics_path.exists() {
        MetricsLog::resume(&metrics_path)
    } else {
        MetricsLog::create(&metrics_path)
    }
    .map_err(CliError::io(format!("opening {}", metrics_path.display())))?;

    let mut env = PowerEnv::new(scenario.into_arc());
    let clock = Instant::now();
    let mut last_report = None;

    while agent.iterations_done() < plan.iterations {
        let report = train_iteration(&mut agent, &mut env)?;
        let wall_seconds = if plan.fixed_clock {
            0.0
        } else {
            clock.elapsed().as_secs_f64()
        };
        metrics
            .write_row(&report, wall_seconds)
            .map_err(CliError::io("appending metrics row"))?;
        write_checkpoint(&ckpt_dir.join("checkpoint_latest.bin"), &agent)?;
        if plan.checkpoint_every > 0 && report.iteration % plan.checkpoint_every == 0 {
            write_checkpoint(
                &ckpt_dir.join(format!("ckpt_iter_{:04}.bin", report.iteration)),
                &agent,
            )?;
        }
        if !plan.quiet {
            println!(
                "iteration {:>4}/{}  env steps {:>8}  reward mean {:>10.3}  min {:>10.3}  max {:>10.3}",
                report.iteration,
                plan.iterations,
                report.env_steps_total,
                report.reward_mean,
                report.reward_min,
                report.reward_max,
            );
        }
        last_report = Some(report);
    }

    write_checkpoint(&ckpt_dir.join("ckpt_final.bin"), &agent)?;
    Ok(RunOutcome {
        final_report: last_report,
        env_steps_total: agent.env_steps_total(),
    })
}

/// Serialise to a temp file, then rename into place: the named checkpoint is
/// always either the previous complete one or the new complete one.
fn write_checkpoint(path: &Path, agent: &Agent) -> CliResult<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut file = File::create(&tmp)
            .map_err(CliError::io(format!("creating {}", tmp.display())))?;
        write_agent(agent, &mut file)
            .map_err(|e| CliError::runtime(format!("writing checkpoint: {e}")))?;
    }
    fs::rename(&tmp, path)
        .map_err(CliError::io(format!("renaming checkpoint into {}", path.display())))?;
    Ok(())
}
