//! The `sweep` subcommand: train every hidden-layer configuration in a
//! grid on the truncated-horizon scenario with a shared seed, then merge
//! the results into one comparison table.
//!
//! A failing configuration is recorded in the table and does not stop the
//! others. `GRIDRL_THREADS` (the harness's only environment variable) sets
//! how many configurations train concurrently; the default is one, which
//! also keeps the whole sweep deterministic on a single core.

use std::collections::VecDeque;
use std::fs;
use std::path::PathBuf;
use std::sync::Mutex;

use clap::Args;
use gridrl_core::ddpg::AgentConfig;

use crate::error::{CliError, CliResult};
use crate::manifest::{write_manifest, Manifest, ScenarioStamp};
use crate::presets::{hidden_label, hidden_slug, parse_grid, Preset};
use crate::train::{execute_run, RunOutcome, RunPlan};

pub const DEFAULT_GRID: &str = "400x300,300x500,256x256";

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Scenario TOML; defaults to the packaged truncated-horizon scenario.
    #[arg(long)]
    pub scenario: Option<PathBuf>,

    /// Comma-separated hidden-layer grid, e.g. 400x300,300x500,256x256.
    #[arg(long, default_value = DEFAULT_GRID)]
    pub grid: String,

    /// Seed shared by every configuration in the grid.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Training iterations per configuration.
    #[arg(long, default_value_t = 10)]
    pub iterations: u64,

    /// Environment steps collected per iteration.
    #[arg(long, default_value_t = 1_000)]
    pub samples: usize,

    /// Run one gradient update every N environment steps.
    #[arg(long, default_value_t = 2)]
    pub update_every: usize,

    /// Artifact directory; created if absent. Each configuration gets a
    /// `hidden_<spec>` subdirectory.
    #[arg(long)]
    pub out: PathBuf,

    /// Record wall_seconds as 0.000 so metrics files are byte-reproducible.
    #[arg(long)]
    pub fixed_clock: bool,
}

struct SweepResult {
    index: usize,
    label: String,
    outcome: Result<RunOutcome, CliError>,
}

pub fn cmd_sweep(args: &SweepArgs) -> CliResult<()> {
    let grid = parse_grid(&args.grid)?;
    let threads = thread_count()?;
    let scenario_path = match &args.scenario {
        Some(p) => p.clone(),
        None => PathBuf::from("scenarios/sweep.toml"),
    };
    if !scenario_path.exists() {
        return Err(CliError::config(format!(
            "scenario file {} not found (pass --scenario explicitly?)",
            scenario_path.display()
        )));
    }
    fs::create_dir_all(&args.out).map_err(|e| {
        CliError::config(format!("cannot create output dir {}: {e}", args.out.display()))
    })?;

    // Stamp the sweep directory itself; per-configuration manifests are
    // written by the individual runs.
    let text = fs::read_to_string(&scenario_path).map_err(|e| {
        CliError::config(format!("cannot read scenario {}: {e}", scenario_path.display()))
    })?;
    let mut manifest = Manifest::new("sweep", args.seed, ScenarioStamp::new(&scenario_path, &text));
    manifest.iterations = Some(args.iterations);
    manifest.fixed_clock = Some(args.fixed_clock);
    manifest.grid = Some(grid.iter().map(|dims| hidden_label(dims)).collect());
    write_manifest(&args.out, &manifest)?;

    let jobs: Mutex<VecDeque<(usize, Vec<usize>)>> =
        Mutex::new(grid.iter().cloned().enumerate().collect());
    let results: Mutex<Vec<SweepResult>> = Mutex::new(Vec::with_capacity(grid.len()));

    std::thread::scope(|scope| {
        for _ in 0..threads.min(grid.len()) {
            scope.spawn(|| loop {
                let job = jobs.lock().expect("queue poisoned").pop_front();
                let Some((index, dims)) = job else { break };
                let label = hidden_label(&dims);
                let plan = RunPlan {
                    command: "sweep",
                    scenario_path: scenario_path.clone(),
                    agent_config: sweep_agent_config(args, &dims),
                    seed: args.seed,
                    iterations: args.iterations,
                    out: args.out.join(format!("hidden_{}", hidden_slug(&dims))),
                    resume: None,
                    checkpoint_every: 0,
                    fixed_clock: args.fixed_clock,
                    quiet: true,
                };
                let outcome = execute_run(&plan);
                match &outcome {
                    Ok(done) => println!(
                        "config {label}: final reward mean {:.3}",
                        done.final_report.map_or(f64::NAN, |r| r.reward_mean)
                    ),
                    Err(err) => println!("config {label}: FAILED ({err})"),
                }
                results.lock().expect("results poisoned").push(SweepResult {
                    index,
                    label,
                    outcome,
                });
            });
        }
    });

    let mut results = results.into_inner().expect("results poisoned");
    results.sort_by_key(|r| r.index);

    let mut table = String::from("label,status,iterations,env_steps_total,final_reward_mean\n");
    let mut successes = 0usize;
    for result in &results {
        match &result.outcome {
            Ok(outcome) => {
                successes += 1;
                let report = outcome.final_report.as_ref();
                table.push_str(&format!(
                    "\"{}\",ok,{},{},{}\n",
                    result.label,
                    report.map_or(0, |r| r.iteration),
                    outcome.env_steps_total,
                    report.map_or(f64::NAN, |r| r.reward_mean),
                ));
            }
            Err(err) => {
                let message = err.to_string().replace('"', "'");
                table.push_str(&format!("\"{}\",\"failed: {}\",,,\n", result.label, message));
            }
        }
    }
    let table_path = args.out.join("comparison.csv");
    fs::write(&table_path, table)
        .map_err(CliError::io(format!("writing {}", table_path.display())))?;

    println!("sweep complete: {successes}/{} configurations ok", results.len());
    if successes == 0 {
        return Err(CliError::runtime("every sweep configuration failed"));
    }
    Ok(())
}

/// Desk hyperparameters with the grid's hidden widths and the sweep's
/// (shorter) collection schedule.
fn sweep_agent_config(args: &SweepArgs, dims: &[usize]) -> AgentConfig {
    let mut config = Preset::Desk.agent_config();
    config.actor_hidden = dims.to_vec();
    config.critic_hidden = dims.to_vec();
    config.samples_per_iteration = args.samples;
    config.update_every = args.update_every;
    config.warmup_steps = args.samples.max(1);
    // Reach the final exploration level by roughly 60% of the run.
    config.noise.anneal_steps = ((args.iterations as usize * args.samples) * 3 / 5) as u64;
    config
}

fn thread_count() -> CliResult<usize> {
    match std::env::var("GRIDRL_THREADS") {
        Err(std::env::VarError::NotPresent) => Ok(1),
        Err(e) => Err(CliError::config(format!("GRIDRL_THREADS: {e}"))),
        Ok(text) => match text.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(CliError::config(format!(
                "GRIDRL_THREADS must be a positive integer, got `{text}`"
            ))),
        },
    }
}
