//! The outer training loop: collect whole episodes, interleave updates.

use super::{Agent, Transition, UpdateStatus};
use crate::env::Environment;
use crate::error::AgentError;

/// Summary of one training iteration (a block of collected episodes).
#[derive(Clone, Copy, Debug)]
pub struct IterationReport {
    /// 1-based index of this iteration across the agent's lifetime.
    pub iteration: u64,
    /// Global environment steps after this iteration.
    pub env_steps_total: u64,
    /// Episodes completed within this iteration.
    pub episodes: u64,
    pub reward_min: f64,
    pub reward_mean: f64,
    pub reward_max: f64,
    /// Mean critic loss over the updates run this iteration; NaN when the
    /// whole iteration fell inside the warmup window.
    pub critic_loss: f64,
    /// Mean actor objective (critic score of the actor's actions); NaN
    /// during warmup like `critic_loss`.
    pub actor_objective: f64,
}

/// Collect at least `samples_per_iteration` environment steps in whole
/// episodes, pushing every transition into the replay buffer and running a
/// gradient update every `update_every` steps (once warm). Episode reseeds
/// are derived from the agent's lifetime episode counter, so a run is one
/// reproducible stream regardless of how steps are sliced into iterations.
pub fn train_iteration<E>(agent: &mut Agent, env: &mut E) -> Result<IterationReport, AgentError>
where
    E: Environment + ?Sized,
{
    let goal = agent.config.samples_per_iteration;
    let update_every = agent.config.update_every as u64;

    let mut steps_this_iteration = 0usize;
    let mut returns: Vec<f64> = Vec::new();
    let mut loss_sum = 0.0;
    let mut objective_sum = 0.0;
    let mut updates = 0u64;

    while steps_this_iteration < goal {
        let mut observation = env.reset(agent.episodes_total)?;
        agent.begin_episode();
        let mut episode_return = 0.0;

        loop {
            let action = agent.act_exploring(observation.as_slice())?;
            let step = env.step(&action)?;
            episode_return += step.reward;
            agent.observe_transition(Transition {
                state: observation.into_vec(),
                action,
                reward: step.reward,
                next_state: step.observation.as_slice().to_vec(),
                done: step.done,
            })?;
            steps_this_iteration += 1;

            if agent.env_steps_total % update_every == 0 {
                if let UpdateStatus::Updated(report) = agent.update()? {
                    loss_sum += report.critic_loss;
                    objective_sum += report.actor_objective;
                    updates += 1;
                }
            }

            observation = step.observation;
            if step.done {
                break;
            }
        }
        agent.episodes_total += 1;
        returns.push(episode_return);
    }

    agent.iterations_done += 1;

    let episodes = returns.len() as u64;
    let reward_min = returns.iter().copied().fold(f64::INFINITY, f64::min);
    let reward_max = returns.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let reward_mean = returns.iter().sum::<f64>() / returns.len() as f64;
    let (critic_loss, actor_objective) = if updates > 0 {
        (loss_sum / updates as f64, objective_sum / updates as f64)
    } else {
        (f64::NAN, f64::NAN)
    };

    Ok(IterationReport {
        iteration: agent.iterations_done,
        env_steps_total: agent.env_steps_total,
        episodes,
        reward_min,
        reward_mean,
        reward_max,
        critic_loss,
        actor_objective,
    })
}

/// Run one episode with the deterministic policy (no exploration noise) and
/// return its total reward. Does not touch the replay buffer or counters.
pub fn run_greedy_episode<E>(agent: &Agent, env: &mut E, seed: u64) -> Result<f64, AgentError>
where
    E: Environment + ?Sized,
{
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
