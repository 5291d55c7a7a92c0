//! Deep deterministic policy gradient (DDPG) agent.
//!
//! Four networks: an actor mapping observations to tanh-bounded actions, a
//! critic scoring (observation, action) pairs, and a Polyak-averaged target
//! copy of each. Training interleaves environment steps (with exploration
//! noise) into a FIFO replay buffer with minibatch gradient updates:
//!
//! * critic: regress `Q(s, a)` onto `r + gamma * (1 - done) * Q'(s', mu'(s'))`
//!   (primed nets are the targets), squared error averaged over the batch;
//! * actor: ascend the critic's score of the actor's own action,
//!   `mean_b Q(s, mu(s))`, by backpropagating the critic's action gradient
//!   through the actor;
//! * targets: `theta' <- tau * theta + (1 - tau) * theta'` after each update.
//!
//! All randomness (weight init, exploration, minibatch sampling) flows from
//! one seed through separate counter-based RNG streams, so runs are
//! reproducible and checkpoints can persist the exact RNG positions.

pub mod checkpoint;
pub mod config;
pub mod noise;
pub mod replay;
pub mod toy;
pub mod train;

pub use checkpoint::{read_agent, write_agent};
pub use config::{AgentConfig, NoiseConfig, NoiseKind};
pub use noise::ExplorationNoise;
pub use replay::{ReplayBuffer, Transition};
pub use toy::ToyControlEnv;
pub use train::{run_greedy_episode, train_iteration, IterationReport};

use ndarray::{s, Array2, ArrayView2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::AgentError;
use crate::nn::{init_policy_style, soft_update, Activation, Adam, DenseNet};

/// RNG stream ids; one base seed fans out into independent streams so that
/// e.g. drawing more exploration noise never perturbs minibatch selection.
mod streams {
    pub const INIT: u64 = 1;
    pub const NOISE: u64 = 2;
    pub const SAMPLE: u64 = 3;
}

fn seeded_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// What one gradient update did.
#[derive(Clone, Copy, Debug)]
pub struct UpdateReport {
    /// Mean squared Bellman error of the critic minibatch (before the step).
    pub critic_loss: f64,
    /// Mean critic score of the actor's own actions (the quantity the actor
    /// ascends), measured after the critic step and before the actor step.
    pub actor_objective: f64,
}

/// Outcome of [`Agent::update`].
#[derive(Clone, Copy, Debug)]
pub enum UpdateStatus {
    /// Not enough experience collected yet; nothing was changed.
    WarmingUp { collected: usize, required: usize },
    Updated(UpdateReport),
}

/// The learner plus everything it owns: networks, optimisers, replay
/// buffer, exploration noise, RNG streams, and progress counters.
#[derive(Debug)]
pub struct Agent {
    config: AgentConfig,
    actor: DenseNet,
    critic: DenseNet,
    target_actor: DenseNet,
    target_critic: DenseNet,
    actor_opt: Adam,
    critic_opt: Adam,
    replay: ReplayBuffer,
    noise: ExplorationNoise,
    noise_rng: ChaCha8Rng,
    sample_rng: ChaCha8Rng,
    env_steps_total: u64,
    episodes_total: u64,
    iterations_done: u64,
}

impl Agent {
    pub fn new(config: AgentConfig, seed: u64) -> Result<Agent, AgentError> {
        config.validate()?;
        let mut init_rng = seeded_stream(seed, streams::INIT);
        let actor = init_policy_style(
            config.observation_dim,
            &config.actor_hidden,
            config.action_dim,
            Activation::Relu,
            Activation::Tanh,
            &mut init_rng,
        );
        let critic = init_policy_style(
            config.observation_dim + config.action_dim,
            &config.critic_hidden,
            1,
            Activation::Relu,
            Activation::Identity,
            &mut init_rng,
        );
        let target_actor = actor.clone();
        let target_critic = critic.clone();
        let actor_opt = Adam::new(&actor, config.actor_learning_rate);
        let critic_opt = Adam::new(&critic, config.critic_learning_rate);
        let replay = ReplayBuffer::new(config.replay_capacity);
        let noise = ExplorationNoise::new(config.noise, config.action_dim);
        Ok(Agent {
            config,
            actor,
            critic,
            target_actor,
            target_critic,
            actor_opt,
            critic_opt,
            replay,
            noise,
            noise_rng: seeded_stream(seed, streams::NOISE),
            sample_rng: seeded_stream(seed, streams::SAMPLE),
            env_steps_total: 0,
            episodes_total: 0,
            iterations_done: 0,
        })
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    pub fn actor(&self) -> &DenseNet {
        &self.actor
    }

    pub fn critic(&self) -> &DenseNet {
        &self.critic
    }

    pub fn target_actor(&self) -> &DenseNet {
        &self.target_actor
    }

    pub fn target_critic(&self) -> &DenseNet {
        &self.target_critic
    }

    pub fn replay_len(&self) -> usize {
        self.replay.len()
    }

    pub fn env_steps_total(&self) -> u64 {
        self.env_steps_total
    }

    pub fn episodes_total(&self) -> u64 {
        self.episodes_total
    }

    pub fn iterations_done(&self) -> u64 {
        self.iterations_done
    }

    /// Fail unless `expected` is the exact configuration this agent runs
    /// under. Used when resuming from a checkpoint.
    pub fn verify_config(&self, expected: &AgentConfig) -> Result<(), AgentError> {
        if &self.config == expected {
            Ok(())
        } else {
            Err(AgentError::ConfigMismatch {
                stored: self.config.hash_hex(),
                current: expected.hash_hex(),
            })
        }
    }

    /// The deterministic policy: no exploration noise.
    pub fn act(&self, observation: &[f64]) -> Result<Vec<f64>, AgentError> {
        Ok(self.actor.forward(observation)?)
    }

    /// Policy plus exploration noise, clamped back to the action box.
    pub fn act_exploring(&mut self, observation: &[f64]) -> Result<Vec<f64>, AgentError> {
        let mut action = self.actor.forward(observation)?;
        let noise = self.noise.sample(self.env_steps_total, &mut self.noise_rng);
        for (a, n) in action.iter_mut().zip(noise) {
            *a = (*a + n).clamp(-1.0, 1.0);
        }
        Ok(action)
    }

    /// Reset the temporal correlation of the noise process. Call at every
    /// episode boundary.
    pub fn begin_episode(&mut self) {
        self.noise.reset_episode();
    }

    /// Store one transition and advance the global step counter.
    pub fn observe_transition(&mut self, transition: Transition) -> Result<(), AgentError> {
        let obs = self.config.observation_dim;
        let act = self.config.action_dim;
        if transition.state.len() != obs || transition.next_state.len() != obs {
            return Err(AgentError::DimMismatch(format!(
                "transition states have widths {} / {}, agent expects {obs}",
                transition.state.len(),
                transition.next_state.len(),
            )));
        }
        if transition.action.len() != act {
            return Err(AgentError::DimMismatch(format!(
                "transition action has width {}, agent expects {act}",
                transition.action.len(),
            )));
        }
        self.replay.push(transition);
        self.env_steps_total += 1;
        Ok(())
    }

    fn warmup_threshold(&self) -> usize {
        self.config.warmup_steps.max(self.config.minibatch)
    }

    /// One gradient update (critic, actor, then both target nets), or a
    /// warming-up no-op when the buffer is not yet deep enough.
    pub fn update(&mut self) -> Result<UpdateStatus, AgentError> {
        let required = self.warmup_threshold();
        if self.replay.len() < required {
            return Ok(UpdateStatus::WarmingUp {
                collected: self.replay.len(),
                required,
            });
        }

        let b = self.config.minibatch;
        let obs_dim = self.config.observation_dim;
        let act_dim = self.config.action_dim;
        let indices = self.replay.sample_indices(&mut self.sample_rng, b);

        let mut states = Array2::zeros((b, obs_dim));
        let mut actions = Array2::zeros((b, act_dim));
        let mut next_states = Array2::zeros((b, obs_dim));
        let mut rewards = vec![0.0; b];
        let mut not_done = vec![0.0; b];
        for (row, &i) in indices.iter().enumerate() {
            let t = self.replay.get(i);
            states.row_mut(row).assign(&ndarray::ArrayView1::from(&t.state[..]));
            actions.row_mut(row).assign(&ndarray::ArrayView1::from(&t.action[..]));
            next_states
                .row_mut(row)
                .assign(&ndarray::ArrayView1::from(&t.next_state[..]));
            rewards[row] = t.reward;
            not_done[row] = if t.done { 0.0 } else { 1.0 };
        }

        // Bellman targets from the frozen nets.
        let next_actions = self.target_actor.forward_batch(next_states.view())?;
        let next_q = self
            .target_critic
            .forward_batch(concat_columns(next_states.view(), next_actions.view()).view())?;
        let mut targets = Array2::zeros((b, 1));
        for row in 0..b {
            targets[(row, 0)] =
                rewards[row] + self.config.discount * not_done[row] * next_q[(row, 0)];
        }

        // Critic regression step.
        let critic_in = concat_columns(states.view(), actions.view());
        let trace = self.critic.forward_trace(critic_in.view())?;
        let mut err = trace.output().clone();
        err -= &targets;
        let critic_loss = err.mapv(|e| e * e).mean().expect("non-empty batch");
        let dq = err.mapv(|e| 2.0 * e / b as f64);
        let (critic_grads, _) = self.critic.backward(&trace, &dq);
        self.critic_opt.step(&mut self.critic, &critic_grads);

        // Actor ascent step through the (just-updated) critic.
        let actor_trace = self.actor.forward_trace(states.view())?;
        let own_actions = actor_trace.output().clone();
        let chained_in = concat_columns(states.view(), own_actions.view());
        let chained_trace = self.critic.forward_trace(chained_in.view())?;
        let actor_objective = chained_trace.output().mean().expect("non-empty batch");
        let dj = Array2::from_elem((b, 1), 1.0 / b as f64);
        let (_, dinput) = self.critic.backward(&chained_trace, &dj);
        // Rows of dinput are d(mean Q)/d(s, a); keep the action block and
        // flip the sign so Adam's descent ascends the objective.
        let descent = dinput.slice(s![.., obs_dim..]).mapv(|g| -g);
        let (actor_grads, _) = self.actor.backward(&actor_trace, &descent);
        self.actor_opt.step(&mut self.actor, &actor_grads);

        soft_update(&mut self.target_actor, &self.actor, self.config.soft_update_tau);
        soft_update(&mut self.target_critic, &self.critic, self.config.soft_update_tau);

        Ok(UpdateStatus::Updated(UpdateReport {
            critic_loss,
            actor_objective,
        }))
    }
}

fn concat_columns<'a>(a: ArrayView2<'a, f64>, b: ArrayView2<'a, f64>) -> Array2<f64> {
    ndarray::concatenate(Axis(1), &[a, b]).expect("row counts match by construction")
}
