//! Agent hyperparameters, their validation, and a canonical fingerprint.
//!
//! The whole configuration serialises to TOML; the SHA-256 of that canonical
//! text is embedded in checkpoints so a resumed run can prove it is
//! continuing the same experiment.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::AgentError;

/// Exploration-noise process selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    /// Temporally correlated noise that mean-reverts to zero; the usual
    /// choice for deterministic-policy agents on physical control tasks.
    OrnsteinUhlenbeck,
    /// Independent draws each step.
    Gaussian,
}

/// Exploration noise added to the actor's output during training.
///
/// `sigma` anneals linearly from `sigma_initial` (step 0) to `sigma_final`
/// (step `anneal_steps`) and stays there. `theta` is the mean-reversion
/// rate and only matters for [`NoiseKind::OrnsteinUhlenbeck`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub kind: NoiseKind,
    pub theta: f64,
    pub sigma_initial: f64,
    pub sigma_final: f64,
    pub anneal_steps: u64,
}

impl Default for NoiseConfig {
    fn default() -> NoiseConfig {
        NoiseConfig {
            kind: NoiseKind::OrnsteinUhlenbeck,
            theta: 0.15,
            sigma_initial: 0.2,
            sigma_final: 0.05,
            anneal_steps: 100_000,
        }
    }
}

impl NoiseConfig {
    /// Noise scale at a given global environment step.
    pub fn sigma_at(&self, step: u64) -> f64 {
        if step >= self.anneal_steps {
            return self.sigma_final;
        }
        let frac = step as f64 / self.anneal_steps as f64;
        self.sigma_initial + frac * (self.sigma_final - self.sigma_initial)
    }

    fn validate(&self) -> Result<(), AgentError> {
        let bad = |msg: String| Err(AgentError::BadConfig(msg));
        if !(self.theta.is_finite() && self.theta >= 0.0) {
            return bad(format!("noise theta must be finite and >= 0, got {}", self.theta));
        }
        if !(self.sigma_initial.is_finite() && self.sigma_initial >= 0.0) {
            return bad(format!(
                "noise sigma_initial must be finite and >= 0, got {}",
                self.sigma_initial
            ));
        }
        if !(self.sigma_final.is_finite() && self.sigma_final >= 0.0) {
            return bad(format!(
                "noise sigma_final must be finite and >= 0, got {}",
                self.sigma_final
            ));
        }
        if self.sigma_final > self.sigma_initial {
            return bad(format!(
                "noise must anneal downwards: sigma_final {} > sigma_initial {}",
                self.sigma_final, self.sigma_initial
            ));
        }
        Ok(())
    }
}

/// Everything the agent needs to know about itself.
///
/// Field order matters only in that the serialised TOML is the canonical
/// form hashed by [`AgentConfig::hash_hex`]; changing the order (or any
/// field name) changes every fingerprint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentConfig {
    /// Width of the observation vector the actor consumes.
    pub observation_dim: usize,
    /// Width of the action vector the actor emits (tanh, so each entry is
    /// in [-1, 1]).
    pub action_dim: usize,
    pub actor_hidden: Vec<usize>,
    pub critic_hidden: Vec<usize>,
    pub actor_learning_rate: f64,
    pub critic_learning_rate: f64,
    /// Discount factor gamma.
    pub discount: f64,
    /// Polyak rate for the target networks.
    pub soft_update_tau: f64,
    /// SGD minibatch drawn from the replay buffer per gradient update.
    pub minibatch: usize,
    pub replay_capacity: usize,
    /// Environment steps to collect before the first gradient update.
    pub warmup_steps: usize,
    /// Environment steps collected per training iteration (whole episodes;
    /// an iteration never stops mid-episode).
    pub samples_per_iteration: usize,
    /// Run one gradient update every this many environment steps.
    pub update_every: usize,
    pub noise: NoiseConfig,
}

impl AgentConfig {
    /// Full-scale defaults: two hidden layers of 400 and 300 units for both
    /// networks, gamma 0.99, tau 0.005, minibatch 64, one update per step,
    /// a million-slot replay buffer and 40,000 samples per iteration.
    pub fn full_scale(observation_dim: usize, action_dim: usize) -> AgentConfig {
        AgentConfig {
            observation_dim,
            action_dim,
            actor_hidden: vec![400, 300],
            critic_hidden: vec![400, 300],
            actor_learning_rate: 1.0e-4,
            critic_learning_rate: 1.0e-3,
            discount: 0.99,
            soft_update_tau: 0.005,
            minibatch: 64,
            replay_capacity: 1_000_000,
            warmup_steps: 1_000,
            samples_per_iteration: 40_000,
            update_every: 1,
            noise: NoiseConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<(), AgentError> {
        let bad = |msg: String| Err(AgentError::BadConfig(msg));
        if self.observation_dim == 0 || self.action_dim == 0 {
            return bad("observation_dim and action_dim must be positive".into());
        }
        for (&w, which) in self
            .actor_hidden
            .iter()
            .map(|w| (w, "actor"))
            .chain(self.critic_hidden.iter().map(|w| (w, "critic")))
        {
            if w == 0 {
                return bad(format!("{which}_hidden contains a zero-width layer"));
            }
        }
        for (rate, which) in [
            (self.actor_learning_rate, "actor"),
            (self.critic_learning_rate, "critic"),
        ] {
            if !(rate.is_finite() && rate > 0.0) {
                return bad(format!("{which}_learning_rate must be finite and > 0, got {rate}"));
            }
        }
        if !(self.discount > 0.0 && self.discount <= 1.0) {
            return bad(format!("discount must be in (0, 1], got {}", self.discount));
        }
        if !(self.soft_update_tau > 0.0 && self.soft_update_tau <= 1.0) {
            return bad(format!(
                "soft_update_tau must be in (0, 1], got {}",
                self.soft_update_tau
            ));
        }
        if self.minibatch == 0 {
            return bad("minibatch must be positive".into());
        }
        if self.replay_capacity < self.minibatch {
            return bad(format!(
                "replay_capacity {} is smaller than the minibatch {}",
                self.replay_capacity, self.minibatch
            ));
        }
        if self.samples_per_iteration == 0 {
            return bad("samples_per_iteration must be positive".into());
        }
        if self.update_every == 0 {
            return bad("update_every must be positive".into());
        }
        self.noise.validate()
    }

    /// The canonical serialised form (TOML).
    pub fn canonical_toml(&self) -> String {
        toml::to_string(self).expect("agent config always serialises")
    }

    /// SHA-256 of [`AgentConfig::canonical_toml`].
    pub fn hash_bytes(&self) -> [u8; 32] {
        let digest = Sha256::digest(self.canonical_toml().as_bytes());
        digest.into()
    }

    /// Hex form of the fingerprint, as shown in error messages and manifests.
    pub fn hash_hex(&self) -> String {
        let mut out = String::with_capacity(64);
        for byte in self.hash_bytes() {
            out.push_str(&format!("{byte:02x}"));
        }
        out
    }
}
