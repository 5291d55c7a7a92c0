//! Exploration noise added to the deterministic policy during training.

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::config::{NoiseConfig, NoiseKind};

/// Stateful exploration-noise process over an action vector.
///
/// The Ornstein-Uhlenbeck variant keeps one scalar state per action entry
/// and evolves it with unit time step:
///
/// ```text
/// x <- x + theta * (0 - x) + sigma * N(0, 1)
/// ```
///
/// which gives temporally correlated perturbations that mean-revert to
/// zero. The Gaussian variant is memoryless: `sigma * N(0, 1)` each call.
/// Either way `sigma` follows the linear anneal in [`NoiseConfig`].
#[derive(Clone, Debug)]
pub struct ExplorationNoise {
    config: NoiseConfig,
    state: Vec<f64>,
}

impl ExplorationNoise {
    pub fn new(config: NoiseConfig, dim: usize) -> ExplorationNoise {
        ExplorationNoise {
            config,
            state: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.state.len()
    }

    /// The process state (all zeros for the Gaussian kind). Exposed so
    /// checkpoints can persist mid-episode noise exactly.
    pub fn state(&self) -> &[f64] {
        &self.state
    }

    pub fn set_state(&mut self, state: Vec<f64>) {
        assert_eq!(state.len(), self.state.len(), "noise state has wrong width");
        self.state = state;
    }

    /// Forget temporal correlation at an episode boundary.
    pub fn reset_episode(&mut self) {
        self.state.iter_mut().for_each(|x| *x = 0.0);
    }

    /// Draw one noise vector. `step` is the global environment-step count,
    /// used only to position the sigma anneal.
    pub fn sample(&mut self, step: u64, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let sigma = self.config.sigma_at(step);
        match self.config.kind {
            NoiseKind::OrnsteinUhlenbeck => {
                for x in self.state.iter_mut() {
                    let n: f64 = StandardNormal.sample(rng);
                    *x += self.config.theta * (0.0 - *x) + sigma * n;
                }
                self.state.clone()
            }
            NoiseKind::Gaussian => self
                .state
                .iter()
                .map(|_| {
                    let n: f64 = StandardNormal.sample(rng);
                    sigma * n
                })
                .collect(),
        }
    }
}
