//! A one-dimensional steering task small enough to have a known optimum.
//!
//! State is a scalar position. Each step the action nudges the position by
//! at most 0.25, the position is clamped to [-2, 2], and the reward is the
//! negative squared position. Episodes start at +1 or -1 (by seed parity)
//! and last exactly eight steps, so the best achievable mean episode return
//! is the same from either side and computable in closed form — handy as an
//! external yardstick for the learner.

use crate::env::{Environment, Observation, StepResult};
use crate::error::EnvError;

const GAIN: f64 = 0.25;
const POSITION_LIMIT: f64 = 2.0;

/// 1-D steering: drive the position to zero and keep it there.
#[derive(Clone, Debug)]
pub struct ToyControlEnv {
    position: f64,
    steps_taken: usize,
    started: bool,
    done: bool,
}

impl ToyControlEnv {
    pub const HORIZON: usize = 8;

    pub fn new() -> ToyControlEnv {
        ToyControlEnv {
            position: 0.0,
            steps_taken: 0,
            started: false,
            done: false,
        }
    }
}

impl Default for ToyControlEnv {
    fn default() -> ToyControlEnv {
        ToyControlEnv::new()
    }
}

impl Environment for ToyControlEnv {
    fn observation_len(&self) -> usize {
        1
    }

    fn action_len(&self) -> usize {
        1
    }

    fn reset(&mut self, seed: u64) -> Result<Observation, EnvError> {
        self.position = if seed % 2 == 0 { 1.0 } else { -1.0 };
        self.steps_taken = 0;
        self.started = true;
        self.done = false;
        Ok(Observation::from_vec(vec![self.position]))
    }

    fn step(&mut self, action: &[f64]) -> Result<StepResult, EnvError> {
        if !self.started || self.done {
            return Err(EnvError::EpisodeDone);
        }
        if action.len() != 1 {
            return Err(EnvError::ActionLength {
                expected: 1,
                got: action.len(),
            });
        }
        let push = action[0].clamp(-1.0, 1.0);
        self.position = (self.position + GAIN * push).clamp(-POSITION_LIMIT, POSITION_LIMIT);
        self.steps_taken += 1;
        self.done = self.steps_taken >= Self::HORIZON;
        Ok(StepResult {
            observation: Observation::from_vec(vec![self.position]),
            reward: -self.position * self.position,
            done: self.done,
            info: None,
        })
    }
}

/// Mean episode return of the best possible controller, averaged over the
/// two start states. Computed by running the analytic optimum — push as
/// hard as possible towards zero, then hold — through the real dynamics,
/// not by a separate formula, so it stays honest if the constants change.
pub fn optimal_mean_return() -> f64 {
    let mut env = ToyControlEnv::new();
    let mut total = 0.0;
    for seed in [0, 1] {
        let mut obs = env.reset(seed).expect("toy reset cannot fail");
        loop {
            let position = obs.as_slice()[0];
            let ideal = (-position / GAIN).clamp(-1.0, 1.0);
            let step = env.step(&[ideal]).expect("within horizon");
            total += step.reward;
            obs = step.observation;
            if step.done {
                break;
            }
        }
    }
    total / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn episodes_run_exactly_eight_steps() {
        let mut env = ToyControlEnv::new();
        env.reset(0).unwrap();
        for i in 0..ToyControlEnv::HORIZON {
            let r = env.step(&[0.0]).unwrap();
            assert_eq!(r.done, i + 1 == ToyControlEnv::HORIZON);
        }
        assert!(matches!(env.step(&[0.0]), Err(EnvError::EpisodeDone)));
    }

    #[test]
    fn start_state_alternates_with_seed_parity() {
        let mut env = ToyControlEnv::new();
        assert_eq!(env.reset(0).unwrap().as_slice(), &[1.0]);
        assert_eq!(env.reset(1).unwrap().as_slice(), &[-1.0]);
        assert_eq!(env.reset(2).unwrap().as_slice(), &[1.0]);
    }

    #[test]
    fn stepping_before_reset_is_an_error() {
        let mut env = ToyControlEnv::new();
        assert!(matches!(env.step(&[0.0]), Err(EnvError::EpisodeDone)));
    }

    #[test]
    fn actions_and_position_are_clamped() {
        let mut env = ToyControlEnv::new();
        env.reset(0).unwrap();
        // A wild action still moves the position by at most GAIN.
        let r = env.step(&[50.0]).unwrap();
        assert_eq!(r.observation.as_slice(), &[1.25]);
        // Pushing outward forever pins the position at the limit.
        for _ in 0..7 {
            let _ = env.step(&[1.0]).unwrap();
        }
        let mut env2 = ToyControlEnv::new();
        env2.reset(0).unwrap();
        let mut last = 0.0;
        for _ in 0..8 {
            last = env2.step(&[1.0]).unwrap().observation.as_slice()[0];
        }
        assert_eq!(last, POSITION_LIMIT);
    }

    #[test]
    fn optimal_return_matches_the_closed_form() {
        // From |position| = 1, the best trajectory decays 0.75, 0.5, 0.25,
        // then sits at zero: return -(0.5625 + 0.25 + 0.0625) = -0.875.
        let value = optimal_mean_return();
        assert!((value - (-0.875)).abs() < 1e-12, "{value}");
    }

    #[test]
    fn doing_nothing_is_much_worse_than_optimal() {
        let mut env = ToyControlEnv::new();
        env.reset(0).unwrap();
        let mut passive = 0.0;
        loop {
            let r = env.step(&[0.0]).unwrap();
            passive += r.reward;
            if r.done {
                break;
            }
        }
        assert!((passive - (-8.0)).abs() < 1e-12);
        assert!(passive < optimal_mean_return());
    }
}
