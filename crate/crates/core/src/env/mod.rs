//! Episodic MDP wrapper over the simulator.
//!
//! One episode is one control period: the environment replays the historical
//! years at reset, then each `step` takes an investment action, simulates a
//! year, and returns the normalised observation, a scalar reward, and a
//! terminal flag once the horizon is reached.

pub mod layout;
pub mod trace;

pub use layout::{build_observation, decode_action, OBS_LEN};
pub use trace::{EpisodeMetrics, EpisodeTrace, TRACE_HEADER};

use std::sync::Arc;

use crate::error::EnvError;
use crate::scenario::{RewardConfig, RewardMode, Scenario};
use crate::sim::{PowerSystem, YearRecord};
use crate::types::{PerTech, N_ACTIONS};

/// A normalised observation vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Observation(Vec<f64>);

impl Observation {
    pub fn from_vec(v: Vec<f64>) -> Observation {
        Observation(v)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Extra, non-observed measurements attached to a step.
#[derive(Clone, Debug)]
pub struct StepInfo {
    /// The year that was just simulated.
    pub year: i32,
    pub cumulative_co2_gt: f64,
    pub lcoe_with_tax: f64,
    pub lcoe_without_tax: f64,
    /// Generation mix over both regions for the year.
    pub generation_mix: PerTech<f64>,
}

/// What one environment step returns.
#[derive(Clone, Debug)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
    pub info: Option<StepInfo>,
}

/// Minimal episodic-environment interface shared by the power system and the
/// self-test control problem.
pub trait Environment {
    fn observation_len(&self) -> usize;
    fn action_len(&self) -> usize;
    /// Start a new episode. The seed selects among episode variants for
    /// stochastic environments; deterministic ones may ignore it.
    fn reset(&mut self, seed: u64) -> Result<Observation, EnvError>;
    fn step(&mut self, action: &[f64]) -> Result<StepResult, EnvError>;
}

/// The scalar reward: `-(co2_weight * cumulative_co2_gt + lcoe / lcoe_divisor)`
/// with the levelised cost taken before taxes.
pub fn reward_value(cfg: &RewardConfig, cumulative_co2_gt: f64, lcoe_without_tax: f64) -> f64 {
    -(cfg.co2_weight * cumulative_co2_gt + lcoe_without_tax / cfg.lcoe_divisor)
}

/// The investment MDP over [`PowerSystem`].
#[derive(Clone, Debug)]
pub struct PowerEnv {
    scenario: Arc<Scenario>,
    system: PowerSystem,
    started: bool,
    done: bool,
    trace: EpisodeTrace,
}

impl PowerEnv {
    /// The environment starts unseeded; call [`Environment::reset`] before
    /// stepping.
    pub fn new(scenario: Arc<Scenario>) -> PowerEnv {
        let system = PowerSystem::new(Arc::clone(&scenario));
        PowerEnv {
            scenario,
            system,
            started: false,
            done: false,
            trace: EpisodeTrace::default(),
        }
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn system(&self) -> &PowerSystem {
        &self.system
    }

    /// Trace of the current (or finished) episode, historical years included.
    pub fn trace(&self) -> &EpisodeTrace {
        &self.trace
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    /// Number of decisions per episode.
    pub fn episode_steps(&self) -> usize {
        self.scenario.episode_steps()
    }

    fn observe(&self) -> Observation {
        Observation(build_observation(&self.scenario, &self.system.state))
    }

    fn push_trace(&mut self, rec: YearRecord, reward: f64) {
        self.trace.records.push(rec);
        self.trace.rewards.push(reward);
    }
}

impl Environment for PowerEnv {
    fn observation_len(&self) -> usize {
        OBS_LEN
    }

    fn action_len(&self) -> usize {
        N_ACTIONS
    }

    /// Rebuild the system and replay the historical years. The environment
    /// itself is deterministic, so the seed is not consumed; it exists to
    /// satisfy the shared interface.
    fn reset(&mut self, _seed: u64) -> Result<Observation, EnvError> {
        self.system = PowerSystem::new(Arc::clone(&self.scenario));
        let historical = self.system.historical_rollout()?;
        self.trace = EpisodeTrace {
            historical_len: historical.len(),
            ..Default::default()
        };
        for rec in historical {
            let r = reward_value(
                &self.scenario.reward,
                rec.cumulative_co2_gt,
                rec.lcoe_without_tax,
            );
            self.push_trace(rec, r);
        }
        self.started = true;
        self.done = false;
        Ok(self.observe())
    }

    fn step(&mut self, action: &[f64]) -> Result<StepResult, EnvError> {
        if !self.started || self.done {
            return Err(EnvError::EpisodeDone);
        }
        if action.len() != N_ACTIONS {
            return Err(EnvError::ActionLength {
                expected: N_ACTIONS,
                got: action.len(),
            });
        }
        let invest = decode_action(action, &self.scenario);
        let rec = self.system.run_control_year(&invest)?;
        let done = self.system.state.year >= self.scenario.horizon.end_year;
        let value = reward_value(
            &self.scenario.reward,
            rec.cumulative_co2_gt,
            rec.lcoe_without_tax,
        );
        let reward = match self.scenario.reward.mode {
            RewardMode::PerStep => value,
            RewardMode::Terminal => {
                if done {
                    value
                } else {
                    0.0
                }
            }
        };
        let info = StepInfo {
            year: rec.year,
            cumulative_co2_gt: rec.cumulative_co2_gt,
            lcoe_with_tax: rec.lcoe_with_tax,
            lcoe_without_tax: rec.lcoe_without_tax,
            generation_mix: rec.generation_mix().unwrap_or(PerTech::zeros()),
        };
        self.done = done;
        self.push_trace(rec, reward);
        Ok(StepResult {
            observation: self.observe(),
            reward,
            done,
            info: Some(info),
        })
    }
}
