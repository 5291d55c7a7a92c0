//! Core library for a two-region electricity-investment learning testbed.
//!
//! The crate is organised in layers, each usable on its own:
//!
//! * [`types`] — technology/region identifiers and small fixed-size containers
//!   keyed by them.
//! * [`scenario`] — the TOML scenario format: costs, capacity factors, demand,
//!   diffusion parameters, normalisation constants.
//! * [`sim`] — the techno-economic simulator: quarterly merit-order dispatch,
//!   LCOE accounting, capacity retirement/expansion, endogenous learning
//!   curves, and share diffusion for the pre-control years.
//! * [`env`] — an episodic MDP wrapper over the simulator with a fixed
//!   normalised observation layout and a scalar emissions+cost reward.
//! * [`nn`] — a small dense-network substrate (f64, batch-first) with
//!   reverse-mode gradients, Adam, and binary checkpoints.
//! * [`ddpg`] — deterministic-policy-gradient agent: replay buffer,
//!   exploration noise, target networks, and an iteration-based train loop.

pub mod ddpg;
pub mod env;
pub mod error;
pub mod nn;
pub mod scenario;
pub mod sim;
pub mod types;

pub use ddpg::{Agent, AgentConfig, IterationReport, Transition};
pub use env::{Environment, Observation, PowerEnv, StepResult};
pub use error::{AgentError, EnvError, NetError, ScenarioError, SimError};
pub use scenario::Scenario;
pub use sim::{PowerSystem, YearRecord};
pub use types::{PerRegion, PerRegionTech, PerTech, Region, Technology, N_ACTIONS, N_REGIONS, N_TECH};
