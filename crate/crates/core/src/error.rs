//! Error types for every layer of the crate.

use crate::types::{Region, Technology};
use thiserror::Error;

/// Failures while loading or validating a scenario file.
#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("failed to read scenario file: {0}")]
    Io(#[from] std::io::Error),

    /// TOML syntax / type errors; `toml` already reports line and column.
    #[error("scenario parse error: {0}")]
    Parse(#[from] toml::de::Error),

    /// Semantic validation failure, pointing at the offending line.
    #[error("scenario invalid (line {line}): {message}")]
    Invalid { line: usize, message: String },
}

/// Failures inside the techno-economic simulator.
#[derive(Debug, Error)]
pub enum SimError {
    #[error("no demand defined for year {year}, quarter {quarter}")]
    HorizonBounds { year: i32, quarter: usize },

    #[error("levelised cost undefined for {tech}: zero annual yield per kW")]
    UndefinedLcoe { tech: Technology },

    #[error("system levelised cost undefined: nothing was generated last year")]
    ZeroGeneration,

    #[error(
        "investment {value} GW for {tech} in {region} is outside [0, {max_build}]"
    )]
    InvestmentBounds {
        region: Region,
        tech: Technology,
        value: f64,
        max_build: f64,
    },

    #[error("exogenous capacity series missing year {year} for region {region}")]
    MissingSeriesYear { region: Region, year: i32 },

    #[error("simulation already past its horizon (year {year})")]
    PastHorizon { year: i32 },
}

/// Failures at the MDP-environment layer.
#[derive(Debug, Error)]
pub enum EnvError {
    #[error("episode finished; reset the environment before stepping")]
    EpisodeDone,

    #[error("action has {got} entries, expected {expected}")]
    ActionLength { expected: usize, got: usize },

    #[error("no completed steps to summarise")]
    EmptyTrace,

    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Failures in the dense-network substrate.
#[derive(Debug, Error)]
pub enum NetError {
    #[error("input has {got} features, network expects {expected}")]
    DimMismatch { expected: usize, got: usize },

    #[error("not a network checkpoint (bad magic bytes)")]
    BadMagic,

    #[error("unsupported checkpoint version {0}")]
    BadVersion(u16),

    #[error("checkpoint data ends prematurely")]
    Truncated,

    #[error("checkpoint layer dimensions do not chain: layer {layer} takes {takes} but previous layer produces {produces}")]
    BrokenChain {
        layer: usize,
        takes: usize,
        produces: usize,
    },

    #[error("invalid activation tag {0}")]
    BadActivation(u8),

    #[error("checkpoint I/O: {0}")]
    Io(#[from] std::io::Error),
}

/// Failures at the agent layer.
#[derive(Debug, Error)]
pub enum AgentError {
    #[error("invalid agent configuration: {0}")]
    BadConfig(String),

    #[error(
        "checkpoint was produced under a different configuration \
         (stored hash {stored}, current hash {current}); refusing to resume"
    )]
    ConfigMismatch { stored: String, current: String },

    #[error("checkpoint dimensions do not match environment: {0}")]
    DimMismatch(String),

    #[error(transparent)]
    Net(#[from] NetError),

    #[error(transparent)]
    Env(#[from] EnvError),
}
