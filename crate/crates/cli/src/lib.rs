//! Library surface behind the `gridrl` binary.
//!
//! The subcommand implementations live here so integration tests can drive
//! them (and parse their artifacts) in-process; `main.rs` is only argument
//! dispatch and exit-code mapping.

pub mod baseline;
pub mod error;
pub mod evaluate;
pub mod figures;
pub mod manifest;
pub mod metrics;
pub mod presets;
pub mod svg;
pub mod sweep;
pub mod train;
