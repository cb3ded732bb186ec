//! Command layer for the two-lane car-following workspace: run-manifest
//! parsing, the `simulate` / `stability-map` / `soliton` / `validate`
//! commands, CSV and SVG export, and the self-validation suite.

pub mod checks;
pub mod commands;
pub mod csvio;
pub mod error;
pub mod manifest;
pub mod plot;

pub use error::CliError;
pub use manifest::{parse_config, serialize_manifest, ConfigErrors, RunManifest};
