//! Scenario configs, presets, sweep orchestration and CSV/JSON output for
//! the `dqrm` command-line tool.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod output;
pub mod presets;
pub mod runner;
pub mod tomo;

use std::path::Path;

pub use config::{parse_config, KappaConvention, ScenarioConfig};
pub use error::{CliError, Result};

/// Reads a config file or a named preset.
pub fn load_config(path: Option<&Path>, preset: Option<&str>, conv: KappaConvention) -> Result<ScenarioConfig> {
    let text = match (path, preset) {
        (Some(p), None) => {
            std::fs::read_to_string(p).map_err(|source| CliError::Io { path: p.to_path_buf(), source })?
        }
        (None, Some(name)) => presets::preset(name).ok_or_else(|| {
            CliError::config("preset", format!("unknown preset `{name}`; known: {}", presets::NAMES.join(", ")))
        })?,
        _ => return Err(CliError::config("config", "give exactly one of --config and --preset")),
    };
    parse_config(&text, conv)
}
