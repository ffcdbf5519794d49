//! Declarative workcell scenarios.
//!
//! Scenarios are TOML documents (format version 1). Field names carry their
//! units (`_m`, `_kg`, `_s`, `_deg`). See `docs/scenario-format.md` and the
//! annotated builtin files under `scenarios/`.

mod builtin;
mod format;

pub use builtin::{builtin, Builtin};
pub use format::*;

use crate::safety::BodyRegionTable;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScenarioError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation failed:\n  - {}", .0.join("\n  - "))]
    Validation(Vec<String>),
    #[error("cannot read `{path}`: {message}")]
    Io { path: String, message: String },
}

/// Parses and validates scenario text. Relative table paths resolve against
/// `base_dir` when given.
pub fn parse_scenario_str(text: &str, base_dir: Option<&Path>) -> Result<Scenario, ScenarioError> {
    let mut scenario: Scenario = toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
    if let Some(rel) = &scenario.body_region_table {
        let path = match base_dir {
            Some(dir) => dir.join(rel),
            None => rel.into(),
        };
        let text = std::fs::read_to_string(&path).map_err(|e| ScenarioError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let table = BodyRegionTable::parse(&text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        scenario.region_table = Some(table);
    }
    scenario.validate()?;
    Ok(scenario)
}

pub fn parse_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_scenario_str(&text, path.parent())
}

/// Resolves a builtin name (`s1`..`s6`) or a file path. Relative paths that
/// do not exist are also tried under `$HAZARDSIM_CONFIG_DIR`.
pub fn load(spec: &str) -> Result<Scenario, ScenarioError> {
    if let Ok(b) = spec.parse::<Builtin>() {
        return Ok(builtin(b));
    }
    let path = Path::new(spec);
    if !path.exists() && path.is_relative() {
        if let Ok(dir) = std::env::var(CONFIG_DIR_ENV) {
            let alt = Path::new(&dir).join(path);
            if alt.exists() {
                return parse_scenario(&alt);
            }
        }
    }
    parse_scenario(path)
}

/// Environment variable naming the default configuration directory.
pub const CONFIG_DIR_ENV: &str = "HAZARDSIM_CONFIG_DIR";
