//! Loading JSON configs, either bare or embedded in a run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use rbi_core::simulation::SweepTarget;
use rbi_core::AlphaOrder;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};

/// Marker value of the `manifest` key in every manifest file.
pub const MANIFEST_TAG: &str = "rbi-run-manifest/1";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Written to every output directory before any result file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest<C> {
    pub manifest: String,
    pub tool_version: String,
    pub command: String,
    pub seed: u64,
    pub config: C,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    /// Result files, relative to the output directory.
    pub outputs: Vec<String>,
}

impl<C> RunManifest<C> {
    pub fn new(command: &str, seed: u64, config: C, outputs: &[&str]) -> Self {
        Self {
            manifest: MANIFEST_TAG.to_string(),
            tool_version: format!("rbi {}", env!("CARGO_PKG_VERSION")),
            command: command.to_string(),
            seed,
            config,
            sweep: None,
            outputs: outputs.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub target: SweepTarget,
    pub alphas: Vec<AlphaOrder>,
    pub lambdas: Vec<f64>,
}

/// A config read from disk plus the sweep grid, when it came from a sweep manifest.
#[derive(Debug, Clone)]
pub struct Loaded<T> {
    pub config: T,
    pub sweep: Option<SweepSpec>,
}

fn describe(path: &Path, err: &serde_json::Error) -> CliError {
    if err.line() > 0 {
        CliError::Config(format!(
            "{}: line {} column {}: {err}",
            path.display(),
            err.line(),
            err.column()
        ))
    } else {
        CliError::Config(format!("{}: {err}", path.display()))
    }
}

/// Reads `path` as `T`. If the file is a run manifest, its embedded `config` (and sweep grid)
/// are used, so an output directory's manifest reproduces the run.
pub fn load<T: DeserializeOwned>(path: &PathBuf) -> CliResult<Loaded<T>> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| describe(path, &e))?;
    let is_manifest = value.get("manifest").and_then(Value::as_str) == Some(MANIFEST_TAG);
    if !is_manifest {
        let config = serde_json::from_str(&text).map_err(|e| describe(path, &e))?;
        return Ok(Loaded { config, sweep: None });
    }
    let manifest: RunManifest<Value> =
        serde_json::from_value(value).map_err(|e| describe(path, &e))?;
    let config = serde_json::from_value(manifest.config)
        .map_err(|e| CliError::Config(format!("{}: config: {e}", path.display())))?;
    Ok(Loaded { config, sweep: manifest.sweep })
}
