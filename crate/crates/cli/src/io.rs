use std::fmt;
use std::path::Path;
use std::time::Duration;

use qcorr::state::StateFile;
use qcorr::{DensityMatrix, PureState};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

#[derive(Debug)]
pub enum CliError {
    Domain(qcorr::Error),
    Io { path: String, source: std::io::Error },
    Json { what: String, source: serde_json::Error },
    Input(String),
}

impl CliError {
    pub fn to_json(&self) -> Value {
        let (kind, message) = match self {
            CliError::Domain(e) => (e.kind().to_string(), e.to_string()),
            CliError::Io { path, source } => ("io".into(), format!("{path}: {source}")),
            CliError::Json { what, source } => ("json".into(), format!("{what}: {source}")),
            CliError::Input(m) => ("invalid_input".into(), m.clone()),
        };
        json!({ "error": { "kind": kind, "message": message } })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_json())
    }
}

impl From<qcorr::Error> for CliError {
    fn from(e: qcorr::Error) -> Self {
        CliError::Domain(e)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

pub fn parse_json<T: serde::de::DeserializeOwned>(what: &str, text: &str) -> CliResult<T> {
    serde_json::from_str(text).map_err(|source| CliError::Json { what: what.into(), source })
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    parse_json(&path.display().to_string(), &read_text(path)?)
}

pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("toolkit types serialize to JSON")
}

#[derive(Debug, Clone)]
pub enum LoadedState {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl LoadedState {
    pub fn n_qubits(&self) -> usize {
        match self {
            LoadedState::Pure(p) => p.n_qubits(),
            LoadedState::Mixed(r) => r.n_qubits(),
        }
    }

    pub fn to_density(&self) -> DensityMatrix {
        match self {
            LoadedState::Pure(p) => p.to_density(),
            LoadedState::Mixed(r) => r.clone(),
        }
    }
}

/// Reads either state layout; unknown keys such as `manifest` are ignored.
pub fn load_state(path: &Path, cap: usize) -> CliResult<LoadedState> {
    Ok(match read_json::<StateFile>(path)? {
        StateFile::Pure(f) => LoadedState::Pure(f.into_state(cap)?),
        StateFile::Mixed(f) => LoadedState::Mixed(f.into_state(cap)?),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    /// SHA-256 of the canonical JSON of the effective configuration.
    pub config_digest: String,
    pub seed: u64,
    pub threads: usize,
    pub version: &'static str,
    pub wall_time_seconds: f64,
}

impl RunManifest {
    pub fn new(command_line: Vec<String>, config: &Value, seed: u64, threads: usize, wall: Duration) -> Self {
        let digest = Sha256::digest(config.to_string().as_bytes());
        RunManifest {
            command_line,
            config_digest: digest.iter().map(|b| format!("{b:02x}")).collect(),
            seed,
            threads,
            version: env!("CARGO_PKG_VERSION"),
            wall_time_seconds: wall.as_secs_f64(),
        }
    }
}

/// Output of one command: the result object and the configuration that
/// produced it.
pub struct Outcome {
    pub result: Value,
    pub config: Value,
    pub seed: u64,
}

/// Attaches the manifest to the result. Objects get a `manifest` key;
/// anything else is wrapped as `{"result": ..., "manifest": ...}`.
pub fn with_manifest(result: Value, manifest: &RunManifest) -> Value {
    match result {
        Value::Object(mut map) => {
            map.insert("manifest".into(), to_value(manifest));
            Value::Object(map)
        }
        other => json!({ "result": other, "manifest": manifest }),
    }
}
