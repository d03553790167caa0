use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use bipartite_control::bipartite::{BipartiteState, CouplingHamiltonian};
use bipartite_control::io::{self, HamiltonianJson, OutputHeader, StateJson};
use bipartite_control::Error;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::args::Input;

/// Exit code for unsupported cases and invalid input.
pub const EXIT_UNSUPPORTED: i32 = 2;
/// Exit code for failures during computation.
pub const EXIT_FAILURE: i32 = 1;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_UNSUPPORTED,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Unsupported(_)
            | Error::Invalid(_)
            | Error::Domain(_)
            | Error::DimensionMismatch(_)
            | Error::NotHermitian { .. }
            | Error::NotUnitary { .. }
            | Error::NotNormalized { .. }
            | Error::NotSymmetric { .. }
            | Error::Json(_)
            | Error::Io(_) => EXIT_UNSUPPORTED,
            _ => EXIT_FAILURE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::usage(format!("invalid JSON: {e}"))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Reads the `--config` file as a JSON object.
pub fn read_config(path: &Path) -> CliResult<Map<String, Value>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    match serde_json::from_str(&text)? {
        Value::Object(m) => Ok(m),
        _ => Err(CliError::usage(format!("{}: config must be a JSON object", path.display()))),
    }
}

/// Overlays the flags given on the command line onto the config file values.
pub fn merge<T: Serialize + DeserializeOwned>(cli: &T, config: Option<&Map<String, Value>>) -> CliResult<T> {
    let mut base = config.cloned().unwrap_or_default();
    if let Value::Object(flags) = serde_json::to_value(cli)? {
        for (k, v) in flags {
            if !(v.is_null() || v == Value::Bool(false)) {
                base.insert(k, v);
            }
        }
    }
    serde_json::from_value(Value::Object(base)).map_err(|e| CliError::usage(format!("invalid configuration: {e}")))
}

pub fn require<T>(value: Option<T>, flag: &str) -> CliResult<T> {
    value.ok_or_else(|| CliError::usage(format!("missing required option --{flag}")))
}

pub fn check_finite(value: f64, flag: &str) -> CliResult<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(CliError::usage(format!("--{flag} must be finite, got {value}")))
    }
}

pub fn check_positive(value: f64, flag: &str) -> CliResult<f64> {
    if check_finite(value, flag)? > 0.0 {
        Ok(value)
    } else {
        Err(CliError::usage(format!("--{flag} must be positive, got {value}")))
    }
}

/// Rejects output paths whose directory does not exist.
pub fn check_output(path: Option<&PathBuf>) -> CliResult<()> {
    if let Some(p) = path {
        let dir = p.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
        if !dir.is_dir() {
            return Err(CliError::usage(format!("output directory {} does not exist", dir.display())));
        }
        if p.is_dir() {
            return Err(CliError::usage(format!("output path {} is a directory", p.display())));
        }
    }
    Ok(())
}

/// Bytes identifying an input for the config hash.
fn fingerprint<T: Serialize>(input: &Input<T>) -> CliResult<Vec<u8>> {
    match input {
        Input::Path(p) => fs::read(p).map_err(|e| CliError::usage(format!("{}: {e}", p.display()))),
        Input::Inline(v) => Ok(serde_json::to_vec(v)?),
    }
}

fn load<T: DeserializeOwned + Clone>(input: &Input<T>) -> CliResult<T> {
    match input {
        Input::Path(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::usage(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", p.display())))
        }
        Input::Inline(v) => Ok(v.clone()),
    }
}

pub fn load_hamiltonian(input: &Input<HamiltonianJson>) -> CliResult<CouplingHamiltonian> {
    Ok(load(input)?.to_coupling()?)
}

pub fn load_state(input: &Input<StateJson>) -> CliResult<BipartiteState> {
    Ok(load(input)?.to_state()?)
}

/// Options naming output files, which do not affect the results.
const OUTPUT_FIELDS: &[&str] = &["out", "trajectory"];

/// Header with the SHA-256 of the command, its resolved options (minus output
/// paths) and the contents of its input files.
pub struct HeaderBuilder {
    hasher: Sha256,
    seed: u64,
}

impl HeaderBuilder {
    pub fn new<T: Serialize>(command: &str, args: &T, seed: u64) -> CliResult<Self> {
        let mut hasher = Sha256::new();
        hasher.update(command.as_bytes());
        hasher.update(b"\n");
        let mut resolved = serde_json::to_value(args)?;
        if let Value::Object(m) = &mut resolved {
            for key in OUTPUT_FIELDS {
                m.remove(*key);
            }
        }
        hasher.update(serde_json::to_vec(&resolved)?);
        Ok(Self { hasher, seed })
    }

    pub fn input<T: Serialize>(mut self, input: Option<&Input<T>>) -> CliResult<Self> {
        if let Some(i) = input {
            self.hasher.update(b"\n");
            self.hasher.update(fingerprint(i)?);
        }
        Ok(self)
    }

    pub fn finish(self) -> OutputHeader {
        let digest = self.hasher.finalize();
        OutputHeader {
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: self.seed,
            config_sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
        }
    }
}

/// Rounds every float in a JSON tree to 12 significant digits.
pub fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = io::round12(n.as_f64().expect("f64 number"));
            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_json).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

/// `{"header": ..., <report fields>}` as pretty JSON with a trailing newline.
pub fn json_report<T: Serialize>(header: &OutputHeader, report: &T) -> CliResult<String> {
    let mut obj = Map::new();
    obj.insert("header".into(), serde_json::to_value(header)?);
    match serde_json::to_value(report)? {
        Value::Object(m) => obj.extend(m),
        other => {
            obj.insert("result".into(), other);
        }
    }
    let mut text = serde_json::to_string_pretty(&round_json(Value::Object(obj)))?;
    text.push('\n');
    Ok(text)
}

/// Writes to `path` atomically, or to stdout without a path.
pub fn emit(path: Option<&PathBuf>, contents: &str) -> CliResult<()> {
    match path {
        Some(p) => Ok(io::write_atomic(p, contents)?),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}
