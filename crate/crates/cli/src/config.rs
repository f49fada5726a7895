use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde_json::{Map, Value};

use weaksel::landscape::{sample_differential_rect, to_differential, DifferentialFitness, FitnessMatrix, RandomSpec};
use weaksel::matrix::Matrix;

#[derive(Debug)]
pub enum CliError {
    /// Bad or inconsistent input; exit code 2.
    Config(String),
    /// Failure while running, including failed checks; exit code 1.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }

    pub fn field(name: &str, err: impl fmt::Display) -> Self {
        CliError::Config(format!("{name}: {err}"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config: {m}"),
            CliError::Runtime(m) => write!(f, "{m}"),
        }
    }
}

impl From<weaksel::Error> for CliError {
    fn from(e: weaksel::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

/// Reads the JSON config at `path` (an empty object when absent), applies the
/// `--seed` override and deserializes it. Errors carry the offending field path.
pub fn load<T: DeserializeOwned>(path: Option<&Path>, seed: Option<u64>) -> Result<T, CliError> {
    let mut value = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            serde_json::from_str::<Value>(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
        }
        None => Value::Object(Map::new()),
    };
    let Value::Object(map) = &mut value else {
        return Err(CliError::Config("top level must be a JSON object".into()));
    };
    if let Some(seed) = seed {
        map.insert("seed".into(), seed.into());
    }
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            CliError::Config(e.inner().to_string())
        } else {
            CliError::field(&path, e.inner())
        }
    })
}

/// Reads a landscape file: differential or fitness matrix, JSON or CSV.
/// Fitness matrices are converted with the strength stored in the file.
pub fn read_landscape(path: &Path) -> Result<DifferentialFitness, CliError> {
    let err = |e: &dyn fmt::Display| CliError::field("landscape_file", format!("{}: {e}", path.display()));
    let text = std::fs::read_to_string(path).map_err(|e| err(&e))?;
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        let probe: Value = serde_json::from_str(trimmed).map_err(|e| err(&e))?;
        if probe.get("s").is_some() {
            let w = FitnessMatrix::from_json(&text).map_err(|e| err(&e))?;
            return to_differential(&w, w.s()).map_err(|e| err(&e));
        }
        return DifferentialFitness::from_json(&text).map_err(|e| err(&e));
    }
    if trimmed.starts_with("# fitness") {
        let w = FitnessMatrix::from_csv(&text).map_err(|e| err(&e))?;
        return to_differential(&w, w.s()).map_err(|e| err(&e));
    }
    DifferentialFitness::from_csv(&text).map_err(|e| err(&e))
}

/// Picks the landscape from exactly one of an inline matrix, a file, or random
/// dimensions drawn with `seed`.
pub fn resolve_landscape(
    delta: &Option<Matrix>,
    file: &Option<PathBuf>,
    dims: Option<[usize; 2]>,
    seed: u64,
) -> Result<DifferentialFitness, CliError> {
    match (delta, file, dims) {
        (Some(d), None, None) => DifferentialFitness::new(d.clone()).map_err(|e| CliError::field("delta", e)),
        (None, Some(p), None) => read_landscape(p),
        (None, None, Some([m, n])) => {
            sample_differential_rect(m, n, &RandomSpec::uniform(seed)).map_err(|e| CliError::field("dims", e))
        }
        (None, None, None) => Err(CliError::Config("one of `delta`, `landscape_file` or `dims` is required".into())),
        _ => Err(CliError::Config("give only one of `delta`, `landscape_file` and `dims`".into())),
    }
}

pub fn check_positive(name: &str, value: u64) -> Result<(), CliError> {
    if value == 0 {
        Err(CliError::field(name, "must be at least 1"))
    } else {
        Ok(())
    }
}
