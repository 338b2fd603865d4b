//! Config-driven experiment runner behind the `mann-rates` binary.
//!
//! `run` validates the space and operator, iterates, certifies the requested
//! rates and writes three files: the trajectory CSV (`n,residual,fix_distance`,
//! `n_max + 1` rows), the certificates JSON and a JSON report of the checks
//! performed along the way. `moduli` writes the sampled geometry report of
//! the configured space. Outputs depend only on the config and the seed.
//!
//! Exit codes: 0 everything passed, 1 a certificate or validation failed,
//! 2 the config was rejected, 3 an I/O or resource error.

pub mod config;
mod report;

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::Error;

pub use config::{BatchConfig, ExperimentConfig};
pub use report::{run_one_experiment, run_one_moduli, ModuliConfig};

/// Command-line overrides applied on top of every config.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    /// Replaces the 1e−9 tolerance used by validations and certificates.
    pub strict_tolerance: Option<f64>,
}

/// Files written by one experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct RunArtifacts {
    pub name: String,
    pub trajectory_csv: Option<PathBuf>,
    pub certificates_json: Option<PathBuf>,
    pub moduli_json: PathBuf,
    pub summary: String,
    pub all_pass: bool,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Resource(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) | CliError::Resource(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Resource(m) => write!(f, "error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

/// Library errors that reach the runner. Validation failures are not
/// errors here: they are reported and turn the exit code to 1.
impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::SeriesNotDivergent { .. } | Error::IndexOverflow { .. } | Error::NonFinite { .. } => {
                CliError::Resource(e.to_string())
            }
            _ => CliError::Config(e.to_string()),
        }
    }
}

/// Outcome of one experiment inside a run: either artifacts or an error
/// specific to that experiment.
pub type Outcome = Result<RunArtifacts, CliError>;

#[derive(Deserialize)]
struct Batch<T> {
    experiments: Vec<T>,
}

/// Parses a config file holding one object or `{"experiments": [...]}`.
/// Returns the configs and whether the file was a batch.
pub fn load_configs<T: DeserializeOwned>(path: &Path) -> Result<(Vec<T>, bool), CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let is_batch = value.get("experiments").is_some();
    let parsed = if is_batch {
        serde_json::from_str::<Batch<T>>(&text).map(|b| b.experiments)
    } else {
        serde_json::from_str::<T>(&text).map(|c| vec![c])
    };
    parsed
        .map(|c| (c, is_batch))
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn run_all<T, F>(path: &Path, overrides: &Overrides, one: F) -> Result<Vec<Outcome>, CliError>
where
    T: DeserializeOwned + Send + Sync + report::Named,
    F: Fn(&T, &Path, &Overrides) -> Outcome + Sync,
{
    let (configs, is_batch) = load_configs::<T>(path)?;
    if is_batch {
        let mut names: Vec<&str> = configs.iter().map(|c| c.name()).collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(CliError::Config(format!("duplicate experiment name `{}`", w[0])));
        }
    }
    Ok(configs
        .par_iter()
        .map(|cfg| {
            let base = overrides
                .out_dir
                .clone()
                .unwrap_or_else(|| cfg.output_dir().to_path_buf());
            let dir = if is_batch { base.join(cfg.name()) } else { base };
            one(cfg, &dir, overrides)
        })
        .collect())
}

/// `run <config.json>`.
pub fn run_experiment(path: &Path, overrides: &Overrides) -> Result<Vec<Outcome>, CliError> {
    run_all::<ExperimentConfig, _>(path, overrides, run_one_experiment)
}

/// `moduli <config.json>`.
pub fn run_moduli_report(path: &Path, overrides: &Overrides) -> Result<Vec<Outcome>, CliError> {
    run_all::<ModuliConfig, _>(path, overrides, run_one_moduli)
}

/// Process exit status for a finished run.
pub fn exit_code(result: &Result<Vec<Outcome>, CliError>) -> i32 {
    match result {
        Err(e) => e.exit_code(),
        Ok(outcomes) => outcomes
            .iter()
            .map(|o| match o {
                Ok(a) if a.all_pass => 0,
                Ok(_) => 1,
                Err(e) => e.exit_code(),
            })
            .max()
            .unwrap_or(0),
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}
