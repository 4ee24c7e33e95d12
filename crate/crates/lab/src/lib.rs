//! Experiment runner for `varmult-core`: flat-file configs, a registry of
//! named experiments, CSV and summary output, reference oracles and the
//! acceptance criteria behind `varmult-lab selftest`.

pub mod config;
pub mod criteria;
pub mod experiments;
pub mod oracles;
pub mod output;

use std::path::Path;

pub use config::{ConfigError, ExperimentConfig};
pub use output::{Artifacts, Outcome};

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("computation failed: {0}")]
    Core(#[from] varmult_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl LabError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) => 1,
            LabError::Core(_) | LabError::Io(_) => 3,
        }
    }
}

/// Exit status when every step ran but a built-in check failed.
pub const CHECKS_FAILED_EXIT: i32 = 2;

/// Validates, runs and writes one experiment.
pub fn run_config(config: &ExperimentConfig) -> Result<(Outcome, Artifacts), LabError> {
    let job = experiments::prepare(config)?;
    let outcome = job()?;
    let artifacts = output::write_artifacts(config, &outcome)?;
    Ok((outcome, artifacts))
}

/// [`run_config`] on a config file, with the `VARMULT_SEED` override.
pub fn run_path(path: &Path) -> Result<(Outcome, Artifacts), LabError> {
    let seed = config::seed_from_env()?;
    let config = ExperimentConfig::load(path, seed)?;
    run_config(&config)
}

/// Sizes the global thread pool from `VARMULT_THREADS`, if set.
pub fn init_threads() -> Result<(), ConfigError> {
    let Ok(raw) = std::env::var("VARMULT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        ConfigError::new(
            "VARMULT_THREADS",
            format!("expected a positive integer, got `{raw}`"),
        )
    })?;
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}
