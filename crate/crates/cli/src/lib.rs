//! Experiment harness behind the `cone` binary.

pub mod commands;
pub mod config;
pub mod diff;
pub mod error;
pub mod run;
pub mod tables;

pub use config::{ExperimentConfig, VerifierConfig};
pub use error::{CliError, CliResult};
pub use run::{run_experiment, RunManifest, RunOutcome};

/// Worker count: explicit flag, then `CONEWARP_THREADS`, then the rayon default.
pub fn thread_count(flag: Option<usize>) -> Option<usize> {
    flag.or_else(|| {
        std::env::var("CONEWARP_THREADS")
            .ok()
            .and_then(|v| v.trim().parse().ok())
    })
    .filter(|&n| n > 0)
}
