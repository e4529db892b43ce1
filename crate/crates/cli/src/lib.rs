//! Configuration loading and the subcommands behind the `fracmap` binary.

pub mod commands;
pub mod config;

pub use commands::NumericalFailure;
pub use config::{ConfigError, RunConfig, SweepTable};

/// Process exit code for a failed run.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ConfigError>().is_some() {
        2
    } else if err.downcast_ref::<NumericalFailure>().is_some() {
        3
    } else {
        1
    }
}
