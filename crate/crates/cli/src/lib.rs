//! Command implementations behind the `coadapt` binary.

pub mod commands;
pub mod server;

use std::fmt;

/// A problem with user input that is not a core configuration error, such
/// as an unreadable file.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BELIEF_EXPLOSION: i32 = 3;

/// Process exit code for a failed command.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<UsageError>().is_some() {
        return EXIT_CONFIG;
    }
    match err.downcast_ref::<coadapt_core::Error>() {
        Some(coadapt_core::Error::BeliefExplosion { .. }) => EXIT_BELIEF_EXPLOSION,
        Some(e) if e.is_config_error() => EXIT_CONFIG,
        _ => EXIT_FAILURE,
    }
}
