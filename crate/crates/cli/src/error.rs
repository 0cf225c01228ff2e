//! Exit-status policy and the error carrier used by every subcommand.
//!
//! Status meanings:
//!
//! * `0` — success (numerical warnings may still have been printed);
//! * `1` — numerical-domain failure: singular point, degenerate metric,
//!   overflow, divergence, or an unattainable root-finding target;
//! * `2` — usage error: bad flags, bad flag combinations, or arguments
//!   violating documented preconditions (the argument parser itself also
//!   exits with this code);
//! * `3` — input/output failure: an unreadable or malformed data file.

use tube_core::CoreError;

pub const EXIT_NUMERICAL: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_IO: u8 = 3;

/// A failure with the exit status it maps to.  The message is printed to
/// stderr as `error: {message}`.
#[derive(Debug)]
pub struct CliError {
    pub message: String,
    pub code: u8,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            message: message.into(),
            code: EXIT_USAGE,
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        CliError {
            message: message.into(),
            code: EXIT_IO,
        }
    }
}

/// Precondition violations read as misuse of the interface; malformed data
/// shapes read as file problems; everything else is a numerical failure.
/// Node-tagged errors are classified by their underlying cause.
fn classify(error: &CoreError) -> u8 {
    match error {
        CoreError::InvalidArgument(_) | CoreError::UnsupportedMode(_) => EXIT_USAGE,
        CoreError::InvalidData(_) => EXIT_IO,
        CoreError::AtNode { source, .. } => classify(source),
        _ => EXIT_NUMERICAL,
    }
}

impl From<CoreError> for CliError {
    fn from(error: CoreError) -> Self {
        CliError {
            code: classify(&error),
            message: error.to_string(),
        }
    }
}
