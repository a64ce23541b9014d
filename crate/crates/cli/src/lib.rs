//! Library side of the `fockwit` command line: configuration, execution and output.

pub mod config;
pub mod formula;
pub mod reproduce;
pub mod run;
pub mod table;

use config::ConfigError;

/// Exit code for a failed command: 2 for configuration errors, 3 for numerical failures.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<ConfigError>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<fockwit::Error>() {
            return if is_numerical(e) { 3 } else { 2 };
        }
    }
    1
}

fn is_numerical(e: &fockwit::Error) -> bool {
    use fockwit::Error::*;
    matches!(
        e,
        TruncationOverflow { .. } | LeakageExceeded { .. } | TraceDrift { .. } | NotNormalized(_) | InvalidDensity(_)
    )
}
