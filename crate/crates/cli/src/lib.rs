//! Library side of the `salami` command: input parsing, the batch commands
//! and the verification harness.

pub mod commands;
pub mod input;
pub mod verify;

use std::path::PathBuf;

use thiserror::Error;

/// Every reliable check passed.
pub const EXIT_OK: i32 = 0;
/// A reliable check failed or a computation did not converge.
pub const EXIT_CHECK_FAILED: i32 = 1;
/// The inputs could not be read or do not describe a valid problem.
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read `{path}`: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write `{path}`: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error("unknown check id `{0}`")]
    UnknownCheck(String),
    #[error(transparent)]
    Core(#[from] salami_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use salami_core::Error as E;
        match self {
            Self::Core(
                E::NoConvergence { .. }
                | E::NotInH0(_)
                | E::NotLipschitz(..)
                | E::CurvatureNegativeInW(..)
                | E::NonpositiveHarmonic(_)
                | E::NormalizationFailed(_)
                | E::SingularSystem,
            ) => EXIT_CHECK_FAILED,
            _ => EXIT_INPUT,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// A command's text output and the exit status it asks for.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub text: String,
    pub status: i32,
}

/// Writes `text` to `path`, or returns it for stdout when no path is given.
pub fn emit(text: String, path: Option<&std::path::Path>) -> Result<Option<String>> {
    match path {
        Some(p) => {
            std::fs::write(p, text).map_err(|source| CliError::Write {
                path: p.to_path_buf(),
                source,
            })?;
            Ok(None)
        }
        None => Ok(Some(text)),
    }
}
