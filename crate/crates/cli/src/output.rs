//! Error-to-exit-code mapping and output sinks.

use std::fmt;
use std::fs;
use std::io;
use std::path::PathBuf;

use qsp::analysis::AnalysisError;
use qsp::curve::{CurveCsvError, CurveError};
use qsp::lattice::LatticeError;
use qsp::pricing::{PricingError, ScheduleFileError};
use qsp::referendum::ReferendumError;

/// Usage/validation problems exit 2, runtime failures exit 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Runtime(msg) => f.write_str(msg),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(err: io::Error) -> Self {
        CliError::Runtime(err.to_string())
    }
}

impl From<ReferendumError> for CliError {
    fn from(err: ReferendumError) -> Self {
        CliError::Usage(err.to_string())
    }
}

impl From<CurveError> for CliError {
    fn from(err: CurveError) -> Self {
        CliError::Usage(err.to_string())
    }
}

impl From<PricingError> for CliError {
    fn from(err: PricingError) -> Self {
        CliError::Usage(err.to_string())
    }
}

impl From<AnalysisError> for CliError {
    fn from(err: AnalysisError) -> Self {
        CliError::Usage(err.to_string())
    }
}

impl From<CurveCsvError> for CliError {
    fn from(err: CurveCsvError) -> Self {
        match err {
            CurveCsvError::Io(e) => e.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<ScheduleFileError> for CliError {
    fn from(err: ScheduleFileError) -> Self {
        match err {
            ScheduleFileError::Io(e) => e.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<LatticeError> for CliError {
    fn from(err: LatticeError) -> Self {
        match err {
            LatticeError::Io(e) => e.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}

/// Write to `--out` when given, standard output otherwise.
pub fn emit(out: Option<&PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

/// Pretty-printed JSON document with a trailing newline.
pub fn json_document(value: &serde_json::Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("JSON serializes");
    text.push('\n');
    text
}
