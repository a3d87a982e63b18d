use std::fmt;
use std::process::ExitCode;

use pendctl::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    /// Exit 1: a check or synthesis did not pass.
    Verification,
    /// Exit 2: unusable inputs.
    Config,
}

#[derive(Debug)]
pub struct CliError {
    pub stage: &'static str,
    pub kind: Kind,
    pub message: String,
}

impl CliError {
    pub fn config(stage: &'static str, message: impl Into<String>) -> Self {
        Self {
            stage,
            kind: Kind::Config,
            message: message.into(),
        }
    }

    pub fn verification(stage: &'static str, message: impl Into<String>) -> Self {
        Self {
            stage,
            kind: Kind::Verification,
            message: message.into(),
        }
    }

    /// Library errors split by whether the inputs or the math failed.
    pub fn from_core(stage: &'static str, e: Error) -> Self {
        let kind = match e {
            Error::Uncontrollable { .. }
            | Error::SynthesisFailed { .. }
            | Error::ClosedLoopIntegrator
            | Error::Singular { .. }
            | Error::EmptyTrajectory => Kind::Verification,
            _ => Kind::Config,
        };
        Self {
            stage,
            kind,
            message: e.to_string(),
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        match self.kind {
            Kind::Verification => ExitCode::from(1),
            Kind::Config => ExitCode::from(2),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} failed: {}", self.stage, self.message)
    }
}

impl std::error::Error for CliError {}

/// Tags a library result with the stage it ran in.
pub trait Stage<T> {
    fn stage(self, stage: &'static str) -> Result<T, CliError>;
}

impl<T> Stage<T> for pendctl::Result<T> {
    fn stage(self, stage: &'static str) -> Result<T, CliError> {
        self.map_err(|e| CliError::from_core(stage, e))
    }
}
