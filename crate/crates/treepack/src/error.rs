use std::fmt;

use thiserror::Error;

/// Measured quantities behind a failed Case L/S/P classification.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseMeasure {
    pub outside_large_stars: usize,
    pub in_small_stars: usize,
    pub bare_paths: usize,
    pub n: usize,
}

impl fmt::Display for CaseMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "outside large stars = {}, in small stars = {}, bare paths = {}, n = {}",
            self.outside_large_stars, self.in_small_stars, self.bare_paths, self.n
        )
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("classification failed: {0}")]
    Classification(CaseMeasure),
    #[error("tree partition failed: {0}")]
    Partition(String),
    #[error("no perfect matching; Hall violator of size {} with {} neighbours", .violator.len(), .neighbours)]
    Infeasible {
        violator: Vec<usize>,
        neighbours: usize,
    },
    #[error("stuck after {moves} moves: {what}")]
    Stuck { what: String, moves: usize },
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("aborted at {stage}: {reason}")]
    Abort { stage: String, reason: String },
    #[error("pipeline order: {0}")]
    Order(String),
    #[error("internal inconsistency: {0}")]
    Internal(String),
}

impl Error {
    pub fn abort(stage: &str, reason: impl Into<String>) -> Self {
        Error::Abort {
            stage: stage.to_string(),
            reason: reason.into(),
        }
    }

    /// Coarse class used for exit codes and run summaries.
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Input(_) | Error::Io(_) | Error::Json(_) => ErrorClass::Input,
            Error::Config(_) => ErrorClass::Config,
            Error::Classification(_) => ErrorClass::Classification,
            Error::Partition(_) | Error::Abort { .. } | Error::Stuck { .. } | Error::Order(_) => {
                ErrorClass::Abort
            }
            Error::Infeasible { .. } => ErrorClass::Infeasible,
            Error::Budget(_) => ErrorClass::Budget,
            Error::Internal(_) => ErrorClass::Internal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ErrorClass {
    Input,
    Config,
    Classification,
    Abort,
    Infeasible,
    Budget,
    Internal,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Input => 2,
            ErrorClass::Config => 3,
            ErrorClass::Classification => 4,
            ErrorClass::Abort => 5,
            ErrorClass::Infeasible => 6,
            ErrorClass::Budget => 7,
            ErrorClass::Internal => 70,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ErrorClass::Input => "input",
            ErrorClass::Config => "config",
            ErrorClass::Classification => "classification",
            ErrorClass::Abort => "abort",
            ErrorClass::Infeasible => "infeasible",
            ErrorClass::Budget => "budget",
            ErrorClass::Internal => "internal",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
