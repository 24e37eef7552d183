use std::path::PathBuf;

use thiserror::Error;

use crate::validate::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown {kind} `{name}`")]
    UnknownRef { kind: &'static str, name: String },

    #[error("function `{function}` has no placement")]
    MissingPlacement { function: String },

    #[error("function `{function}` has no performance profile for tier `{tier}`")]
    MissingProfile { function: String, tier: String },

    #[error("function `{function}`: tier constraint `{tier}` matches no node")]
    NoNodeForTier { function: String, tier: String },

    #[error("no placement satisfies the tier constraints and end-to-end requirements")]
    NoFeasiblePlacement,

    #[error("allocation LP is infeasible for every candidate placement")]
    AllPlacementsInfeasible,

    #[error("capacity exceeded on node `{node}` for `{resource}`: {used} > {capacity}")]
    CapacityExceeded {
        node: String,
        resource: String,
        used: f64,
        capacity: f64,
    },

    #[error("degenerate fit data")]
    DegenerateFit,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("malformed linear program: {0}")]
    MalformedLp(String),

    #[error("simplex iteration limit reached")]
    IterationLimit,

    #[error("no scorable frames")]
    NoScorableFrames,

    #[error("mismatched plans: {0}")]
    Mismatch(String),

    #[error("validation failed:\n{}", format_violations(.0))]
    Validation(Vec<Violation>),

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn unknown(kind: &'static str, name: impl Into<String>) -> Self {
        Error::UnknownRef {
            kind,
            name: name.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|v| format!("  - {v}"))
        .collect::<Vec<_>>()
        .join("\n")
}
