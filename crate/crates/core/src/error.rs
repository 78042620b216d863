use std::path::PathBuf;
use std::time::Duration;

use crate::model::Violation;
use crate::preorder::PreorderTrace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid reading sequence: {0}")]
    InvalidSequence(String),

    #[error("box `{0}` does not exist in the document")]
    UnknownBox(String),

    #[error("gaze timestamps decrease at point {index} ({previous} -> {current})")]
    DecreasingTimestamp {
        index: usize,
        previous: f64,
        current: f64,
    },

    #[error("{0} must not be empty")]
    EmptyInput(&'static str),

    #[error("scanpath statistics need at least 2 gaze points, got {0}")]
    TooFewPoints(usize),

    #[error("need at least 2 ordered boxes to build training pairs")]
    InsufficientPairs,

    #[error("feature dimensionality mismatch: model has {expected} weights, regime produces {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("document `{doc_id}` failed validation: {}", join(violations))]
    InvalidDocument {
        doc_id: String,
        violations: Vec<Violation>,
    },

    #[error("unknown strategy `{0}` (expected default-ocr, z-order, xy-order, model or external-model)")]
    UnknownStrategy(String),

    #[error("strategy `{0}` needs a comparator model or external command")]
    MissingModel(&'static str),

    #[error("failed to spawn external comparator `{command}`: {source}")]
    Spawn {
        command: String,
        #[source]
        source: std::io::Error,
    },

    #[error("external comparator protocol violation: {0}")]
    Protocol(String),

    #[error("external comparator did not reply within {0:?}")]
    Timeout(Duration),

    #[error("preordering aborted after {} comparator calls: {source}", trace.comparator_calls)]
    Preorder {
        trace: PreorderTrace,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {message}")]
    Schema { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn join(violations: &[Violation]) -> String {
    violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}
