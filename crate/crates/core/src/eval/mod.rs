//! Exact-match scoring of prediction files and curve assembly.

mod curve;
mod score;

use std::io;

use thiserror::Error;

pub use curve::{curve, curve_by, occurrence_table, CurveKey, OccurrenceCell};
pub use score::{
    baseline_predictions, load_predictions, load_reference, score, score_files, Baseline,
    EvalReport, PredictionRecord, ReferenceItem, SplitScore,
};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("example_id {0} appears more than once in the predictions")]
    DuplicateId(usize),
    #[error("example_id {id} is out of range for a reference of {len} examples")]
    UnknownId { id: usize, len: usize },
    #[error("reference has {reference} examples but predictions have {predictions}")]
    LengthMismatch { reference: usize, predictions: usize },
    #[error("{path}:{line}: {message}")]
    Record {
        path: String,
        line: usize,
        message: String,
    },
    #[error("a curve needs at least two points")]
    TooFewPoints,
    #[error("duplicate curve key {0}")]
    DuplicateKey(String),
    #[error("report has no `{0}` value")]
    MissingKey(&'static str),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
