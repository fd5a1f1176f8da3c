//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, PdmError>;

#[derive(Debug, Error)]
pub enum PdmError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("row {row}, column {col}: invalid vote value {value:?} (expected 1, 0 or -1)")]
    BadVoteValue { row: usize, col: String, value: String },

    #[error("row {row}: duplicate legislator id {id:?}")]
    DuplicateId { row: usize, id: String },

    #[error("row {row}: expected {expected} fields, found {found}")]
    RaggedRow { row: usize, expected: usize, found: usize },

    #[error("row {row}, column {col}: {msg}")]
    BadCell { row: usize, col: String, msg: String },

    #[error("no votes: input has zero vote columns")]
    NoVotes,

    #[error("all votes filtered: no column survives the minority threshold {threshold}")]
    AllVotesFiltered { threshold: f64 },

    #[error("vote row {row}: unknown legislator id {id:?}")]
    UnknownLegislator { row: usize, id: String },

    #[error("duplicate vote record for legislator {id:?}, roll number {rollnumber}")]
    DuplicateVote { id: String, rollnumber: i64 },

    #[error("missing column {name:?} in {file}")]
    MissingColumn { name: String, file: String },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("matrix is not symmetric (max asymmetry {max_dev:.3e})")]
    NotSymmetric { max_dev: f64 },

    #[error(
        "motivation set is ill-conditioned (condition number {cond:.3e}); \
         adjust the clustering parameters"
    )]
    IllConditioned { cond: f64 },

    #[error("eigensolver failed to converge for index {index}")]
    EigenNoConvergence { index: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("{0}")]
    Other(String),
}
