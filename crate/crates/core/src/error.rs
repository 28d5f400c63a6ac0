use thiserror::Error;

use crate::data::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid questionnaire matrix: {}", format_violations(.0))]
    Invalid(Vec<Violation>),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("row {row} has no observed items")]
    EmptyRow { row: usize },

    #[error("no imputation candidates for row {row}, item {item}")]
    NoCandidates { row: usize, item: usize },

    #[error("group `{0}` has no rows")]
    EmptyGroup(String),

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("singular correlation matrix (condition number {condition:.3e})")]
    SingularCorrelation { condition: f64 },

    #[error("eigendecomposition did not converge")]
    NoConvergence,

    #[error("undefined statistic: {0}")]
    Undefined(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures caused by the data itself rather than by malformed
    /// input or arguments.
    pub fn is_computational(&self) -> bool {
        matches!(
            self,
            Error::Degenerate(_)
                | Error::SingularCorrelation { .. }
                | Error::NoConvergence
                | Error::Undefined(_)
                | Error::NoCandidates { .. }
        )
    }
}

fn format_violations(v: &[Violation]) -> String {
    let shown: Vec<String> = v.iter().take(5).map(|x| x.to_string()).collect();
    let mut s = shown.join("; ");
    if v.len() > 5 {
        s.push_str(&format!("; and {} more", v.len() - 5));
    }
    s
}
