//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Membership function rejected at construction (non-monotone or non-finite abscissae).
    #[error("invalid membership shape: {0}")]
    InvalidShape(String),

    /// Linguistic variable rejected at construction (universe, labels, support, coverage).
    #[error("invalid variable `{name}`: {reason}")]
    InvalidVariable { name: String, reason: String },

    /// Rule references a term or variable slot that does not exist, or arity mismatch.
    #[error("invalid rule: {0}")]
    InvalidRule(String),

    /// Two rules share identical antecedents but name different consequents.
    #[error("conflicting rules: antecedents ({antecedents}) map to both `{first}` and `{second}`")]
    ConflictingRules {
        antecedents: String,
        first: String,
        second: String,
    },

    /// The aggregated output membership is identically zero; no crisp score exists.
    #[error("no rule fired: aggregated output is identically zero")]
    NoRuleFired,

    /// Rule-document syntax or semantic error, with the 1-based source line.
    #[error("rule document line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Scenario file violates a stated invariant or does not parse.
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    /// Trace CSV violates the format contract, with the 1-based data row.
    #[error("trace row {row}: {message}")]
    InvalidTrace { row: usize, message: String },

    /// Run-log CSV violates the format contract, with the 1-based data row.
    #[error("run log row {row}: {message}")]
    InvalidRunLog { row: usize, message: String },

    /// Total utilization is zero, so targets-per-utilization is undefined.
    #[error("AVTG undefined: total utilization is zero")]
    AvtgUndefined,

    /// The model roster size does not match the output variable's term count.
    #[error("roster size {roster} does not match output term count {terms}")]
    RosterMismatch { roster: usize, terms: usize },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
