use thiserror::Error;

use crate::automaton::ValidationReport;
use crate::composition::CompatibilityReport;

/// Errors shared by all library operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown state `{0}`")]
    UnknownState(String),

    #[error("unknown action `{0}`")]
    UnknownAction(String),

    #[error("unknown terminal `{0}`")]
    UnknownTerminal(String),

    #[error("constraint `{constraint}` is declared over `{expected}`, got automaton `{actual}`")]
    SubjectMismatch {
        constraint: String,
        expected: String,
        actual: String,
    },

    #[error("components are not strongly compatible:\n{0}")]
    Incompatible(CompatibilityReport),

    #[error("validation failed for `{id}`:\n{report}")]
    ValidationFailed {
        id: String,
        report: ValidationReport,
    },

    #[error("projection index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("bound {bound} exceeds the safety cap {cap}")]
    BoundTooLarge { bound: usize, cap: usize },

    #[error("atomic transition label `{0}` is used by more than one component")]
    SharedTransitionLabel(String),

    #[error("invalid component collection: {0}")]
    InvalidCollection(String),
}

pub type Result<T> = std::result::Result<T, Error>;
