use thiserror::Error;

/// Failures of the scenario layer. `Parse` and `Semantic` are configuration
/// errors; `Core` wraps numerical failures.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("parse error: {0}")]
    Parse(String),

    /// A value violates an invariant; the message names it.
    #[error("{0}")]
    Semantic(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error(transparent)]
    Core(hartree_core::Error),
}

impl From<hartree_core::Error> for LabError {
    fn from(e: hartree_core::Error) -> Self {
        use hartree_core::Error as E;
        match e {
            E::OutOfModel(m) | E::InvalidArgument(m) | E::Constraint(m) => LabError::Semantic(m),
            other => LabError::Core(other),
        }
    }
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}
