use std::fmt;

use thiserror::Error;

/// Pipeline stage an error originated in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Factorization,
    Pattern,
    Binning,
    ReducedSolve,
    NullSpaceImposition,
    ExactSolve,
    StructureCheck,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Factorization => "factorization",
            Stage::Pattern => "pattern",
            Stage::Binning => "binning",
            Stage::ReducedSolve => "reduced solve",
            Stage::NullSpaceImposition => "null-space imposition",
            Stage::ExactSolve => "exact solve",
            Stage::StructureCheck => "structure check",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("rank inconsistency: {0}")]
    RankInconsistency(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("pattern has {nnz} entries, exact solver is limited to {limit}; use the binned two-step path")]
    TooLarge { nnz: usize, limit: usize },

    #[error("structure violation: {0}")]
    Structure(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{stage}: {source}")]
    AtStage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn at(self, stage: Stage) -> Self {
        Error::AtStage {
            stage,
            source: Box::new(self),
        }
    }

    /// Nonzero status code for the flat C-style interface. Zero means success.
    pub fn status_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) => 1,
            Error::RankInconsistency(_) => 2,
            Error::Singular(_) => 3,
            Error::TooLarge { .. } => 4,
            Error::Structure(_) => 5,
            Error::Parse { .. } => 6,
            Error::Io(_) => 7,
            Error::AtStage { source, .. } => source.status_code(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
