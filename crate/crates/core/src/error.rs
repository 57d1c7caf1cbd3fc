use thiserror::Error;

/// Errors raised while building meshes, operators or solving the discrete problem.
#[derive(Debug, Error)]
pub enum Error {
    #[error("mesh file parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid mesh: cell {cell}: {reason}")]
    InvalidCell { cell: usize, reason: String },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("cell {cell} is not star-shaped with respect to its centroid")]
    NotStarShaped { cell: usize },

    #[error("singular {what} matrix")]
    Singular { what: String },

    #[error("empty mesh")]
    EmptyMesh,

    #[error("inconsistent options: {0}")]
    InconsistentOptions(String),

    #[error("sparse factorization failed: {0}")]
    Factorization(String),

    #[error(
        "problem too large for the dense path ({size} unknowns, limit {limit}); use a coarser mesh"
    )]
    TooLarge { size: usize, limit: usize },

    #[error("solve failed for k = {degree}, level {level}: {source}")]
    Study {
        degree: usize,
        level: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
