use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mesh file line {line}: {msg}")]
    MeshParse { line: usize, msg: String },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(
        "degrees k={k}, l={l} violate |k - l| <= 1 required by eps(V_h) in Sigma_h and div_h Sigma_h in V_h"
    )]
    DegreeMismatch { k: usize, l: usize },

    #[error("quadrature of exactness {0} is not available")]
    QuadratureUnavailable(usize),

    #[error("singular factorization: {0}")]
    Singular(String),

    #[error("relative residual {residual:.3e} exceeds tolerance {tolerance:.1e}")]
    Residual { residual: f64, tolerance: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("level {level}: {source}")]
    AtLevel {
        level: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// The innermost error, looking through level wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtLevel { source, .. } => source.root(),
            e => e,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
