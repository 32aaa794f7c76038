use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Caller supplied an argument outside the operation's domain.
    #[error("{0}")]
    InvalidInput(String),

    #[error("symmetric eigensolver did not converge for eigenvalue {index} after {iterations} iterations")]
    EigenNoConvergence { index: usize, iterations: usize },

    #[error("covariance spectrum leaves [-1, 1]: eigenvalue {0}")]
    SpectrumOutOfRange(f64),

    #[error("quadrature not converged: next grid {grid} exceeds ceiling {ceiling} (last delta {delta:e})")]
    QuadratureNotConverged {
        grid: usize,
        ceiling: usize,
        delta: f64,
    },

    #[error("discrete Fourier transform left an imaginary part of {0:e}")]
    ImaginaryResidue(f64),

    #[error("transverse mode {index:?} failed: {source}")]
    TorusMode {
        index: Vec<usize>,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for errors caused by bad arguments rather than numerical failure.
    pub fn is_usage(&self) -> bool {
        match self {
            Error::InvalidInput(_) => true,
            Error::TorusMode { source, .. } => source.is_usage(),
            _ => false,
        }
    }
}
