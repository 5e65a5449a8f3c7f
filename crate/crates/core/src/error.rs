use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed input: wrong shape, non-finite values, bad permutation.
    #[error("format error: {0}")]
    Format(String),

    /// Partial sums of `g#` exceed those of `f#` at `index` (1-based).
    #[error("no transfer operator exists: partial sum {index} of g# is {lhs} > {rhs} of f#")]
    NotMajorized { index: usize, lhs: f64, rhs: f64 },

    /// The residual of a Birkhoff loop has no positive perfect matching.
    #[error("decomposition failed: {0}")]
    Decomposition(String),

    #[error("exact enumeration needs {paths} paths, above the cap of {cap}; use monte_carlo_lp")]
    EnumerationCap { paths: u128, cap: u64 },

    #[error("usage error: {0}")]
    Usage(String),

    /// Failure attributed to a single tree node.
    #[error("node \"{path}\": {source}")]
    Node {
        path: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }

    /// True for validated mathematical rejections (as opposed to bad input).
    pub fn is_rejection(&self) -> bool {
        match self {
            Error::NotMajorized { .. } => true,
            Error::Node { source, .. } => source.is_rejection(),
            _ => false,
        }
    }

    pub fn is_usage(&self) -> bool {
        matches!(self, Error::Usage(_))
    }
}
