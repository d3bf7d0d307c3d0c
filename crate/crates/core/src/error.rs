use thiserror::Error;

/// Errors shared by every module of the crate.
///
/// Mathematical verdicts (a law that fails realizability, a check that
/// reports a violated bound) are ordinary return values, not errors; the
/// variants here are either usage problems or hard numerical failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("ground spaces differ: {left} vs {right} sites")]
    SpaceMismatch { left: usize, right: usize },

    #[error("ground space has {sites} sites, more than the {limit}-site mask limit")]
    TooManySites { sites: usize, limit: usize },

    #[error("{op} needs a dense lattice table; {sites} sites exceeds the {limit}-site dense limit")]
    DenseLimit {
        op: &'static str,
        sites: usize,
        limit: usize,
    },

    #[error("unknown region `{0}`")]
    UnknownRegion(String),

    #[error("region mask selects site {site} outside the {sites}-site ground space")]
    RegionOutOfRange { site: usize, sites: usize },

    #[error("{0} is only defined on simple configurations but multiset entries are present")]
    MultisetUnsupported(&'static str),

    #[error("table length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("law is not a probability vector: {0}")]
    InvalidLaw(String),

    #[error("gram matrix has eigenvalue {eigenvalue:.6e} below the negativity threshold {threshold:.6e}")]
    GramNotPositive {
        eigenvalue: f64,
        threshold: f64,
        /// Coefficients (indicator basis) of a direction with negative energy.
        witness: Vec<f64>,
    },

    #[error("gram basis of {size} configurations exceeds the dense limit {limit}")]
    GramTooLarge { size: usize, limit: usize },

    #[error("1 + phi vanishes at site {site} inside the field support; the logarithm is singular")]
    LogSingularity { site: usize },

    #[error("separator failed to resolve the joint spectrum after {attempts} seeds")]
    SeparatorDegenerate { attempts: usize },

    #[error("{path}:{line}: {message}")]
    Format {
        path: String,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn format(path: &str, line: usize, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.to_string(),
            line,
            message: message.into(),
        }
    }
}
