use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("circulant embedding has a negative eigenvalue {min_eigenvalue:e} (max {max_eigenvalue:e})")]
    CirculantNotPsd {
        min_eigenvalue: f64,
        max_eigenvalue: f64,
    },

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    #[error("spectral density is singular at x = 0 (exponent {exponent})")]
    SingularAtZero { exponent: f64 },

    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e} after {intervals} intervals")]
    QuadratureNotConverged {
        estimate: f64,
        error: f64,
        intervals: usize,
    },

    #[error("path is degenerate (zero sample variance)")]
    DegeneratePath,

    #[error("coefficients do not form a filter (zeroth moment {zeroth_moment:e})")]
    NotAFilter { zeroth_moment: f64 },

    #[error("path too short: need at least {needed} points, got {got}")]
    PathTooShort { needed: usize, got: usize },

    #[error("quadratic variation is zero")]
    ZeroVariation,

    #[error("sigma radicand is not positive ({radicand:e})")]
    NonPositiveRadicand { radicand: f64 },

    #[error("plug-in base is not positive ({base:e})")]
    NonPositiveBase { base: f64 },

    #[error("frequency {frequency} exceeds the Nyquist frequency {nyquist}")]
    FrequencyAboveNyquist { frequency: f64, nyquist: f64 },

    #[error("Toeplitz system is not positive definite (innovation variance {variance:e} at order {order})")]
    NotPositiveDefinite { order: usize, variance: f64 },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("too few samples: need {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("experiment unstable: {failed} of {total} replications failed")]
    ExperimentUnstable { failed: usize, total: usize },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Innermost error, skipping stage labels.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    /// Stage label of the outermost wrapper, if any.
    pub fn stage(&self) -> Option<&'static str> {
        match self {
            Error::Stage { stage, .. } => Some(stage),
            _ => None,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg()))
    }
}
