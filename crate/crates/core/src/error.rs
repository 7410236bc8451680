use thiserror::Error;

/// Errors produced by the library.
///
/// The CLI maps [`Error::is_parse`] to exit code 3 and everything else to 2.
#[derive(Debug, Error)]
pub enum Error {
    /// Caller supplied inconsistent or out-of-range input.
    #[error("input error: {0}")]
    Input(String),

    /// A file or document did not conform to its schema.
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    /// The network violates an admissibility clause.
    #[error("inadmissible network: {0}")]
    Inadmissible(String),

    /// Points handed to an affine fit do not span a hyperplane.
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    /// A seeded construction exhausted its retry budget.
    #[error("construction failed: {0}")]
    Construction(String),

    /// Hyperplane recovery found the wrong number of hyperplanes.
    #[error("hyperplane recovery failed: expected {expected}, found {found}")]
    Recovery { expected: usize, found: usize },

    #[error("reconstruction failed: {0}")]
    Reconstruction(String),

    /// Hypotheses of an equivalence test do not hold.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    /// A witness or intermediate result does not match the object it was applied to.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("size limit exceeded: {0}")]
    Size(String),

    /// Tolerances too loose or too tight for the requested construction.
    #[error("tolerance error: {0}")]
    Tolerance(String),

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub fn is_parse(&self) -> bool {
        matches!(self, Error::Parse { .. })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::Input(_) => "input",
            Error::Parse { .. } => "parse",
            Error::Inadmissible(_) => "inadmissible",
            Error::DegenerateFit(_) => "degenerate_fit",
            Error::Construction(_) => "construction",
            Error::Recovery { .. } => "recovery",
            Error::Reconstruction(_) => "reconstruction",
            Error::Hypothesis(_) => "hypothesis",
            Error::Invariant(_) => "invariant",
            Error::Size(_) => "size",
            Error::Tolerance(_) => "tolerance",
            Error::Internal(_) => "internal",
        }
    }

    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
