use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Malformed arguments: wrong lengths, indices out of range, points
    /// outside the domain.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Derivative order beyond the smoothness class of the kernel family.
    #[error(
        "unsupported derivative: {family} admits order <= {max} per argument, got {requested}"
    )]
    UnsupportedDerivative {
        family: &'static str,
        max: u32,
        requested: u32,
    },

    /// Incompatible combination of model kind, constraint, or settings.
    #[error("configuration error: {0}")]
    Configuration(String),

    /// A matrix that must be positive definite could not be factored.
    #[error("conditioning error: {0}")]
    Conditioning(String),

    /// The constraint system admits no point; `row` is the first row that
    /// could not be satisfied.
    #[error("infeasible constraint system (row {row})")]
    Infeasible { row: usize },

    #[error("active-set solver reached its iteration limit ({0})")]
    IterationLimit(usize),

    #[error("sampler stalled: {accepted} accepted out of {proposals} proposals")]
    SamplerStall { proposals: u64, accepted: u64 },
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Configuration(msg.into())
    }
}
