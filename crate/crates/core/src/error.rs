use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "window not faithful: need observe_low <= {required}, sampler window starts at {window}"
    )]
    Faithfulness { required: f64, window: f64 },

    #[error("particle budget exceeded: {needed} particles requested, cap {cap}")]
    ParticleBudgetExceeded { needed: f64, cap: usize },

    #[error("too few samples: got {got}, need at least {min}")]
    TooFewSamples { got: usize, min: usize },

    #[error("curves have no overlapping effective range")]
    NoOverlap,

    #[error("integral is nonnegative ({0}); the test function never touches the decoration")]
    DegenerateIntegral(f64),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("argument {arg} outside supported domain [{lo}, {hi}]")]
    Domain { arg: f64, lo: f64, hi: f64 },

    #[error(
        "acceptance rate {rate:.3e} below the minimum {min:.1e}; lower the conditioning level"
    )]
    AcceptanceTooLow { rate: f64, min: f64 },

    #[error("gave up after {attempts} attempts with {accepted} of {wanted} samples accepted")]
    MaxAttemptsExceeded {
        attempts: u64,
        accepted: usize,
        wanted: usize,
    },

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("unknown check `{0}`")]
    UnknownCheck(String),

    #[error("closed form {closed} disagrees with quadrature {quadrature}")]
    OracleMismatch { closed: f64, quadrature: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
