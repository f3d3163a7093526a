use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A density or rate argument outside the admissible (nonnegative) domain.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// cp <= mq, so lambda = m/(cp - mq) is undefined.
    #[error("no coexistence structure: cp = {cp} <= mq = {mq}")]
    NoCoexistenceStructure { cp: f64, mq: f64 },

    /// A strict inequality required for the coexistence state does not hold.
    #[error("hypothesis failed: {0}")]
    Hypothesis(String),

    #[error("internal root-finding failure: {0}")]
    RootBracket(String),

    #[error("no positive chi: r = {r} <= d = {d}")]
    NoPositiveChi { r: f64, d: f64 },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("negative density after step at t = {t} (dt = {dt})")]
    Positivity { t: f64, dt: f64 },

    #[error("non-finite values (blow-up) at t = {t}")]
    BlowUp { t: f64 },

    #[error("step size underflow at t = {t} (dt = {dt})")]
    StepUnderflow { t: f64, dt: f64 },

    #[error("explicit scheme requires dt <= {limit}, got {dt}")]
    ExplicitUnstable { dt: f64, limit: f64 },
}

impl Error {
    /// Errors that mean "the model hypotheses are not met", as opposed to a
    /// malformed request or a numerical failure.
    pub fn is_hypothesis_failure(&self) -> bool {
        matches!(
            self,
            Error::NoCoexistenceStructure { .. } | Error::Hypothesis(_) | Error::NoPositiveChi { .. }
        )
    }

    pub fn is_numerical_failure(&self) -> bool {
        matches!(
            self,
            Error::Positivity { .. }
                | Error::BlowUp { .. }
                | Error::StepUnderflow { .. }
                | Error::RootBracket(_)
        )
    }
}
