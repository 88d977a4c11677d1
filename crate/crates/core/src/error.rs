use thiserror::Error;

/// Library error. Every variant maps to a stable CLI exit code.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Malformed or out-of-range input (schema, dimensions, parameters).
    #[error("input error: {0}")]
    Input(String),
    /// A profile or value outside the domain an operation is defined on.
    #[error("domain error: {0}")]
    Domain(String),
    /// The requested mode does not apply to this kind of instance.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// No feasible allocation, or an infeasible LP where one was required.
    #[error("infeasible: {0}")]
    Infeasible(String),
    /// Some player is indispensable, so robust BIC and IR cannot both hold.
    #[error("monopoly: {0}")]
    Monopoly(String),
    /// An enumeration or arithmetic size guard was exceeded.
    #[error("size limit exceeded: {0}")]
    Size(String),
    /// A plugin, oracle, or decomposer broke its stated contract.
    #[error("contract violation: {0}")]
    Contract(String),
    /// An internal consistency check failed.
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    /// Process exit code: 1 input, 2 infeasible, 3 size, 4 contract/internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_) | Error::Domain(_) | Error::Unsupported(_) => 1,
            Error::Infeasible(_) | Error::Monopoly(_) => 2,
            Error::Size(_) => 3,
            Error::Contract(_) | Error::Internal(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! bail {
    ($kind:ident, $($arg:tt)*) => {
        return Err($crate::error::Error::$kind(format!($($arg)*)))
    };
}
pub(crate) use bail;
