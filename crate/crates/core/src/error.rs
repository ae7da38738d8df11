use alloc::string::String;
use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Invalid user-supplied parameters.
    Config(String),
    /// Argument outside the mathematical domain of an operation.
    Domain(String),
    /// Caller broke a precondition (shapes, Hermiticity, ...).
    Contract(String),
    /// Evaluation landed on a pole.
    Pole(String),
    /// `|eps|` fell below the collapse threshold while integrating.
    BranchCollapse { x: f64 },
    /// Step refinement exhausted without meeting the tolerance.
    Stiffness { x: f64 },
    /// Eigen- or linear solver failure.
    Numerical(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    /// True for errors caused by the inputs rather than by the numerics.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Domain(_))
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Config(m) => write!(f, "configuration error: {m}"),
            Error::Domain(m) => write!(f, "domain error: {m}"),
            Error::Contract(m) => write!(f, "contract violation: {m}"),
            Error::Pole(m) => write!(f, "pole: {m}"),
            Error::BranchCollapse { x } => write!(f, "|eps| collapsed to zero near x = {x}"),
            Error::Stiffness { x } => write!(f, "step refinement exhausted near x = {x}"),
            Error::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl core::error::Error for Error {}
