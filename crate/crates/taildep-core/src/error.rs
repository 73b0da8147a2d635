use alloc::string::String;
use core::fmt;

#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// A parameter is out of range or missing; the payload names it.
    InvalidParameter(String),
    UnknownFamily(String),
    NotANorm(String),
    ProfileUnresolved(String),
    MappingUndefined(String),
    SideDataConflict(String),
    InsufficientData(String),
    NonConvergent { what: String, value: f64, abs_err: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter(s) => write!(f, "invalid parameter: {s}"),
            Error::UnknownFamily(s) => write!(f, "unknown distribution family: {s}"),
            Error::NotANorm(s) => write!(f, "not a norm: {s}"),
            Error::ProfileUnresolved(s) => write!(f, "norm profile unresolved: {s}"),
            Error::MappingUndefined(s) => write!(f, "log mapping undefined: {s}"),
            Error::SideDataConflict(s) => write!(f, "side data conflict: {s}"),
            Error::InsufficientData(s) => write!(f, "insufficient data: {s}"),
            Error::NonConvergent { what, value, abs_err } => {
                write!(f, "{what} did not converge (best estimate {value:e}, error {abs_err:e})")
            }
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
