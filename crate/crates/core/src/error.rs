use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Price series violates a structural invariant.
    InvalidSeries(String),
    /// A price at `row` (0-based data row) for `asset` was not strictly positive and finite.
    NonPositivePrice { row: usize, asset: usize, value: f64 },
    /// Timestamp spacing changed at `row`.
    NonUniformSpacing { row: usize, expected: i64, found: i64 },
    /// Weight vector is not a valid portfolio vector.
    InvalidWeights(String),
    /// A parameter is outside its documented range.
    InvalidParameter(String),
    /// Two inputs that must agree in length do not.
    LengthMismatch { what: &'static str, expected: usize, found: usize },
    /// A numerical solve failed to produce a finite answer within bounds.
    Solver(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidSeries(msg) => write!(f, "invalid price series: {msg}"),
            Error::NonPositivePrice { row, asset, value } => {
                write!(f, "row {row}: price for asset {asset} is not positive ({value})")
            }
            Error::NonUniformSpacing { row, expected, found } => write!(
                f,
                "row {row}: non-uniform timestamp spacing (expected step {expected}s, found {found}s)"
            ),
            Error::InvalidWeights(msg) => write!(f, "invalid weights: {msg}"),
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::LengthMismatch { what, expected, found } => {
                write!(f, "{what}: expected length {expected}, found {found}")
            }
            Error::Solver(msg) => write!(f, "solver failure: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
