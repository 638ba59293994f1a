use alloc::string::String;
use core::fmt;

/// Errors produced by the reconstruction library.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Grid size rejected (must be even and at least 4 intervals).
    InvalidGrid(usize),
    /// Two fields that must share a grid do not.
    GridMismatch,
    /// A scalar parameter is outside its admissible range.
    InvalidParameter { name: &'static str, value: f64 },
    /// Wrong number of entries for a container or boundary trace.
    DimensionMismatch { expected: usize, found: usize },
    /// The discrete operator could not be factored or the residual target
    /// was not reached.
    SingularSystem { smallest_pivot: f64, residual: f64 },
    /// An iterative solve stopped before reaching its tolerance.
    NotConverged { iterations: usize, residual: f64 },
    /// No node satisfies the determinant condition.
    EmptyAdmissibleRegion { c0: f64, max_det: f64 },
    /// Complex symmetric square root requested for a (near-)defective matrix.
    DefectiveMatrix { condition: f64 },
    /// No illumination set passed the independence check.
    NoAdmissibleIlluminations { sigma_min: f64 },
    /// A point or line does not fall on a grid node.
    OffGrid(f64),
    /// Division by a field that vanishes identically.
    ZeroNorm,
    /// Free-form message for configuration problems.
    Config(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidGrid(n) => write!(f, "invalid grid: N = {n} (need even N >= 4)"),
            Error::GridMismatch => write!(f, "fields live on different grids"),
            Error::InvalidParameter { name, value } => {
                write!(f, "invalid parameter {name} = {value}")
            }
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::SingularSystem {
                smallest_pivot,
                residual,
            } => write!(
                f,
                "singular discrete operator: smallest pivot {smallest_pivot:e}, relative residual {residual:e}"
            ),
            Error::NotConverged {
                iterations,
                residual,
            } => write!(
                f,
                "solver did not converge after {iterations} iterations (relative residual {residual:e})"
            ),
            Error::EmptyAdmissibleRegion { c0, max_det } => write!(
                f,
                "no node satisfies |det(curl H1, curl H2)| >= {c0:e} (max {max_det:e}); \
                 additional or different illuminations are required"
            ),
            Error::DefectiveMatrix { condition } => write!(
                f,
                "complex symmetric matrix is (near) defective: eigenvector condition {condition:e}"
            ),
            Error::NoAdmissibleIlluminations { sigma_min } => write!(
                f,
                "no illumination set passed the independence check (best sigma_min {sigma_min:e})"
            ),
            Error::OffGrid(v) => write!(f, "coordinate {v} is not on a grid line"),
            Error::ZeroNorm => write!(f, "reference field has zero norm"),
            Error::Config(msg) => write!(f, "{msg}"),
        }
    }
}

impl core::error::Error for Error {}
