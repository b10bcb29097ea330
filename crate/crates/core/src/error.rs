use thiserror::Error;

/// Errors raised by the polynomial, linear-algebra and refinement layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown variable `{name}` at line {line}, column {column}")]
    UnknownVariable {
        name: String,
        line: usize,
        column: usize,
    },

    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is singular to working precision (sigma_min = {sigma_min:e}, sigma_max = {sigma_max:e})")]
    Singular { sigma_min: f64, sigma_max: f64 },

    #[error("invalid tolerance {0}")]
    InvalidTolerance(f64),

    #[error("svd split is inconsistent: retained singular value {sigma:e} is not above tolerance {tol:e}")]
    InconsistentSplit { sigma: f64, tol: f64 },

    #[error("basis columns are not orthonormal (deviation {0:e})")]
    NotOrthonormal(f64),

    #[error("direction is not a unit vector in the kernel basis (deviation {0:e})")]
    BadDirection(f64),

    #[error("the jacobian has full rank at this tolerance; nothing to deflate")]
    NothingToDeflate,

    #[error("deflation did not regularize the zero within {0} steps")]
    DeflationLimit(usize),

    #[error("cannot choose a tolerance for the zero matrix")]
    ZeroMatrix,

    #[error("variable index {index} out of range for {num_vars} variables")]
    IndexOutOfRange { index: usize, num_vars: usize },

    #[error("invalid system file: {0}")]
    SystemFile(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_len(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}
