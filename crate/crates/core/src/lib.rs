//! Refinement of isolated singular zeros of square polynomial systems.
//!
//! The crate is organised bottom-up:
//!
//! - [`poly`]: sparse multivariate complex polynomials, evaluation and exact
//!   derivatives (Jacobian, directional Hessian), affine composition.
//! - [`parse`]: the text and JSON formats for polynomial systems.
//! - [`linalg`]: dense complex linear algebra contracts (tolerance split of
//!   the SVD, solves, least squares, kernels).
//! - [`functional`] and [`dual`]: differential functionals and the local
//!   dual space (breadth, depth, multiplicity) plus deflation-one tests.
//! - [`twostep`]: the two-step Newton iteration for deflation-one zeros.
//! - [`lvz`]: the deflation baseline and Gauss-Newton on the deflated system.

pub mod dual;
pub mod error;
pub mod functional;
pub mod linalg;
pub mod lvz;
pub mod parse;
pub mod poly;
pub mod random;
pub mod twostep;

pub use dual::{
    deflation_one_necessary, is_deflation_one, multiplicity_structure, DualBasis, DualSpaceReport,
};
pub use error::{Error, Result};
pub use functional::Functional;
pub use linalg::{CMatrix, CVector, SvdSplit};
pub use lvz::{DeflatedSystem, GnTrace};
pub use parse::{format_poly, format_system, parse_system};
pub use poly::{Monomial, Poly, PolySystem, C64};
pub use twostep::{refine, two_step, RefineTrace, StepConfig, StepResult, Tolerance};
