//! Anisotropic norms `H`, the monotone fields `A` and `A_ε` built from them, and
//! numerical checks of the vector-field identities used on the boundary.

mod field;
mod identity;
mod norm;

use thiserror::Error;

pub use field::{field_convergence_report, ConvergenceRow, MonotoneField};
pub use identity::{check_divergence_identity, IdentityResidual, Poly2, PolyField2, SmoothField2};
pub use norm::{estimate_ellipticity, AnisotropicNorm, NormKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NormError {
    #[error("gauge matrix is not symmetric")]
    Asymmetric,
    #[error("gauge matrix is not positive definite (smallest eigenvalue {0})")]
    NotPositiveDefinite(f64),
    #[error("norm is degenerate: estimated ellipticity constant {0} is below 1e-8")]
    Degenerate(f64),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("the field is not differentiable at the origin")]
    SingularPoint,
    #[error("quadrature did not converge (achieved error {0})")]
    Quadrature(f64),
}
