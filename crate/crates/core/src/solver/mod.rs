//! P1 finite-element minimization of `∫ B(H(∇u)) − ∫ f u` with ε-regularization,
//! energy and gradient estimates, manufactured solutions and the exponential change
//! of variables for natural-growth right-hand sides.

mod estimates;
mod kazdan;
mod manufactured;
mod newton;
mod problem;

use thiserror::Error;

use crate::linalg::LinalgError;
use crate::norm_field::NormError;
use crate::rearrangement::RearrangementError;
use crate::young::YoungError;

pub use estimates::{energy_estimate_check, gradient_bound_ratio, EnergyEstimate};
pub use kazdan::{natural_growth_solve, KazdanKramer, NaturalGrowthSolution, TransformedField};
pub use manufactured::{
    manufactured_problem, ExactSolution, FnSolution, ManufacturedErrors, ManufacturedProblem,
};
pub use newton::{
    solve, solve_with, DiscreteSolution, LinearSolver, NewtonRecord, SolverOptions, DIRECT_LIMIT,
};
pub use problem::{
    assemble_energy, assemble_residual_and_hessian, default_schedule, BoundaryCondition,
    DiscreteProblem,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("Neumann source violates compatibility: integral {integral:e} against L1 norm {l1:e}")]
    Compatibility { integral: f64, l1: f64 },
    #[error("Hessian is not positive definite at epsilon = {epsilon:e} ({detail}); try a larger epsilon")]
    Regularization { epsilon: f64, detail: String },
    #[error(
        "Newton stalled at epsilon = {epsilon:e} after {iterations} iterations \
         (residual {residual:e}, energy {energy:e})"
    )]
    Convergence {
        epsilon: f64,
        iterations: usize,
        residual: f64,
        energy: f64,
    },
    #[error("the exponential transform needs a pure power Young function")]
    UnsupportedTransform,
    #[error("inverse transform undefined at v = {0}")]
    TransformDomain(f64),
    #[error("gradient bound ratio is undefined for a zero source")]
    UndefinedRatio,
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error(transparent)]
    Linear(#[from] LinalgError),
    #[error(transparent)]
    Young(#[from] YoungError),
    #[error(transparent)]
    Norm(#[from] NormError),
    #[error(transparent)]
    Rearrangement(#[from] RearrangementError),
}
