//! Numerical toolkit for quasilinear elliptic problems driven by anisotropic norms
//! and Young functions: the operators themselves, rearrangement-invariant norms,
//! boundary geometry and a finite-element solver.

// `!(x > 0)` is used deliberately so NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod geometry;
pub mod linalg;
pub mod norm_field;
pub mod numerics;
pub mod rearrangement;
pub mod scalar;
pub mod solver;
pub mod young;

pub use geometry::{Domain2D, GeometryError, Mesh2D};
pub use norm_field::{AnisotropicNorm, MonotoneField, NormError};
pub use rearrangement::{RearrangementError, SampledFunction, StepFunction};
pub use scalar::Real;
pub use solver::{BoundaryCondition, DiscreteProblem, DiscreteSolution, SolverError};
pub use young::{Growth, GrowthIndices, RegularizedYoung, YoungError, YoungFunction, YoungKind};

pub type YoungFunctionF64 = YoungFunction<f64>;
pub type RegularizedYoungF64 = RegularizedYoung<f64>;
pub type Norm2 = AnisotropicNorm<f64, 2>;
pub type Domain = Domain2D<f64>;
pub type Mesh = Mesh2D<f64>;
pub type Problem = DiscreteProblem<f64>;
pub type Solution = DiscreteSolution<f64>;
