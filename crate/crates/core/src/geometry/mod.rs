//! Planar domains, triangulations and boundary-curvature functionals.

mod domain;
mod functionals;
mod mesh;

use thiserror::Error;

pub use domain::{BoundaryPoint, Domain2D, Shape};
pub use functionals::{
    anisotropic_sff, curvature_lorentz_norm, find_s0, g_function, sff_sandwich, CurvatureProfile,
    SffSandwich, MIN_CURVATURE_CELLS,
};
pub use mesh::{relative_isoperimetric_check, triangulate, BoundaryEdge, Mesh2D, MeshQuality};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("boundary point at arclength {0} is a corner")]
    Corner(f64),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("boundary quadrature did not converge (achieved error {0})")]
    Quadrature(f64),
    #[error("meshing requires a convex domain")]
    NonConvex,
    #[error("meshing failed: {0}")]
    Meshing(String),
    #[error("no admissible s0: G at the smallest grid point is {g_min}")]
    Threshold { g_min: f64 },
    #[error("argument out of range: {0}")]
    Domain(String),
}
