use std::sync::Arc;

use crate::geometry::Mesh2D;
use crate::norm_field::{AnisotropicNorm, MonotoneField};
use crate::rearrangement::SampledFunction;
use crate::scalar::Real;
use crate::young::{Growth, YoungFunction};

use super::newton::DiscreteSolution;
use super::problem::{BoundaryCondition, DiscreteProblem};
use super::SolverError;

/// A smooth exact solution given by value and gradient oracles.
pub trait ExactSolution<T: Real> {
    fn value(&self, x: &[T; 2]) -> T;
    fn gradient(&self, x: &[T; 2]) -> [T; 2];
}

/// [`ExactSolution`] from a pair of closures.
pub struct FnSolution<F, G> {
    pub value: F,
    pub gradient: G,
}

impl<T, F, G> ExactSolution<T> for FnSolution<F, G>
where
    T: Real,
    F: Fn(&[T; 2]) -> T,
    G: Fn(&[T; 2]) -> [T; 2],
{
    fn value(&self, x: &[T; 2]) -> T {
        (self.value)(x)
    }

    fn gradient(&self, x: &[T; 2]) -> [T; 2] {
        (self.gradient)(x)
    }
}

/// A problem whose exact solution is known.
#[derive(Debug, Clone)]
pub struct ManufacturedProblem<T: Real> {
    pub problem: DiscreteProblem<T>,
    pub exact_nodal: Vec<T>,
    /// Exact gradient at triangle centroids.
    pub exact_gradients: Vec<[T; 2]>,
    /// Set when the exact gradient vanishes somewhere while `b(t)/t` blows up at zero,
    /// so the source is not smooth there.
    pub degenerate: bool,
}

/// Errors of a discrete solution against the exact one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedErrors<T> {
    pub nodal_max: T,
    /// `max_T |∇u_h − ∇u(centroid)|`.
    pub gradient_sup: T,
}

impl<T: Real> ManufacturedProblem<T> {
    pub fn errors(&self, sol: &DiscreteSolution<T>) -> ManufacturedErrors<T> {
        let nodal_max = sol
            .u
            .iter()
            .zip(&self.exact_nodal)
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()));
        let gradient_sup = sol
            .gradients
            .iter()
            .zip(&self.exact_gradients)
            .fold(T::zero(), |m, (a, b)| {
                m.max(((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt())
            });
        ManufacturedErrors {
            nodal_max,
            gradient_sup,
        }
    }
}

/// `f = −div A(∇u_exact)` by central differences of the field, averaged over the
/// three edge midpoints of each triangle.
///
/// Dirichlet data require `u_exact = 0` on boundary nodes (within `1e-8`). For Neumann
/// data the discrete mean of `f` is removed.
pub fn manufactured_problem<T: Real, E: ExactSolution<T>>(
    exact: &E,
    mesh: Arc<Mesh2D<T>>,
    bc: BoundaryCondition,
    yf: YoungFunction<T>,
    norm: AnisotropicNorm<T, 2>,
) -> Result<ManufacturedProblem<T>, SolverError> {
    let exact_nodal: Vec<T> = mesh.vertices().iter().map(|x| exact.value(x)).collect();
    if bc == BoundaryCondition::Dirichlet {
        let worst = exact_nodal
            .iter()
            .zip(mesh.boundary_flags())
            .filter(|(_, b)| **b)
            .fold(T::zero(), |m, (v, _)| m.max(v.abs()));
        if worst > T::lit(1e-8) {
            return Err(SolverError::InvalidParameters(format!(
                "exact solution is {worst} on the boundary"
            )));
        }
    }
    let field = MonotoneField::new(norm.clone(), yf.clone());
    let diam = mesh
        .vertices()
        .iter()
        .fold(T::zero(), |m, x| m.max(x[0].abs()).max(x[1].abs()));
    let h = T::lit(1e-4) * T::one().max(diam);
    let flux = |x: &[T; 2]| field.eval(&exact.gradient(x));
    let source_at = |x: &[T; 2]| {
        let mut div = T::zero();
        for axis in 0..2 {
            let mut p = *x;
            let mut m = *x;
            p[axis] += h;
            m[axis] -= h;
            div += (flux(&p)[axis] - flux(&m)[axis]) / (T::lit(2.0) * h);
        }
        -div
    };
    let third = T::one() / T::lit(3.0);
    let mut values = Vec::with_capacity(mesh.num_triangles());
    let mut exact_gradients = Vec::with_capacity(mesh.num_triangles());
    let mut min_grad = T::infinity();
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let v = tri.map(|i| mesh.vertices()[i]);
        let mut s = T::zero();
        for k in 0..3 {
            let (a, b) = (v[k], v[(k + 1) % 3]);
            let mid = [(a[0] + b[0]) * T::lit(0.5), (a[1] + b[1]) * T::lit(0.5)];
            s += source_at(&mid) * third;
        }
        values.push(s);
        let c = mesh.centroid(t);
        let g = exact.gradient(&c);
        min_grad = min_grad.min((g[0] * g[0] + g[1] * g[1]).sqrt());
        exact_gradients.push(g);
    }
    let ratio_blows_up = yf.indices().lower < T::one();
    let degenerate = ratio_blows_up && min_grad < T::lit(1e-3) * (T::one() + diam);
    let mut f = SampledFunction::new(values, mesh.areas())?;
    if bc == BoundaryCondition::Neumann {
        let shift = f.integral() / f.total_measure();
        f = f.map(|v| v - shift);
    }
    let problem = DiscreteProblem::new(mesh, bc, f, yf, norm)?;
    Ok(ManufacturedProblem {
        problem,
        exact_nodal,
        exact_gradients,
        degenerate,
    })
}
