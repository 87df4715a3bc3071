use std::sync::Arc;

use crate::geometry::Mesh2D;
use crate::linalg::SparseSymmetric;
use crate::norm_field::{AnisotropicNorm, MonotoneField};
use crate::numerics;
use crate::rearrangement::SampledFunction;
use crate::scalar::Real;
use crate::young::{Growth, YoungFunction};

use super::SolverError;

/// Boundary condition of the discrete problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCondition {
    /// `u = 0` on the boundary.
    Dirichlet,
    /// Natural (conormal) condition; solutions are normalized to zero mean.
    Neumann,
}

/// Default continuation schedule for the regularization parameter.
pub fn default_schedule<T: Real>() -> Vec<T> {
    [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6].map(T::lit).to_vec()
}

/// P1 finite-element discretization of `min ∫ B(H(∇u)) − ∫ f u`.
///
/// `f` is cell data on the triangles (weights = triangle areas).
#[derive(Debug, Clone)]
pub struct DiscreteProblem<T: Real> {
    mesh: Arc<Mesh2D<T>>,
    bc: BoundaryCondition,
    f: SampledFunction<T>,
    yf: YoungFunction<T>,
    norm: AnisotropicNorm<T, 2>,
    schedule: Vec<T>,
    // node → unknown index; `None` for constrained nodes
    dofs: Vec<Option<usize>>,
    ndof: usize,
    load: Vec<T>,
    pattern: SparseSymmetric<T>,
}

impl<T: Real> DiscreteProblem<T> {
    /// Builds a problem; for Neumann data the compatibility condition `∫f = 0` must hold
    /// within `1e-10 ‖f‖_{L¹}`, after which the residual mean is removed exactly.
    pub fn new(
        mesh: Arc<Mesh2D<T>>,
        bc: BoundaryCondition,
        f: SampledFunction<T>,
        yf: YoungFunction<T>,
        norm: AnisotropicNorm<T, 2>,
    ) -> Result<Self, SolverError> {
        let nt = mesh.num_triangles();
        if f.len() != nt {
            return Err(SolverError::InvalidParameters(format!(
                "source has {} cells, mesh has {nt} triangles",
                f.len()
            )));
        }
        let areas = mesh.areas();
        let rel = f
            .weights()
            .iter()
            .zip(&areas)
            .map(|(w, a)| ((*w - *a) / *a).abs())
            .fold(T::zero(), T::max);
        if rel > T::lit(1e-10) {
            return Err(SolverError::InvalidParameters(
                "source weights must be the triangle areas".into(),
            ));
        }
        let f = match bc {
            BoundaryCondition::Dirichlet => f,
            BoundaryCondition::Neumann => {
                let l1 = f.map(|v| v.abs()).integral();
                let mean = f.integral();
                if mean.abs() > T::lit(1e-10) * l1 {
                    return Err(SolverError::Compatibility {
                        integral: mean.as_f64(),
                        l1: l1.as_f64(),
                    });
                }
                let shift = mean / f.total_measure();
                f.map(|v| v - shift)
            }
        };
        let n = mesh.num_nodes();
        let mut dofs = vec![None; n];
        let mut ndof = 0;
        for (i, d) in dofs.iter_mut().enumerate() {
            let fixed = match bc {
                BoundaryCondition::Dirichlet => mesh.is_boundary_node(i),
                // one pinned node removes the constants
                BoundaryCondition::Neumann => i == 0,
            };
            if !fixed {
                *d = Some(ndof);
                ndof += 1;
            }
        }
        let mut pairs = Vec::new();
        for t in mesh.triangles() {
            for a in 0..3 {
                for b in (a + 1)..3 {
                    if let (Some(i), Some(j)) = (dofs[t[a]], dofs[t[b]]) {
                        pairs.push((i, j));
                    }
                }
            }
        }
        let pattern = SparseSymmetric::with_pattern(ndof, pairs);
        let load = lumped_load(&mesh, f.values());
        Ok(Self {
            mesh,
            bc,
            f,
            yf,
            norm,
            schedule: default_schedule(),
            dofs,
            ndof,
            load,
            pattern,
        })
    }

    /// Replaces the continuation schedule, which must be strictly decreasing in `(0, 1)`.
    pub fn with_schedule(mut self, schedule: Vec<T>) -> Result<Self, SolverError> {
        let ok = !schedule.is_empty()
            && schedule.iter().all(|e| *e > T::zero() && *e < T::one())
            && schedule.windows(2).all(|w| w[1] < w[0]);
        if !ok {
            return Err(SolverError::InvalidParameters(
                "schedule must be non-empty, decreasing and inside (0, 1)".into(),
            ));
        }
        self.schedule = schedule;
        Ok(self)
    }

    /// Same problem with a different source.
    pub fn with_source(&self, f: SampledFunction<T>) -> Result<Self, SolverError> {
        Self::new(
            self.mesh.clone(),
            self.bc,
            f,
            self.yf.clone(),
            self.norm.clone(),
        )?
        .with_schedule(self.schedule.clone())
    }

    pub fn mesh(&self) -> &Mesh2D<T> {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> &Arc<Mesh2D<T>> {
        &self.mesh
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn source(&self) -> &SampledFunction<T> {
        &self.f
    }

    pub fn young(&self) -> &YoungFunction<T> {
        &self.yf
    }

    pub fn norm(&self) -> &AnisotropicNorm<T, 2> {
        &self.norm
    }

    pub fn schedule(&self) -> &[T] {
        &self.schedule
    }

    /// Nodal load vector `Σ_T |T| f_T / 3` over the triangles containing each node.
    pub fn load(&self) -> &[T] {
        &self.load
    }

    pub fn num_dofs(&self) -> usize {
        self.ndof
    }

    /// Unknown index of each node, `None` for constrained nodes.
    pub fn dof_map(&self) -> &[Option<usize>] {
        &self.dofs
    }

    /// Gradient of the P1 interpolant on every triangle.
    pub fn gradients(&self, u: &[T]) -> Vec<[T; 2]> {
        (0..self.mesh.num_triangles())
            .map(|t| self.mesh.gradient(t, u))
            .collect()
    }

    /// `Σ_T |T| f_T ū_T` with `ū_T` the vertex average.
    pub fn load_term(&self, u: &[T]) -> T {
        self.load.iter().zip(u).fold(T::zero(), |s, (l, v)| s + *l * *v)
    }
}

fn lumped_load<T: Real>(mesh: &Mesh2D<T>, f: &[T]) -> Vec<T> {
    let mut load = vec![T::zero(); mesh.num_nodes()];
    let third = T::one() / T::lit(3.0);
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let share = mesh.area(t) * f[t] * third;
        for &i in tri {
            load[i] += share;
        }
    }
    load
}

/// `J(u) = Σ_T |T| B(H(∇u_T)) − Σ_T |T| f_T ū_T` for the growth profile `growth`.
pub fn assemble_energy<T: Real, G: Growth<T>>(prob: &DiscreteProblem<T>, growth: &G, u: &[T]) -> T {
    let mesh = prob.mesh();
    let mut e = T::zero();
    for t in 0..mesh.num_triangles() {
        let h = prob.norm.eval(&mesh.gradient(t, u));
        e += mesh.area(t) * growth.value(h);
    }
    e - prob.load_term(u)
}

/// `J(u + d) − J(u)`, accurate even when the two energies nearly cancel.
pub(crate) fn energy_difference<T: Real, G: Growth<T>>(
    prob: &DiscreteProblem<T>,
    growth: &G,
    u: &[T],
    grads: &[[T; 2]],
    step: &[T],
) -> (T, Vec<[T; 2]>) {
    let mesh = prob.mesh();
    let moved: Vec<T> = u.iter().zip(step).map(|(a, b)| *a + *b).collect();
    let mut new_grads = Vec::with_capacity(grads.len());
    let mut diff = T::zero();
    for (t, g0) in grads.iter().enumerate() {
        let g1 = mesh.gradient(t, &moved);
        let (h0, h1) = (prob.norm.eval(g0), prob.norm.eval(&g1));
        new_grads.push(g1);
        if h0 == h1 {
            continue;
        }
        let (lo, hi, sign) = if h0 < h1 {
            (h0, h1, T::one())
        } else {
            (h1, h0, -T::one())
        };
        let piece = numerics::integrate(|s| growth.derivative(s), lo, hi, T::lit(1e-300), T::lit(1e-12))
            .unwrap_or_else(|e| T::lit(e.value));
        diff += mesh.area(t) * sign * piece;
    }
    (diff - prob.load_term(step), new_grads)
}

/// Gradient of the energy with respect to the unknowns and its Hessian, for the
/// regularized or plain field built from `growth`.
///
/// The gradient is `Σ_T |T| A(∇u_T)·∇φ_i − load_i` over unknown nodes `i`.
pub fn assemble_residual_and_hessian<T: Real, G: Growth<T>>(
    prob: &DiscreteProblem<T>,
    field: &MonotoneField<T, G, 2>,
    u: &[T],
) -> (Vec<T>, SparseSymmetric<T>) {
    let mesh = prob.mesh();
    let mut grad = vec![T::zero(); prob.ndof];
    let mut hess = prob.pattern.clone();
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let area = mesh.area(t);
        let phi = mesh.basis_gradients(t);
        let xi = mesh.gradient(t, u);
        let a = field.eval(&xi);
        let j = field.jacobian_or_origin(&xi);
        for p in 0..3 {
            let Some(i) = prob.dofs[tri[p]] else { continue };
            grad[i] += area * (a[0] * phi[p][0] + a[1] * phi[p][1]);
            let jp = [
                j[0][0] * phi[p][0] + j[0][1] * phi[p][1],
                j[1][0] * phi[p][0] + j[1][1] * phi[p][1],
            ];
            for q in 0..3 {
                let Some(k) = prob.dofs[tri[q]] else { continue };
                // (∇φ_q)ᵀ J ∇φ_p is the derivative of A(∇u)·∇φ_q along φ_p
                let v = area * (phi[q][0] * jp[0] + phi[q][1] * jp[1]);
                hess.add(k, i, v);
            }
        }
    }
    for (node, d) in prob.dofs.iter().enumerate() {
        if let Some(i) = d {
            grad[*i] -= prob.load[node];
        }
    }
    (grad, hess)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::young::RegularizedYoung;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn square(n: usize) -> Arc<Mesh2D<f64>> {
        Arc::new(Mesh2D::structured_rectangle([0.0, 0.0], [1.0, 1.0], n, n).unwrap())
    }

    fn source(mesh: &Mesh2D<f64>, f: impl Fn([f64; 2]) -> f64) -> SampledFunction<f64> {
        let vals = (0..mesh.num_triangles()).map(|t| f(mesh.centroid(t))).collect();
        SampledFunction::new(vals, mesh.areas()).unwrap()
    }

    #[test]
    fn two_triangle_quadratic_energy() {
        // one 1×1 square, Neumann so that every node is live except the pinned one
        let mesh = square(1);
        let f = source(&mesh, |_| 0.0);
        let prob = DiscreteProblem::new(
            mesh.clone(),
            BoundaryCondition::Neumann,
            f,
            YoungFunction::power(2.0).unwrap(),
            AnisotropicNorm::euclidean(),
        )
        .unwrap();
        let u = [0.0, 1.0, 3.0, -2.0];
        // triangle (0,1,3): ∇u = (1, -3); triangle (0,3,2): ∇u = (-5, 3); areas ½
        let expect = 0.5 * 0.5 * (1.0 + 9.0) + 0.5 * 0.5 * (25.0 + 9.0);
        let yf = YoungFunction::power(2.0).unwrap();
        assert!((assemble_energy(&prob, &yf, &u) - expect).abs() < 1e-12);
        // hand-assembled stiffness on the three free nodes
        let field = MonotoneField::new(AnisotropicNorm::euclidean(), yf);
        let (g, k) = assemble_residual_and_hessian(&prob, &field, &u);
        let stiff = [[1.0, 0.0, -0.5], [0.0, 1.0, -0.5], [-0.5, -0.5, 1.0]];
        // rows for nodes 1, 2, 3 of the full 4×4 stiffness matrix
        for i in 0..3 {
            for j in 0..3 {
                assert!((k.get(i, j) - stiff[i][j]).abs() < 1e-12, "({i},{j})");
            }
            let ku: f64 = (0..3).map(|j| stiff[i][j] * u[j + 1]).sum();
            let k0 = [-0.5, -0.5, 0.0][i] * u[0];
            assert!((g[i] - ku - k0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_state_energy_vanishes() {
        let mesh = square(4);
        let f = source(&mesh, |x| x[0] - 0.5);
        let prob = DiscreteProblem::new(
            mesh.clone(),
            BoundaryCondition::Neumann,
            f,
            YoungFunction::power(3.0).unwrap(),
            AnisotropicNorm::euclidean(),
        )
        .unwrap();
        let u = vec![0.0; mesh.num_nodes()];
        assert_eq!(assemble_energy(&prob, prob.young(), &u), 0.0);
    }

    #[test]
    fn incompatible_neumann_source_is_rejected() {
        let mesh = square(3);
        let f = source(&mesh, |_| 1.0);
        let err = DiscreteProblem::new(
            mesh,
            BoundaryCondition::Neumann,
            f,
            YoungFunction::power(2.0).unwrap(),
            AnisotropicNorm::euclidean(),
        )
        .unwrap_err();
        assert!(matches!(err, SolverError::Compatibility { .. }));
    }

    #[test]
    fn gradient_and_hessian_match_finite_differences() {
        let mesh = square(5);
        let f = source(&mesh, |x| 1.0 + x[0] * x[1]);
        let norm = AnisotropicNorm::gauge([[2.0, 0.3], [0.3, 1.0]]).unwrap();
        let prob = DiscreteProblem::new(
            mesh.clone(),
            BoundaryCondition::Dirichlet,
            f,
            YoungFunction::power(3.0).unwrap(),
            norm.clone(),
        )
        .unwrap();
        let reg = RegularizedYoung::new(YoungFunction::power(3.0).unwrap(), 1e-3).unwrap();
        let field = MonotoneField::new(norm, reg.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut u: Vec<f64> = (0..mesh.num_nodes()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for (i, d) in prob.dof_map().iter().enumerate() {
            if d.is_none() {
                u[i] = 0.0;
            }
        }
        let (g, k) = assemble_residual_and_hessian(&prob, &field, &u);
        let h = 1e-6;
        let node_of: Vec<usize> = (0..mesh.num_nodes()).filter(|&i| prob.dof_map()[i].is_some()).collect();
        let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (dof, &node) in node_of.iter().enumerate().step_by(2) {
            let mut up = u.clone();
            let mut um = u.clone();
            up[node] += h;
            um[node] -= h;
            let fd = (assemble_energy(&prob, &reg, &up) - assemble_energy(&prob, &reg, &um)) / (2.0 * h);
            assert!((fd - g[dof]).abs() < 1e-6 * scale, "gradient at {dof}: {fd} vs {}", g[dof]);
            let (gp, _) = assemble_residual_and_hessian(&prob, &field, &up);
            let (gm, _) = assemble_residual_and_hessian(&prob, &field, &um);
            let kscale = (0..g.len()).fold(0.0f64, |m, j| m.max(k.get(j, dof).abs()));
            for j in 0..g.len() {
                let fd = (gp[j] - gm[j]) / (2.0 * h);
                assert!((fd - k.get(j, dof)).abs() < 1e-5 * kscale);
            }
        }
        // symmetry
        for i in 0..g.len() {
            for (j, v) in k.row(i) {
                assert!((v - k.get(j, i)).abs() < 1e-12 * kscale_of(&k));
            }
        }
    }

    fn kscale_of(k: &SparseSymmetric<f64>) -> f64 {
        k.diagonal().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    #[test]
    fn energy_difference_matches_direct_evaluation() {
        let mesh = square(4);
        let f = source(&mesh, |_| 1.0);
        let prob = DiscreteProblem::new(
            mesh.clone(),
            BoundaryCondition::Dirichlet,
            f,
            YoungFunction::power(3.0).unwrap(),
            AnisotropicNorm::euclidean(),
        )
        .unwrap();
        let reg = RegularizedYoung::new(YoungFunction::power(3.0).unwrap(), 1e-2).unwrap();
        let u: Vec<f64> = mesh.vertices().iter().map(|x| x[0] * (1.0 - x[0]) * x[1]).collect();
        let d: Vec<f64> = mesh.vertices().iter().map(|x| 0.1 * x[1] * x[0]).collect();
        let grads = prob.gradients(&u);
        let (diff, _) = energy_difference(&prob, &reg, &u, &grads, &d);
        let moved: Vec<f64> = u.iter().zip(&d).map(|(a, b)| a + b).collect();
        let direct = assemble_energy(&prob, &reg, &moved) - assemble_energy(&prob, &reg, &u);
        assert!((diff - direct).abs() < 1e-10);
    }
}
