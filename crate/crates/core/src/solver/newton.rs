use std::io::{self, Write};

use crate::linalg::{pcg, LinalgError, SkylineCholesky, SparseSymmetric};
use crate::norm_field::MonotoneField;
use crate::scalar::Real;
use crate::young::RegularizedYoung;

use super::problem::{assemble_energy, assemble_residual_and_hessian, energy_difference, BoundaryCondition, DiscreteProblem};
use super::SolverError;

/// How the Newton systems are solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LinearSolver {
    /// Direct factorization below [`DIRECT_LIMIT`] unknowns, conjugate gradients above.
    #[default]
    Auto,
    Direct,
    ConjugateGradient,
}

/// Largest number of unknowns handled by the direct solver in [`LinearSolver::Auto`].
pub const DIRECT_LIMIT: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions<T> {
    /// Final stopping rule `‖residual‖_∞ ≤ tol (1 + ‖load‖_∞)`.
    pub tol: T,
    /// Same rule on intermediate continuation levels.
    pub intermediate_tol: T,
    pub max_newton: usize,
    pub armijo_c: T,
    pub max_halvings: usize,
    pub linear: LinearSolver,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-9),
            intermediate_tol: T::lit(1e-6),
            max_newton: 100,
            armijo_c: T::lit(1e-4),
            max_halvings: 60,
            linear: LinearSolver::Auto,
        }
    }
}

/// One accepted Newton step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonRecord<T> {
    pub epsilon: T,
    pub iteration: usize,
    /// Energy after the step.
    pub energy: T,
    /// Residual ∞-norm before the step.
    pub residual: T,
    pub step: T,
}

/// Result of a discrete solve.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSolution<T> {
    /// Nodal values of the P1 solution.
    pub u: Vec<T>,
    /// `∇u` on each triangle.
    pub gradients: Vec<[T; 2]>,
    /// `max_T |∇u_T|`.
    pub grad_sup: T,
    /// `max_T H(∇u_T)`.
    pub h_grad_sup: T,
    /// Regularized energy at the last continuation level.
    pub energy: T,
    pub residual_norm: T,
    /// Newton steps over all levels.
    pub newton_iters: usize,
    pub eps_schedule_used: Vec<T>,
    /// `grad_sup` at the end of each level.
    pub grad_sup_by_level: Vec<T>,
    pub history: Vec<NewtonRecord<T>>,
}

impl<T: Real> DiscreteSolution<T> {
    /// Solution record for given nodal values, with no solver history.
    pub fn from_nodal(prob: &DiscreteProblem<T>, u: Vec<T>) -> Self {
        let gradients = prob.gradients(&u);
        let (grad_sup, h_grad_sup) = sup_norms(prob, &gradients);
        let energy = assemble_energy(prob, prob.young(), &u);
        Self {
            u,
            gradients,
            grad_sup,
            h_grad_sup,
            energy,
            residual_norm: T::nan(),
            newton_iters: 0,
            eps_schedule_used: Vec::new(),
            grad_sup_by_level: Vec::new(),
            history: Vec::new(),
        }
    }

    /// Plain-text export:
    ///
    /// ```text
    /// nodes <n>
    /// <x> <y> <u>                 (n lines)
    /// triangles <m>
    /// <ux> <uy>                   (m lines, gradient per triangle)
    /// ```
    pub fn write_text<W: Write>(&self, prob: &DiscreteProblem<T>, mut w: W) -> io::Result<()> {
        let mesh = prob.mesh();
        writeln!(w, "nodes {}", self.u.len())?;
        for (x, u) in mesh.vertices().iter().zip(&self.u) {
            writeln!(w, "{:e} {:e} {:e}", x[0].as_f64(), x[1].as_f64(), u.as_f64())?;
        }
        writeln!(w, "triangles {}", self.gradients.len())?;
        for g in &self.gradients {
            writeln!(w, "{:e} {:e}", g[0].as_f64(), g[1].as_f64())?;
        }
        Ok(())
    }
}

fn sup_norms<T: Real>(prob: &DiscreteProblem<T>, grads: &[[T; 2]]) -> (T, T) {
    grads.iter().fold((T::zero(), T::zero()), |(e, h), g| {
        (
            e.max((g[0] * g[0] + g[1] * g[1]).sqrt()),
            h.max(prob.norm().eval(g)),
        )
    })
}

fn inf_norm<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

/// Solves from `u = 0` with default options.
pub fn solve<T: Real>(prob: &DiscreteProblem<T>) -> Result<DiscreteSolution<T>, SolverError> {
    solve_with(prob, &SolverOptions::default(), None)
}

/// Damped Newton on the regularized energy with continuation in `ε`, warm-started
/// between levels. `init` (nodal values) overrides the zero start; constrained
/// Dirichlet nodes are reset to zero.
pub fn solve_with<T: Real>(
    prob: &DiscreteProblem<T>,
    opts: &SolverOptions<T>,
    init: Option<&[T]>,
) -> Result<DiscreteSolution<T>, SolverError> {
    let n = prob.mesh().num_nodes();
    let mut u = match init {
        Some(v) if v.len() == n => v.to_vec(),
        Some(v) => {
            return Err(SolverError::InvalidParameters(format!(
                "initial guess has {} values for {n} nodes",
                v.len()
            )))
        }
        None => vec![T::zero(); n],
    };
    if prob.bc() == BoundaryCondition::Dirichlet {
        for (i, d) in prob.dof_map().iter().enumerate() {
            if d.is_none() {
                u[i] = T::zero();
            }
        }
    }
    let scale = T::one() + inf_norm(prob.load());
    let mut linear = LinearState::new(prob, opts.linear);
    let mut history = Vec::new();
    let mut grad_sup_by_level = Vec::new();
    let mut total_iters = 0;
    let mut energy = T::zero();
    let mut residual = T::infinity();
    let levels = prob.schedule().len();
    for (level, &eps) in prob.schedule().iter().enumerate() {
        let last = level + 1 == levels;
        let tol = if last { opts.tol } else { opts.intermediate_tol } * scale;
        let reg = RegularizedYoung::new(prob.young().clone(), eps)?;
        let field = MonotoneField::new(prob.norm().clone(), reg);
        let mut grads = prob.gradients(&u);
        energy = assemble_energy(prob, field.growth(), &u);
        let mut iters = 0;
        loop {
            let (g, k) = assemble_residual_and_hessian(prob, &field, &u);
            residual = inf_norm(&g);
            if residual <= tol {
                break;
            }
            if iters == opts.max_newton {
                return Err(SolverError::Convergence {
                    epsilon: eps.as_f64(),
                    iterations: iters,
                    residual: residual.as_f64(),
                    energy: energy.as_f64(),
                });
            }
            let rhs: Vec<T> = g.iter().map(|x| -*x).collect();
            let d = linear.solve(&k, &rhs).map_err(|e| match e {
                LinalgError::NotPositiveDefinite { .. } => SolverError::Regularization {
                    epsilon: eps.as_f64(),
                    detail: e.to_string(),
                },
                other => SolverError::Linear(other),
            })?;
            let slope = g.iter().zip(&d).fold(T::zero(), |s, (a, b)| s + *a * *b);
            let mut full = vec![T::zero(); n];
            for (node, dof) in prob.dof_map().iter().enumerate() {
                if let Some(i) = dof {
                    full[node] = d[*i];
                }
            }
            let mut t = T::one();
            let mut accepted = None;
            for _ in 0..=opts.max_halvings {
                let step: Vec<T> = full.iter().map(|x| *x * t).collect();
                let (de, new_grads) = energy_difference(prob, field.growth(), &u, &grads, &step);
                if de <= opts.armijo_c * t * slope {
                    accepted = Some((step, de, new_grads));
                    break;
                }
                t *= T::lit(0.5);
            }
            let Some((step, de, new_grads)) = accepted else {
                return Err(SolverError::Convergence {
                    epsilon: eps.as_f64(),
                    iterations: iters,
                    residual: residual.as_f64(),
                    energy: energy.as_f64(),
                });
            };
            for (a, b) in u.iter_mut().zip(&step) {
                *a += *b;
            }
            grads = new_grads;
            energy += de;
            iters += 1;
            history.push(NewtonRecord {
                epsilon: eps,
                iteration: iters,
                energy,
                residual,
                step: t,
            });
        }
        total_iters += iters;
        grad_sup_by_level.push(sup_norms(prob, &grads).0);
    }
    if prob.bc() == BoundaryCondition::Neumann {
        let mesh = prob.mesh();
        let third = T::one() / T::lit(3.0);
        let (mut m, mut a) = (T::zero(), T::zero());
        for (t, tri) in mesh.triangles().iter().enumerate() {
            let area = mesh.area(t);
            m += area * (u[tri[0]] + u[tri[1]] + u[tri[2]]) * third;
            a += area;
        }
        let shift = m / a;
        u.iter_mut().for_each(|x| *x -= shift);
    }
    let gradients = prob.gradients(&u);
    let (grad_sup, h_grad_sup) = sup_norms(prob, &gradients);
    Ok(DiscreteSolution {
        u,
        gradients,
        grad_sup,
        h_grad_sup,
        energy,
        residual_norm: residual,
        newton_iters: total_iters,
        eps_schedule_used: prob.schedule().to_vec(),
        grad_sup_by_level,
        history,
    })
}

// Reuses the fill-reducing ordering across Newton steps.
struct LinearState {
    direct: bool,
    perm: Option<Vec<usize>>,
}

impl LinearState {
    fn new<T: Real>(prob: &DiscreteProblem<T>, kind: LinearSolver) -> Self {
        let direct = match kind {
            LinearSolver::Direct => true,
            LinearSolver::ConjugateGradient => false,
            LinearSolver::Auto => prob.num_dofs() <= DIRECT_LIMIT,
        };
        Self { direct, perm: None }
    }

    fn solve<T: Real>(&mut self, k: &SparseSymmetric<T>, b: &[T]) -> Result<Vec<T>, LinalgError> {
        if k.dim() == 0 {
            return Ok(Vec::new());
        }
        if self.direct {
            let perm = self.perm.get_or_insert_with(|| k.rcm_ordering()).clone();
            Ok(SkylineCholesky::factor(k, perm)?.solve(b))
        } else {
            pcg(k, b, T::lit(1e-12), 20 * k.dim() + 100).map(|(x, _)| x)
        }
    }
}
