use crate::rearrangement::xn_norm;
use crate::scalar::Real;

use super::newton::{solve_with, DiscreteSolution, SolverOptions};
use super::problem::{BoundaryCondition, DiscreteProblem};
use super::SolverError;

/// `ψ(t) = ∫₀ᵗ e^{κτ/(p−1)} dτ`, which turns `−div A(∇u) = κ H(∇u)^p + f` into
/// `−div A(∇v) = e^{κu} f` for `v = ψ(u)` when `A` is `(p−1)`-homogeneous.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KazdanKramer<T> {
    kappa: T,
    p: T,
}

/// Nodal values and per-triangle gradients of `v = ψ(u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedField<T> {
    pub v: Vec<T>,
    pub gradients: Vec<[T; 2]>,
}

impl<T: Real> KazdanKramer<T> {
    pub fn new(kappa: T, p: T) -> Result<Self, SolverError> {
        if !(p > T::one()) || !kappa.is_finite() {
            return Err(SolverError::InvalidParameters(format!(
                "transform needs p > 1 and finite kappa (p = {p}, kappa = {kappa})"
            )));
        }
        Ok(Self { kappa, p })
    }

    pub fn kappa(&self) -> T {
        self.kappa
    }

    fn rate(&self) -> T {
        self.kappa / (self.p - T::one())
    }

    pub fn psi(&self, t: T) -> T {
        let r = self.rate();
        if r == T::zero() {
            return t;
        }
        (r * t).exp_m1() / r
    }

    pub fn psi_prime(&self, t: T) -> T {
        (self.rate() * t).exp()
    }

    /// `ψ⁻¹(v) = ln(1 + κv/(p−1)) (p−1)/κ`, defined for `1 + κv/(p−1) > 0`.
    pub fn psi_inv(&self, v: T) -> Result<T, SolverError> {
        let r = self.rate();
        if r == T::zero() {
            return Ok(v);
        }
        let arg = r * v;
        if !(arg > -T::one()) {
            return Err(SolverError::TransformDomain(v.as_f64()));
        }
        Ok(arg.ln_1p() / r)
    }

    /// `v = ψ(u)` with `∇v = ψ'(ū_T) ∇u_T` on each triangle (`ū_T` the vertex mean).
    pub fn transform(&self, prob: &DiscreteProblem<T>, sol: &DiscreteSolution<T>) -> TransformedField<T> {
        let mesh = prob.mesh();
        let third = T::one() / T::lit(3.0);
        let v = sol.u.iter().map(|u| self.psi(*u)).collect();
        let gradients = mesh
            .triangles()
            .iter()
            .zip(&sol.gradients)
            .map(|(tri, g)| {
                let mean = (sol.u[tri[0]] + sol.u[tri[1]] + sol.u[tri[2]]) * third;
                let s = self.psi_prime(mean);
                [g[0] * s, g[1] * s]
            })
            .collect();
        TransformedField { v, gradients }
    }

    pub fn inverse(&self, v: &[T]) -> Result<Vec<T>, SolverError> {
        v.iter().map(|x| self.psi_inv(*x)).collect()
    }
}

/// Solution of the natural-growth problem and the transformed one.
#[derive(Debug, Clone)]
pub struct NaturalGrowthSolution<T> {
    /// `u = ψ⁻¹(v)`.
    pub u: DiscreteSolution<T>,
    /// Solution of the transformed problem at the last fixed-point iterate.
    pub v: DiscreteSolution<T>,
    pub picard_iters: usize,
    pub u_sup: T,
    /// `‖∇u‖_∞ / (‖f‖_X^{1/(p−1)} exp(2|κ| ‖u‖_∞/(p−1)))`.
    pub bound_ratio: T,
}

const MAX_PICARD: usize = 100;

/// Solves `−div A(∇u) = κ H(∇u)^p + f`, `u = 0` on the boundary, for a pure power
/// Young function `t^p/p`.
///
/// Fixed-point iteration on the source: given `u_k`, solve `−div A(∇v) = e^{κ u_k} f`
/// and set `u_{k+1} = ψ⁻¹(v)`, until the nodal change is below `1e-10 (1 + ‖u‖_∞)`.
pub fn natural_growth_solve<T: Real>(
    prob: &DiscreteProblem<T>,
    kappa: T,
    opts: &SolverOptions<T>,
) -> Result<NaturalGrowthSolution<T>, SolverError> {
    let p = prob.young().power_exponent().ok_or(SolverError::UnsupportedTransform)?;
    if prob.bc() != BoundaryCondition::Dirichlet {
        return Err(SolverError::InvalidParameters(
            "the natural-growth solver supports Dirichlet conditions only".into(),
        ));
    }
    let kk = KazdanKramer::new(kappa, p)?;
    let mesh = prob.mesh();
    let third = T::one() / T::lit(3.0);
    let f = prob.source();
    let n = mesh.num_nodes();
    let mut u = vec![T::zero(); n];
    let mut v_prev: Option<Vec<T>> = None;
    let mut last = None;
    let final_eps = *prob.schedule().last().expect("non-empty schedule");
    for it in 1..=MAX_PICARD {
        let fhat: Vec<T> = mesh
            .triangles()
            .iter()
            .zip(f.values())
            .map(|(tri, fv)| {
                let mean = (u[tri[0]] + u[tri[1]] + u[tri[2]]) * third;
                (kappa * mean).exp() * *fv
            })
            .collect();
        let mut vprob = prob.with_source(f.with_values(fhat)?)?;
        if v_prev.is_some() {
            vprob = vprob.with_schedule(vec![final_eps])?;
        }
        let vsol = solve_with(&vprob, opts, v_prev.as_deref())?;
        let u_new = kk.inverse(&vsol.u)?;
        let change = u_new
            .iter()
            .zip(&u)
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()));
        u = u_new;
        let sup = u.iter().fold(T::zero(), |m, x| m.max(x.abs()));
        v_prev = Some(vsol.u.clone());
        last = Some((vsol, it));
        if kappa == T::zero() || change <= T::lit(1e-10) * (T::one() + sup) {
            break;
        }
        if it == MAX_PICARD {
            return Err(SolverError::Convergence {
                epsilon: final_eps.as_f64(),
                iterations: it,
                residual: change.as_f64(),
                energy: f64::NAN,
            });
        }
    }
    let (v, picard_iters) = last.expect("at least one iteration");
    let mut usol = DiscreteSolution::from_nodal(prob, u);
    usol.residual_norm = v.residual_norm;
    usol.newton_iters = v.newton_iters;
    usol.eps_schedule_used = v.eps_schedule_used.clone();
    let u_sup = usol.u.iter().fold(T::zero(), |m, x| m.max(x.abs()));
    let fx = xn_norm(f, 2)?;
    let bound_ratio = if fx == T::zero() {
        T::zero()
    } else {
        usol.grad_sup
            / (fx.powf(T::one() / (p - T::one()))
                * (T::lit(2.0) * kappa.abs() * u_sup / (p - T::one())).exp())
    };
    Ok(NaturalGrowthSolution {
        u: usol,
        v,
        picard_iters,
        u_sup,
        bound_ratio,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::geometry::{triangulate, Domain2D};
    use crate::norm_field::AnisotropicNorm;
    use crate::rearrangement::SampledFunction;
    use crate::solver::solve;
    use crate::young::YoungFunction;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn closed_forms() {
        let id = KazdanKramer::<f64>::new(0.0, 3.0).unwrap();
        assert_eq!(id.psi(0.7), 0.7);
        assert_eq!(id.psi_inv(-0.2).unwrap(), -0.2);
        let e = KazdanKramer::<f64>::new(2.0, 3.0).unwrap();
        for t in [-1.0f64, 0.0, 0.5, 2.0] {
            assert!((e.psi(t) - t.exp_m1()).abs() < 1e-14 * (1.0 + t.exp()));
            let v = e.psi(t);
            assert!((e.psi_inv(v).unwrap() - (1.0 + v).ln()).abs() < 1e-14);
        }
        assert!(e.psi_inv(-1.0).is_err());
    }

    #[test]
    fn round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for kappa in [-1.0, -0.5, 0.3, 1.0] {
            let k = KazdanKramer::new(kappa, 2.5).unwrap();
            for _ in 0..200 {
                let u: f64 = rng.gen_range(-3.0..3.0);
                assert!((k.psi_inv(k.psi(u)).unwrap() - u).abs() < 1e-12);
            }
        }
    }

    fn problem(h: f64, f0: f64) -> DiscreteProblem<f64> {
        let mesh = Arc::new(triangulate(&Domain2D::disk(1.0).unwrap(), h).unwrap());
        let f = SampledFunction::new(vec![f0; mesh.num_triangles()], mesh.areas()).unwrap();
        DiscreteProblem::new(
            mesh,
            BoundaryCondition::Dirichlet,
            f,
            YoungFunction::power(2.0).unwrap(),
            AnisotropicNorm::euclidean(),
        )
        .unwrap()
    }

    #[test]
    fn zero_kappa_is_plain_solve() {
        let prob = problem(0.2, 1.0);
        let a = natural_growth_solve(&prob, 0.0, &SolverOptions::default()).unwrap();
        let b = solve(&prob).unwrap();
        assert_eq!(a.u.u, b.u);
        assert_eq!(a.picard_iters, 1);
    }

    #[test]
    fn transformed_equation_is_satisfied() {
        // for p = 2: −Δv = e^{κu} f with v = ψ(u)
        let prob = problem(0.15, 1.0);
        let kappa = 0.5;
        let sol = natural_growth_solve(&prob, kappa, &SolverOptions::default()).unwrap();
        let k = KazdanKramer::new(kappa, 2.0).unwrap();
        for (u, v) in sol.u.u.iter().zip(&sol.v.u) {
            assert!((k.psi(*u) - v).abs() < 1e-12);
        }
        // positive κ with positive f makes u larger than the linear solution
        let lin = solve(&prob).unwrap();
        assert!(sol.u_sup > lin.u.iter().cloned().fold(0.0, f64::max));
        assert!(sol.bound_ratio.is_finite() && sol.bound_ratio > 0.0);
    }

    #[test]
    fn non_power_young_is_unsupported() {
        let prob = problem(0.3, 1.0);
        let other = DiscreteProblem::new(
            prob.mesh_arc().clone(),
            BoundaryCondition::Dirichlet,
            prob.source().clone(),
            YoungFunction::power_sum(2.0, 3.0, 1.0, 1.0).unwrap(),
            AnisotropicNorm::euclidean(),
        )
        .unwrap();
        assert!(matches!(
            natural_growth_solve(&other, 1.0, &SolverOptions::default()),
            Err(SolverError::UnsupportedTransform)
        ));
    }
}
