use crate::rearrangement::xn_norm;
use crate::scalar::Real;

use super::newton::DiscreteSolution;
use super::problem::DiscreteProblem;
use super::SolverError;

/// Energy of a solution against the conjugate of the source norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyEstimate<T> {
    /// `Σ_T |T| B(H(∇u_T))`.
    pub lhs: T,
    /// `B̃(‖f‖_{L²})`.
    pub rhs: T,
    /// `lhs / rhs`, zero when both vanish.
    pub ratio: T,
}

pub fn energy_estimate_check<T: Real>(
    sol: &DiscreteSolution<T>,
    prob: &DiscreteProblem<T>,
) -> Result<EnergyEstimate<T>, SolverError> {
    let mesh = prob.mesh();
    let yf = prob.young();
    let mut lhs = T::zero();
    for (t, g) in sol.gradients.iter().enumerate() {
        lhs += mesh.area(t) * yf.eval_big_b(prob.norm().eval(g))?;
    }
    let fnorm = prob.source().lp_norm(T::lit(2.0));
    let rhs = yf.conjugate(fnorm)?;
    let ratio = if lhs == T::zero() { T::zero() } else { lhs / rhs };
    Ok(EnergyEstimate { lhs, rhs, ratio })
}

/// `‖∇u‖_∞ / b⁻¹(‖f‖_X)` with the two-dimensional `X` norm of the source.
pub fn gradient_bound_ratio<T: Real>(
    sol: &DiscreteSolution<T>,
    prob: &DiscreteProblem<T>,
) -> Result<T, SolverError> {
    let x = xn_norm(prob.source(), 2)?;
    if x == T::zero() {
        return Err(SolverError::UndefinedRatio);
    }
    let binv = prob.young().inverse_derivative(x)?;
    Ok(sol.grad_sup / binv)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;
    use std::sync::Arc;

    use super::*;
    use crate::geometry::{triangulate, Domain2D};
    use crate::norm_field::AnisotropicNorm;
    use crate::rearrangement::SampledFunction;
    use crate::solver::{solve, BoundaryCondition};
    use crate::young::YoungFunction;

    fn disk_problem(p: f64, h: f64, f0: f64) -> DiscreteProblem<f64> {
        let mesh = Arc::new(triangulate(&Domain2D::disk(1.0).unwrap(), h).unwrap());
        let f = SampledFunction::new(vec![f0; mesh.num_triangles()], mesh.areas()).unwrap();
        DiscreteProblem::new(
            mesh,
            BoundaryCondition::Dirichlet,
            f,
            YoungFunction::power(p).unwrap(),
            AnisotropicNorm::euclidean(),
        )
        .unwrap()
    }

    #[test]
    fn poisson_energy_estimate() {
        let prob = disk_problem(2.0, 0.05, 1.0);
        let sol = solve(&prob).unwrap();
        let e = energy_estimate_check(&sol, &prob).unwrap();
        // |∇u| = r/2: ½∫|∇u|² = π/16; B̃(√|Ω|) = |Ω|/2
        assert!((e.lhs - PI / 16.0).abs() < 0.02 * PI / 16.0, "{}", e.lhs);
        assert!((e.rhs - prob.mesh().total_area() / 2.0).abs() < 1e-9);
        assert!((e.ratio - 0.125).abs() < 0.03 * 0.125);
    }

    #[test]
    fn zero_source() {
        let prob = disk_problem(2.0, 0.2, 0.0);
        let sol = solve(&prob).unwrap();
        let e = energy_estimate_check(&sol, &prob).unwrap();
        assert_eq!((e.lhs, e.ratio), (0.0, 0.0));
        assert!(matches!(gradient_bound_ratio(&sol, &prob), Err(SolverError::UndefinedRatio)));
    }

    #[test]
    fn ratio_is_scale_invariant_for_powers() {
        let base = disk_problem(3.0, 0.15, 1.0);
        let mut ratios = Vec::new();
        for s in [1.0, 4.0, 16.0] {
            let prob = base
                .with_source(base.source().map(|v| v * s))
                .unwrap();
            let sol = solve(&prob).unwrap();
            ratios.push(gradient_bound_ratio(&sol, &prob).unwrap());
        }
        for r in &ratios[1..] {
            assert!((r - ratios[0]).abs() < 1e-3 * ratios[0], "{ratios:?}");
        }
    }
}
