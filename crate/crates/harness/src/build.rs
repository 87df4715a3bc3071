//! Turns configuration specs into core objects.

use std::sync::Arc;

use lipbound_core::solver::{manufactured_problem, FnSolution, ManufacturedProblem};
use lipbound_core::{
    BoundaryCondition, Domain, Mesh, Norm2, Problem, SampledFunction, YoungFunctionF64,
};

use crate::config::{Bc, DomainSpec, Exact, ExperimentConfig, NormSpec, SourceSpec, YoungSpec};
use crate::HarnessError;

fn invalid(what: &str, e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Config(format!("{what}: {e}"))
}

pub fn domain(spec: &DomainSpec) -> Result<Domain, HarnessError> {
    match spec {
        DomainSpec::Disk { r } => Domain::disk(*r),
        DomainSpec::Ellipse { a, b } => Domain::ellipse(*a, *b),
        DomainSpec::Superellipse { a, b, m } => Domain::superellipse(*a, *b, *m),
        DomainSpec::Stadium { r, l } => Domain::stadium(*r, *l),
        DomainSpec::Polygon { vertices } => Domain::polygon(vertices.clone()),
    }
    .map_err(|e| invalid("domain", e))
}

pub fn norm(spec: &NormSpec) -> Result<Norm2, HarnessError> {
    match spec {
        NormSpec::Euclidean => Ok(Norm2::euclidean()),
        NormSpec::Gauge { matrix } => Norm2::gauge(*matrix),
        NormSpec::PowerSum { p, q, alpha, beta } => Norm2::power_sum(*p, *q, *alpha, *beta),
    }
    .map_err(|e| invalid("norm", e))
}

pub fn young(spec: &YoungSpec) -> Result<YoungFunctionF64, HarnessError> {
    match spec {
        YoungSpec::Power { p } => YoungFunctionF64::power(*p),
        YoungSpec::PowerSum { p, q, alpha, beta } => {
            YoungFunctionF64::power_sum(*p, *q, *alpha, *beta)
        }
        YoungSpec::Tabulated { grid, values } => {
            YoungFunctionF64::tabulated(grid.clone(), values.clone())
        }
    }
    .map_err(|e| invalid("young", e))
}

pub fn boundary_condition(bc: Bc) -> BoundaryCondition {
    match bc {
        Bc::Dirichlet => BoundaryCondition::Dirichlet,
        Bc::Neumann => BoundaryCondition::Neumann,
    }
}

/// Mean of `f` over a triangle, from the centroids of its `n²` congruent sub-triangles.
pub fn cell_average(v: [[f64; 2]; 3], n: usize, f: impl Fn(&[f64; 2]) -> f64) -> f64 {
    let nf = n as f64;
    let at = |l1: f64, l2: f64| {
        let l0 = 1.0 - l1 - l2;
        [
            l0 * v[0][0] + l1 * v[1][0] + l2 * v[2][0],
            l0 * v[0][1] + l1 * v[1][1] + l2 * v[2][1],
        ]
    };
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n - i {
            let (a, b) = (i as f64, j as f64);
            sum += f(&at((a + 1.0 / 3.0) / nf, (b + 1.0 / 3.0) / nf));
            if i + j + 1 < n {
                sum += f(&at((a + 2.0 / 3.0) / nf, (b + 2.0 / 3.0) / nf));
            }
        }
    }
    sum / (nf * nf)
}

const SUBDIVISION: usize = 8;

/// Per-triangle source values for the analytic source families.
pub fn sample_source(spec: &SourceSpec, dom: &Domain, mesh: &Mesh) -> Result<Vec<f64>, HarnessError> {
    let c = dom.center();
    let dist = move |x: &[f64; 2]| ((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2)).sqrt();
    let verts = |t: &[usize; 3]| t.map(|i| mesh.vertices()[i]);
    let values = match *spec {
        SourceSpec::Constant { value, scale } => vec![value * scale; mesh.num_triangles()],
        SourceSpec::RadialPower { exponent, scale } => {
            if !(exponent < 1.0) {
                return Err(invalid("source", "radial_power needs exponent < 1 to lie in L²"));
            }
            mesh.triangles()
                .iter()
                .map(|t| scale * cell_average(verts(t), SUBDIVISION, |x| dist(x).powf(-exponent)))
                .collect()
        }
        SourceSpec::Concentrating { k, scale } => {
            if !(k >= 1.0) {
                return Err(invalid("source", "concentrating needs k >= 1"));
            }
            let r = 1.0 / k;
            mesh.triangles()
                .iter()
                .map(|t| {
                    let frac = cell_average(verts(t), SUBDIVISION, |x| f64::from(dist(x) < r));
                    scale * k * k * frac
                })
                .collect()
        }
        SourceSpec::Manufactured { .. } => {
            return Err(invalid("source", "manufactured sources are built with the exact solution"))
        }
    };
    Ok(values)
}

fn semi_axes(spec: &DomainSpec) -> Option<(f64, f64)> {
    match *spec {
        DomainSpec::Disk { r } => Some((r, r)),
        DomainSpec::Ellipse { a, b } => Some((a, b)),
        _ => None,
    }
}

/// A discrete problem plus its exact solution when one is known.
pub struct Built {
    pub domain: Domain,
    pub problem: Problem,
    pub exact: Option<ManufacturedProblem<f64>>,
}

/// Builds the problem of one configuration instance on a mesh of size `h`.
pub fn build_problem(cfg: &ExperimentConfig, h: f64) -> Result<Built, HarnessError> {
    let dom = domain(&cfg.domain)?;
    let norm = norm(&cfg.norm)?;
    let yf = young(&cfg.young)?;
    let mesh = Arc::new(lipbound_core::geometry::triangulate(&dom, h)?);
    let bc = boundary_condition(cfg.bc);
    let schedule = cfg.solver.schedule.clone();
    let finish = |p: Problem| -> Result<Problem, HarnessError> {
        Ok(match &schedule {
            Some(s) => p.with_schedule(s.clone())?,
            None => p,
        })
    };
    if let SourceSpec::Manufactured { solution } = cfg.source {
        let (a, b) = semi_axes(&cfg.domain)
            .ok_or_else(|| invalid("source", "manufactured sources need a disk or ellipse"))?;
        let phi = move |x: &[f64; 2]| 1.0 - (x[0] / a).powi(2) - (x[1] / b).powi(2);
        let dphi = move |x: &[f64; 2]| [-2.0 * x[0] / (a * a), -2.0 * x[1] / (b * b)];
        let exact = match solution {
            Exact::Bump => manufactured_problem(
                &FnSolution {
                    value: move |x: &[f64; 2]| phi(x).powi(2),
                    gradient: move |x: &[f64; 2]| {
                        let (w, g) = (phi(x), dphi(x));
                        [2.0 * w * g[0], 2.0 * w * g[1]]
                    },
                },
                mesh,
                bc,
                yf,
                norm,
            )?,
            Exact::Paraboloid => manufactured_problem(
                &FnSolution {
                    value: move |x: &[f64; 2]| phi(x) / 4.0,
                    gradient: move |x: &[f64; 2]| {
                        let g = dphi(x);
                        [g[0] / 4.0, g[1] / 4.0]
                    },
                },
                mesh,
                bc,
                yf,
                norm,
            )?,
        };
        let mut exact = exact;
        if cfg.solver.kappa != 0.0 {
            exact.problem = subtract_natural_growth(&exact, cfg.solver.kappa, solution, a, b)?;
        }
        exact.problem = finish(exact.problem)?;
        return Ok(Built {
            domain: dom,
            problem: exact.problem.clone(),
            exact: Some(exact),
        });
    }
    let values = sample_source(&cfg.source, &dom, &mesh)?;
    let f = SampledFunction::new(values, mesh.areas())?;
    let problem = finish(Problem::new(mesh, bc, f, yf, norm)?)?;
    Ok(Built {
        domain: dom,
        problem,
        exact: None,
    })
}

// With a natural-growth term the source of the manufactured problem becomes
// `−div A(∇u) − κ H(∇u)^p`, the second part averaged over edge midpoints.
fn subtract_natural_growth(
    m: &ManufacturedProblem<f64>,
    kappa: f64,
    solution: Exact,
    a: f64,
    b: f64,
) -> Result<Problem, HarnessError> {
    let prob = &m.problem;
    let p = prob.young().power_exponent().ok_or(lipbound_core::SolverError::UnsupportedTransform)?;
    let grad = |x: &[f64; 2]| {
        let w = 1.0 - (x[0] / a).powi(2) - (x[1] / b).powi(2);
        let g = [-2.0 * x[0] / (a * a), -2.0 * x[1] / (b * b)];
        match solution {
            Exact::Bump => [2.0 * w * g[0], 2.0 * w * g[1]],
            Exact::Paraboloid => [g[0] / 4.0, g[1] / 4.0],
        }
    };
    let mesh = prob.mesh();
    let values: Vec<f64> = mesh
        .triangles()
        .iter()
        .zip(prob.source().values())
        .map(|(t, f)| {
            let v = t.map(|i| mesh.vertices()[i]);
            let mut g = 0.0;
            for k in 0..3 {
                let (x, y) = (v[k], v[(k + 1) % 3]);
                let mid = [(x[0] + y[0]) / 2.0, (x[1] + y[1]) / 2.0];
                g += prob.norm().eval(&grad(&mid)).powf(p) / 3.0;
            }
            f - kappa * g
        })
        .collect();
    Ok(prob.with_source(prob.source().with_values(values)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_average_is_exact_for_linear_functions() {
        let v = [[0.0, 0.0], [2.0, 0.0], [0.0, 1.0]];
        for n in [1, 2, 5] {
            let m = cell_average(v, n, |x| 3.0 * x[0] - x[1] + 1.0);
            assert!((m - (3.0 * 2.0 / 3.0 - 1.0 / 3.0 + 1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn concentrating_source_has_unit_scaled_mass() {
        let dom = Domain::disk(1.0).unwrap();
        let mesh = lipbound_core::geometry::triangulate(&dom, 0.05).unwrap();
        for k in [1.0, 2.0, 4.0] {
            let vals = sample_source(&SourceSpec::Concentrating { k, scale: 1.0 }, &dom, &mesh).unwrap();
            let f = SampledFunction::new(vals, mesh.areas()).unwrap();
            // k² |B(1/k)| = π
            let rel = (f.integral() - std::f64::consts::PI).abs() / std::f64::consts::PI;
            assert!(rel < 0.02, "k = {k}: {rel}");
        }
    }

    #[test]
    fn invalid_specs_are_config_errors() {
        assert!(matches!(domain(&DomainSpec::Disk { r: -1.0 }), Err(HarnessError::Config(_))));
        assert!(matches!(young(&YoungSpec::Power { p: 0.5 }), Err(HarnessError::Config(_))));
    }
}
