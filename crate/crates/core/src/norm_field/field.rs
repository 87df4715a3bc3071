use crate::scalar::{self, symmetric_eigenvalues, Mat, Real};
use crate::young::Growth;

use super::{AnisotropicNorm, NormError};

/// The monotone field `A(ξ) = b(H(ξ)) ∇H(ξ)` for a norm `H` and a growth profile `b`.
///
/// With a [`RegularizedYoung`](crate::young::RegularizedYoung) profile this is `A_ε`.
#[derive(Debug, Clone)]
pub struct MonotoneField<T: Real, G, const N: usize> {
    norm: AnisotropicNorm<T, N>,
    growth: G,
}

impl<T: Real, G: Growth<T>, const N: usize> MonotoneField<T, G, N> {
    pub fn new(norm: AnisotropicNorm<T, N>, growth: G) -> Self {
        Self { norm, growth }
    }

    pub fn norm(&self) -> &AnisotropicNorm<T, N> {
        &self.norm
    }

    pub fn growth(&self) -> &G {
        &self.growth
    }

    /// `A(ξ)`, with `A(0) = 0`.
    pub fn eval(&self, xi: &[T; N]) -> [T; N] {
        let h = self.norm.eval(xi);
        if h == T::zero() {
            return [T::zero(); N];
        }
        scalar::scale(&self.norm.grad(xi), self.growth.derivative(h))
    }

    /// `A(ξ)` through the alternate form `a(H(ξ)) ½∇H²(ξ)`.
    pub fn eval_ratio_form(&self, xi: &[T; N]) -> [T; N] {
        let h = self.norm.eval(xi);
        if h == T::zero() {
            return [T::zero(); N];
        }
        scalar::scale(&self.norm.half_grad_h2(xi), self.growth.ratio(h))
    }

    /// The potential `B(H(ξ))` whose gradient is `A`.
    pub fn potential(&self, xi: &[T; N]) -> T {
        self.growth.value(self.norm.eval(xi))
    }

    /// `∇A(ξ) = a(H) ½∇²H² + a'(H) H ∇H⊗∇H` for `ξ ≠ 0`.
    pub fn jacobian(&self, xi: &[T; N]) -> Result<Mat<T, N>, NormError> {
        let h = self.norm.eval(xi);
        if h == T::zero() {
            return Err(NormError::SingularPoint);
        }
        Ok(self.jacobian_at(xi, h))
    }

    /// Jacobian that also covers the origin, where the value along `e₁` is used.
    ///
    /// For a regularized profile `a_ε'(0) = 0`, so this is `a_ε(0) ½∇²H²(e₁)`; it is
    /// the exact derivative whenever `H²` is quadratic.
    pub fn jacobian_or_origin(&self, xi: &[T; N]) -> Mat<T, N> {
        let h = self.norm.eval(xi);
        if h == T::zero() {
            let mut out = self.norm.half_hessian_h2(xi);
            let a0 = self.growth.ratio(T::zero());
            out.iter_mut().flatten().for_each(|x| *x *= a0);
            return out;
        }
        self.jacobian_at(xi, h)
    }

    fn jacobian_at(&self, xi: &[T; N], h: T) -> Mat<T, N> {
        let a = self.growth.ratio(h);
        let da = self.growth.ratio_derivative(h);
        let g = self.norm.grad(xi);
        let mut out = self.norm.half_hessian_h2(xi);
        for i in 0..N {
            for j in 0..N {
                out[i][j] = a * out[i][j] + da * h * g[i] * g[j];
            }
        }
        out
    }

    /// Eigenvalue range of the Jacobian at `ξ ≠ 0`.
    pub fn jacobian_eigenvalues(&self, xi: &[T; N]) -> Result<(T, T), NormError> {
        let ev = symmetric_eigenvalues(&self.jacobian(xi)?);
        Ok((ev[0], ev[N - 1]))
    }

    /// The sandwich `λ min{1,i_b} a(H) ≤ eig(∇A) ≤ Λ max{1,s_b} a(H)` at `ξ ≠ 0`.
    pub fn jacobian_bounds(&self, xi: &[T; N]) -> Result<(T, T), NormError> {
        let h = self.norm.eval(xi);
        if h == T::zero() {
            return Err(NormError::SingularPoint);
        }
        let idx = self.growth.indices();
        let a = self.growth.ratio(h);
        Ok((
            self.norm.lambda() * idx.lower.min(T::one()) * a,
            self.norm.big_lambda() * idx.upper.max(T::one()) * a,
        ))
    }
}

/// One row of a field convergence report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow<T> {
    pub epsilon: T,
    pub radius: T,
    /// `sup_{|ξ| ≤ radius} |A_ε(ξ) − A(ξ)|` over the sample.
    pub deviation: T,
}

/// Sup-deviations between `A_ε` and `A` on balls of the given radii.
///
/// The supremum is taken over a polar grid (radii × directions) including the origin.
pub fn field_convergence_report<T, G, H, F, const N: usize>(
    base: &MonotoneField<T, G, N>,
    make: F,
    eps_list: &[T],
    radii: &[T],
) -> Result<Vec<ConvergenceRow<T>>, NormError>
where
    T: Real,
    G: Growth<T>,
    H: Growth<T>,
    F: Fn(T) -> Result<MonotoneField<T, H, N>, NormError>,
{
    if eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(NormError::InvalidParameters(
            "epsilon list must be strictly decreasing".into(),
        ));
    }
    let dirs = directions::<T, N>(64);
    let mut rows = Vec::new();
    for &eps in eps_list {
        let reg = make(eps)?;
        for &m in radii {
            let mut dev = T::zero();
            for k in 0..=400 {
                let r = m * T::from_count(k) / T::lit(400.0);
                for d in &dirs {
                    let xi = scalar::scale(d, r);
                    let diff = scalar::sub(&reg.eval(&xi), &base.eval(&xi));
                    dev = dev.max(scalar::norm(&diff));
                }
            }
            rows.push(ConvergenceRow {
                epsilon: eps,
                radius: m,
                deviation: dev,
            });
        }
    }
    Ok(rows)
}

fn directions<T: Real, const N: usize>(per_plane: usize) -> Vec<[T; N]> {
    let mut out = Vec::new();
    for i in 0..N {
        for j in (i + 1)..N {
            for k in 0..per_plane {
                let th = 2.0 * std::f64::consts::PI * k as f64 / per_plane as f64;
                let mut v = [T::zero(); N];
                v[i] = T::lit(th.cos());
                v[j] = T::lit(th.sin());
                out.push(v);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::young::YoungFunction;

    type Norm2 = AnisotropicNorm<f64, 2>;
    type Yf = YoungFunction<f64>;

    #[test]
    fn quadratic_and_cubic_euclidean_fields() {
        let lin = MonotoneField::new(Norm2::euclidean(), Yf::power(2.0).unwrap());
        let a = lin.eval(&[3.0, 4.0]);
        assert!((a[0] - 3.0).abs() < 1e-14 && (a[1] - 4.0).abs() < 1e-14);
        assert_eq!(lin.eval(&[0.0, 0.0]), [0.0, 0.0]);
        let j = lin.jacobian(&[0.3, -2.0]).unwrap();
        assert!((j[0][0] - 1.0).abs() < 1e-14 && j[0][1].abs() < 1e-14 && (j[1][1] - 1.0).abs() < 1e-14);

        let cub = MonotoneField::new(Norm2::euclidean(), Yf::power(3.0).unwrap());
        let a = cub.eval(&[3.0, 4.0]);
        assert!((a[0] - 15.0).abs() < 1e-12 && (a[1] - 20.0).abs() < 1e-12);
        let j = cub.jacobian(&[1.0, 0.0]).unwrap();
        assert!((j[0][0] - 2.0).abs() < 1e-14 && (j[1][1] - 1.0).abs() < 1e-14);
        assert!(j[0][1].abs() < 1e-14);
    }

    #[test]
    fn ellipse_gauge_field_by_chain_rule() {
        let h = Norm2::gauge([[4.0, 0.0], [0.0, 1.0]]).unwrap();
        let f = MonotoneField::new(h, Yf::power(3.0).unwrap());
        let a = f.eval(&[1.0, 0.0]);
        assert!((a[0] - 8.0).abs() < 1e-13 && a[1].abs() < 1e-13);
        let step = 1e-5;
        let fd = (f.potential(&[1.0 + step, 0.0]) - f.potential(&[1.0 - step, 0.0])) / (2.0 * step);
        assert!((fd - 8.0).abs() < 1e-6);
    }

    #[test]
    fn jacobian_at_origin_is_an_error() {
        let f = MonotoneField::new(Norm2::euclidean(), Yf::power(1.5).unwrap());
        assert!(matches!(f.jacobian(&[0.0, 0.0]), Err(NormError::SingularPoint)));
    }

    #[test]
    fn forms_agree_and_jacobian_matches_differences() {
        let norms = [
            Norm2::gauge([[2.0, 0.4], [0.4, 1.0]]).unwrap(),
            Norm2::power_sum(2.0, 4.0, 1.0, 1.0).unwrap(),
        ];
        let ys = [Yf::power(1.6).unwrap(), Yf::power_sum(2.0, 3.5, 1.0, 0.3).unwrap()];
        for h in &norms {
            for y in &ys {
                let f = MonotoneField::new(h.clone(), y.clone());
                for xi in [[0.7, -0.2], [-1.5, 2.5], [0.01, 0.03]] {
                    let (a, b) = (f.eval(&xi), f.eval_ratio_form(&xi));
                    for i in 0..2 {
                        assert!((a[i] - b[i]).abs() <= 1e-12 * (1.0 + a[i].abs()));
                    }
                    let j = f.jacobian(&xi).unwrap();
                    assert!((j[0][1] - j[1][0]).abs() < 1e-8);
                    let step = 1e-5 * xi[0].abs().max(xi[1].abs()).max(1.0);
                    for c in 0..2 {
                        let mut xp = xi;
                        let mut xm = xi;
                        xp[c] += step;
                        xm[c] -= step;
                        let (ap, am) = (f.eval(&xp), f.eval(&xm));
                        for r in 0..2 {
                            let fd = (ap[r] - am[r]) / (2.0 * step);
                            assert!((fd - j[r][c]).abs() <= 1e-6 * (1.0 + j[r][c].abs()));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn regularized_field_converges() {
        let base = MonotoneField::new(Norm2::euclidean(), Yf::power(3.0).unwrap());
        let rows = field_convergence_report(
            &base,
            |e| {
                Ok(MonotoneField::new(
                    Norm2::euclidean(),
                    Yf::power(3.0).unwrap().regularize(e).unwrap(),
                ))
            },
            &[1e-1, 1e-2, 1e-3],
            &[10.0],
        )
        .unwrap();
        assert!(rows[0].deviation > rows[1].deviation && rows[1].deviation > rows[2].deviation);

        let quad = MonotoneField::new(Norm2::euclidean(), Yf::power(2.0).unwrap());
        let rows = field_convergence_report(
            &quad,
            |e| {
                Ok(MonotoneField::new(
                    Norm2::euclidean(),
                    Yf::power(2.0).unwrap().regularize(e).unwrap(),
                ))
            },
            &[1e-1, 1e-2],
            &[1.0, 10.0],
        )
        .unwrap();
        assert!(rows.iter().all(|r| r.deviation < 1e-13));
    }
}
