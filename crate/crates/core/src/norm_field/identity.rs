use crate::geometry::Domain2D;
use crate::scalar::{Mat, Real};

use super::NormError;

/// A twice differentiable planar vector field given through value and Jacobian
/// oracles. The Jacobian is indexed `[i][j] = ∂_j V^i`.
pub trait SmoothField2<T: Real> {
    fn value(&self, x: &[T; 2]) -> [T; 2];
    fn jacobian(&self, x: &[T; 2]) -> Mat<T, 2>;
}

/// Dense bivariate polynomial `Σ c[i][j] xⁱ yʲ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly2<T> {
    coeffs: Vec<Vec<T>>,
}

impl<T: Real> Poly2<T> {
    /// Builds from `coeffs[i][j]`, the coefficient of `xⁱ yʲ`.
    pub fn new(coeffs: Vec<Vec<T>>) -> Self {
        Self { coeffs }
    }

    pub fn constant(c: T) -> Self {
        Self::new(vec![vec![c]])
    }

    pub fn coeffs(&self) -> &[Vec<T>] {
        &self.coeffs
    }

    pub fn eval(&self, x: &[T; 2]) -> T {
        // Horner in x of Horner-in-y rows
        self.coeffs.iter().rev().fold(T::zero(), |acc, row| {
            acc * x[0] + row.iter().rev().fold(T::zero(), |r, c| r * x[1] + *c)
        })
    }

    /// Partial derivative in coordinate `axis` (0 for x, 1 for y).
    pub fn derivative(&self, axis: usize) -> Self {
        let mut out: Vec<Vec<T>> = vec![Vec::new(); self.coeffs.len()];
        for (i, row) in self.coeffs.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                let (power, ti, tj) = match axis {
                    0 if i > 0 => (i, i - 1, j),
                    1 if j > 0 => (j, i, j - 1),
                    _ => continue,
                };
                let target = &mut out[ti];
                if target.len() <= tj {
                    target.resize(tj + 1, T::zero());
                }
                target[tj] += *c * T::from_count(power);
            }
        }
        if out.iter().all(Vec::is_empty) {
            return Self::constant(T::zero());
        }
        Self::new(out)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![Vec::new(); n];
        for (i, row) in out.iter_mut().enumerate() {
            let a = self.coeffs.get(i).map(Vec::as_slice).unwrap_or(&[]);
            let b = other.coeffs.get(i).map(Vec::as_slice).unwrap_or(&[]);
            let m = a.len().max(b.len());
            *row = (0..m)
                .map(|j| *a.get(j).unwrap_or(&T::zero()) + *b.get(j).unwrap_or(&T::zero()))
                .collect();
        }
        Self::new(out)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let rows = self.coeffs.len() + other.coeffs.len() - 1;
        let mut out = vec![Vec::<T>::new(); rows];
        for (i, ra) in self.coeffs.iter().enumerate() {
            for (j, ca) in ra.iter().enumerate() {
                for (k, rb) in other.coeffs.iter().enumerate() {
                    for (l, cb) in rb.iter().enumerate() {
                        let row = &mut out[i + k];
                        while row.len() <= j + l {
                            row.push(T::zero());
                        }
                        row[j + l] += *ca * *cb;
                    }
                }
            }
        }
        Self::new(out)
    }

    pub fn scale(&self, s: T) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .map(|r| r.iter().map(|c| *c * s).collect())
                .collect(),
        )
    }
}

/// Planar vector field with polynomial components.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyField2<T> {
    pub components: [Poly2<T>; 2],
}

impl<T: Real> PolyField2<T> {
    pub fn new(vx: Poly2<T>, vy: Poly2<T>) -> Self {
        Self {
            components: [vx, vy],
        }
    }

    /// Divergence as a polynomial.
    pub fn divergence(&self) -> Poly2<T> {
        self.components[0]
            .derivative(0)
            .add(&self.components[1].derivative(1))
    }
}

impl<T: Real> SmoothField2<T> for PolyField2<T> {
    fn value(&self, x: &[T; 2]) -> [T; 2] {
        [self.components[0].eval(x), self.components[1].eval(x)]
    }

    fn jacobian(&self, x: &[T; 2]) -> Mat<T, 2> {
        let mut out = [[T::zero(); 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.components[i].derivative(j).eval(x);
            }
        }
        out
    }
}

/// Residuals of the divergence identity and its integrated boundary form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityResidual<T> {
    /// Max over interior nodes of `|(div V)(div W) − tr(∇V∇W) − div(V div W − ∇W V)|`.
    pub pointwise: T,
    /// `|∫(div V)(div W) − ∫tr(∇V∇W) − ∮((div W) V·ν − ∇W V·ν)|`.
    pub integral: T,
    /// Max over boundary nodes of the gap between the full and tangential boundary integrands.
    pub tangential: T,
    /// Scale of the integrated terms, for relative comparisons.
    pub scale: T,
}

impl<T: Real> IdentityResidual<T> {
    pub fn max(&self) -> T {
        self.pointwise.max(self.integral).max(self.tangential)
    }
}

fn div<T: Real>(j: &Mat<T, 2>) -> T {
    j[0][0] + j[1][1]
}

fn trace_product<T: Real>(a: &Mat<T, 2>, b: &Mat<T, 2>) -> T {
    let mut s = T::zero();
    for i in 0..2 {
        for k in 0..2 {
            s += a[i][k] * b[k][i];
        }
    }
    s
}

fn apply<T: Real>(m: &Mat<T, 2>, v: &[T; 2]) -> [T; 2] {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

/// Verifies `(div V)(div W) = tr(∇V∇W) + div(V div W − ∇W V)` on `omega`.
///
/// The divergence of `Z = V div W − ∇W V` is taken by fourth-order central differences
/// of `Z`, built from the value and Jacobian oracles only, so the check is independent
/// of the product rule. The integral form is evaluated with interior and boundary
/// quadrature of the given order.
pub fn check_divergence_identity<T, V, W>(
    v: &V,
    w: &W,
    omega: &Domain2D<T>,
    order: usize,
) -> Result<IdentityResidual<T>, NormError>
where
    T: Real,
    V: SmoothField2<T>,
    W: SmoothField2<T>,
{
    let z = |x: &[T; 2]| {
        let jw = w.jacobian(x);
        let vv = v.value(x);
        let dw = div(&jw);
        let gv = apply(&jw, &vv);
        [vv[0] * dw - gv[0], vv[1] * dw - gv[1]]
    };
    let interior = omega.interior_quadrature(order);
    let boundary = omega.boundary_quadrature(order);
    let mut pointwise = T::zero();
    let mut lhs = T::zero();
    let mut tr = T::zero();
    for (x, wt) in &interior {
        let (jv, jw) = (v.jacobian(x), w.jacobian(x));
        let l = div(&jv) * div(&jw);
        let t = trace_product(&jv, &jw);
        let h = T::lit(1e-3) * T::one().max(x[0].abs().max(x[1].abs()));
        let mut dz = T::zero();
        for axis in 0..2 {
            let shifted = |k: T| {
                let mut y = *x;
                y[axis] += k * h;
                z(&y)[axis]
            };
            let two = T::lit(2.0);
            dz += (T::lit(8.0) * (shifted(T::one()) - shifted(-T::one()))
                - (shifted(two) - shifted(-two)))
                / (T::lit(12.0) * h);
        }
        pointwise = pointwise.max((l - t - dz).abs());
        lhs += *wt * l;
        tr += *wt * t;
    }
    let mut flux = T::zero();
    let mut tangential = T::zero();
    for (x, nu, wt) in &boundary {
        let jw = w.jacobian(x);
        let vv = v.value(x);
        let vn = vv[0] * nu[0] + vv[1] * nu[1];
        let gv = apply(&jw, &vv);
        let full = div(&jw) * vn - (gv[0] * nu[0] + gv[1] * nu[1]);
        flux += *wt * full;
        // tangential form: div_T W V·ν − ∇_T W V_T·ν
        let jn = apply(&jw, nu);
        let div_t = div(&jw) - (jn[0] * nu[0] + jn[1] * nu[1]);
        let vt = [vv[0] - vn * nu[0], vv[1] - vn * nu[1]];
        let gvt = apply(&jw, &vt);
        let tang = div_t * vn - (gvt[0] * nu[0] + gvt[1] * nu[1]);
        tangential = tangential.max((full - tang).abs());
    }
    let scale = lhs.abs().max(tr.abs()).max(flux.abs());
    Ok(IdentityResidual {
        pointwise,
        integral: (lhs - tr - flux).abs(),
        tangential,
        scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    type P = Poly2<f64>;

    #[test]
    fn polynomial_algebra() {
        // (1 + x y)(x − y)
        let a = P::new(vec![vec![1.0], vec![0.0, 1.0]]);
        let b = P::new(vec![vec![0.0, -1.0], vec![1.0]]);
        let c = a.mul(&b);
        let x = [0.7, -1.3];
        assert!((c.eval(&x) - (1.0 + x[0] * x[1]) * (x[0] - x[1])).abs() < 1e-14);
        let dx = c.derivative(0);
        // ∂x = (x − y)y + (1 + xy)
        let expect = (x[0] - x[1]) * x[1] + 1.0 + x[0] * x[1];
        assert!((dx.eval(&x) - expect).abs() < 1e-14);
    }

    #[test]
    fn identity_field_on_disk() {
        let id = PolyField2::new(
            P::new(vec![vec![0.0], vec![1.0]]),
            P::new(vec![vec![0.0, 1.0]]),
        );
        let disk = Domain2D::disk(1.0).unwrap();
        let r = check_divergence_identity(&id, &id, &disk, 8).unwrap();
        // pointwise: 4 = 2 + 2; integrated: 4π = 2π + 2π
        assert!(r.max() < 1e-10, "{r:?}");
        assert!((r.scale - 4.0 * std::f64::consts::PI).abs() < 1e-10);
    }

    #[test]
    fn constant_field_gives_zero() {
        let c = PolyField2::new(P::constant(2.0), P::constant(-1.0));
        let sq = Domain2D::polygon(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        let r = check_divergence_identity(&c, &c, &sq, 4).unwrap();
        assert_eq!(r.scale, 0.0);
        assert!(r.max() < 1e-14);
    }
}
