//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point scalar the solver and the function-space machinery are generic over.
///
/// Implemented for `f32` and `f64`. Most verification thresholds in the test suites
/// assume `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Converts a count into the scalar type.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + NumAssign
        + Debug
        + Display
        + Default
        + Send
        + Sync
        + 'static
{
}

/// Euclidean norm of a fixed-size vector.
#[inline]
pub fn norm<T: Real, const N: usize>(v: &[T; N]) -> T {
    dot(v, v).sqrt()
}

#[inline]
pub fn dot<T: Real, const N: usize>(a: &[T; N], b: &[T; N]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + *x * *y)
}

#[inline]
pub fn scale<T: Real, const N: usize>(v: &[T; N], s: T) -> [T; N] {
    let mut out = *v;
    out.iter_mut().for_each(|x| *x *= s);
    out
}

#[inline]
pub fn sub<T: Real, const N: usize>(a: &[T; N], b: &[T; N]) -> [T; N] {
    let mut out = *a;
    out.iter_mut().zip(b).for_each(|(x, y)| *x -= *y);
    out
}

#[inline]
pub fn add<T: Real, const N: usize>(a: &[T; N], b: &[T; N]) -> [T; N] {
    let mut out = *a;
    out.iter_mut().zip(b).for_each(|(x, y)| *x += *y);
    out
}

/// Square matrix stored row-major as nested arrays.
pub type Mat<T, const N: usize> = [[T; N]; N];

#[inline]
pub fn mat_vec<T: Real, const N: usize>(m: &Mat<T, N>, v: &[T; N]) -> [T; N] {
    let mut out = [T::zero(); N];
    for (o, row) in out.iter_mut().zip(m) {
        *o = dot(row, v);
    }
    out
}

/// Quadratic form `vᵀ M w`.
#[inline]
pub fn bilinear<T: Real, const N: usize>(m: &Mat<T, N>, v: &[T; N], w: &[T; N]) -> T {
    dot(v, &mat_vec(m, w))
}

#[inline]
pub fn outer<T: Real, const N: usize>(a: &[T; N], b: &[T; N]) -> Mat<T, N> {
    let mut out = [[T::zero(); N]; N];
    for i in 0..N {
        for j in 0..N {
            out[i][j] = a[i] * b[j];
        }
    }
    out
}

#[inline]
pub fn identity<T: Real, const N: usize>() -> Mat<T, N> {
    let mut out = [[T::zero(); N]; N];
    for (i, row) in out.iter_mut().enumerate() {
        row[i] = T::one();
    }
    out
}

/// Eigenvalues of a symmetric matrix in ascending order (cyclic Jacobi).
pub fn symmetric_eigenvalues<T: Real, const N: usize>(m: &Mat<T, N>) -> [T; N] {
    if N == 2 {
        let (a, b, c) = (m[0][0], m[0][1], m[1][1]);
        let half_tr = (a + c) / T::lit(2.0);
        let disc = (((a - c) / T::lit(2.0)).powi(2) + b * b).sqrt();
        let mut out = [T::zero(); N];
        out[0] = half_tr - disc;
        out[1] = half_tr + disc;
        return out;
    }
    let mut a = *m;
    for _sweep in 0..64 {
        let mut off = T::zero();
        for i in 0..N {
            for j in (i + 1)..N {
                off += a[i][j] * a[i][j];
            }
        }
        if off <= T::epsilon() * T::epsilon() * frobenius_sq(&a) {
            break;
        }
        for p in 0..N {
            for q in (p + 1)..N {
                if a[p][q] == T::zero() {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (T::lit(2.0) * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..N {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..N {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut out = [T::zero(); N];
    for (i, o) in out.iter_mut().enumerate() {
        *o = a[i][i];
    }
    out.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    out
}

fn frobenius_sq<T: Real, const N: usize>(a: &Mat<T, N>) -> T {
    a.iter().flatten().fold(T::zero(), |acc, x| acc + *x * *x)
}
