use crate::scalar::{self, bilinear, identity, norm, outer, symmetric_eigenvalues, Mat, Real};

use super::NormError;

/// The families of norms `H` that can be built.
#[derive(Debug, Clone, PartialEq)]
pub enum NormKind<T, const N: usize> {
    Euclidean,
    /// `H(ξ) = √(ξᵀ M ξ)` with `M` symmetric positive definite.
    Gauge { m: Mat<T, N> },
    /// `H(ξ) = (α K(ξ)^p + β |ξ|^p)^(1/p)` with `K` the `ℓ_q` norm.
    PowerSum { p: T, q: T, alpha: T, beta: T },
}

/// A norm `H` on `ℝᴺ` with derivative oracles and ellipticity constants.
///
/// `lambda` and `big_lambda` bound the quadratic form of `½∇²H²` on the unit sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct AnisotropicNorm<T, const N: usize> {
    kind: NormKind<T, N>,
    lambda: T,
    big_lambda: T,
}

impl<T: Real, const N: usize> AnisotropicNorm<T, N> {
    pub fn euclidean() -> Self {
        Self {
            kind: NormKind::Euclidean,
            lambda: T::one(),
            big_lambda: T::one(),
        }
    }

    pub fn gauge(m: Mat<T, N>) -> Result<Self, NormError> {
        for i in 0..N {
            for j in 0..N {
                let d = (m[i][j] - m[j][i]).abs();
                if d > T::lit(1e-12) * (m[i][j].abs() + m[j][i].abs() + T::one()) {
                    return Err(NormError::Asymmetric);
                }
            }
        }
        let ev = symmetric_eigenvalues(&m);
        if !(ev[0] > T::zero()) {
            return Err(NormError::NotPositiveDefinite(ev[0].as_f64()));
        }
        Ok(Self {
            kind: NormKind::Gauge { m },
            lambda: ev[0],
            big_lambda: ev[N - 1],
        })
    }

    pub fn power_sum(p: T, q: T, alpha: T, beta: T) -> Result<Self, NormError> {
        if !(p > T::one()) || !(q >= T::lit(2.0)) {
            return Err(NormError::InvalidParameters(format!(
                "power_sum needs p > 1 and q >= 2 (got p={p}, q={q})"
            )));
        }
        if alpha < T::zero() || beta < T::zero() || alpha + beta <= T::zero() {
            return Err(NormError::InvalidParameters(
                "power_sum weights must be non-negative and not both zero".into(),
            ));
        }
        let mut h = Self {
            kind: NormKind::PowerSum { p, q, alpha, beta },
            lambda: T::nan(),
            big_lambda: T::nan(),
        };
        let (lo, hi) = estimate_ellipticity(&h);
        if !(lo > T::lit(1e-8)) {
            return Err(NormError::Degenerate(lo.as_f64()));
        }
        h.lambda = lo;
        h.big_lambda = hi;
        Ok(h)
    }

    pub fn kind(&self) -> &NormKind<T, N> {
        &self.kind
    }

    /// Lower ellipticity constant of `½∇²H²`.
    pub fn lambda(&self) -> T {
        self.lambda
    }

    /// Upper ellipticity constant of `½∇²H²`.
    pub fn big_lambda(&self) -> T {
        self.big_lambda
    }

    pub fn eval(&self, xi: &[T; N]) -> T {
        match &self.kind {
            NormKind::Euclidean => norm(xi),
            NormKind::Gauge { m } => bilinear(m, xi, xi).max(T::zero()).sqrt(),
            NormKind::PowerSum { p, q, alpha, beta } => {
                let k = lq_norm(xi, *q);
                let e = norm(xi);
                let scale = k.max(e);
                if scale == T::zero() {
                    return T::zero();
                }
                // factor out the scale to keep the powers in range
                let s = *alpha * (k / scale).powf(*p) + *beta * (e / scale).powf(*p);
                scale * s.powf(T::one() / *p)
            }
        }
    }

    /// `∇H(ξ)`; zero at the origin, where `H` is not differentiable.
    pub fn grad(&self, xi: &[T; N]) -> [T; N] {
        if xi.iter().all(|x| *x == T::zero()) {
            return [T::zero(); N];
        }
        let u = unit(xi);
        match &self.kind {
            NormKind::Euclidean => u,
            NormKind::Gauge { m } => {
                let mu = scalar::mat_vec(m, &u);
                scalar::scale(&mu, T::one() / self.eval(&u))
            }
            NormKind::PowerSum { .. } => self.power_sum_derivatives(&u).1,
        }
    }

    /// `∇²H(ξ)` for `ξ ≠ 0`; (-1)-homogeneous.
    pub fn hessian(&self, xi: &[T; N]) -> Mat<T, N> {
        let len = norm(xi);
        let u = unit(xi);
        let mut out = match &self.kind {
            NormKind::PowerSum { .. } => self.power_sum_derivatives(&u).2,
            _ => {
                // ∇²H = (½∇²H² − ∇H⊗∇H) / H
                let h = self.eval(&u);
                let g = self.grad(&u);
                let mut hh = self.half_hessian_h2(&u);
                for i in 0..N {
                    for j in 0..N {
                        hh[i][j] = (hh[i][j] - g[i] * g[j]) / h;
                    }
                }
                hh
            }
        };
        out.iter_mut().flatten().for_each(|x| *x /= len);
        out
    }

    /// `½∇²H²(ξ)`, which is 0-homogeneous; evaluated on the unit sphere.
    pub fn half_hessian_h2(&self, xi: &[T; N]) -> Mat<T, N> {
        match &self.kind {
            NormKind::Euclidean => identity(),
            NormKind::Gauge { m } => *m,
            NormKind::PowerSum { .. } => {
                let u = unit(xi);
                let (h, g, hh) = self.power_sum_derivatives(&u);
                let mut out = outer(&g, &g);
                for i in 0..N {
                    for j in 0..N {
                        out[i][j] += h * hh[i][j];
                    }
                }
                out
            }
        }
    }

    /// `½∇H²(ξ) = H(ξ)∇H(ξ)`.
    pub fn half_grad_h2(&self, xi: &[T; N]) -> [T; N] {
        match &self.kind {
            NormKind::Euclidean => *xi,
            NormKind::Gauge { m } => scalar::mat_vec(m, xi),
            NormKind::PowerSum { .. } => scalar::scale(&self.grad(xi), self.eval(xi)),
        }
    }

    /// Value, gradient and Hessian of `H` at a unit vector for the power-sum family.
    fn power_sum_derivatives(&self, u: &[T; N]) -> (T, [T; N], Mat<T, N>) {
        let NormKind::PowerSum { p, q, alpha, beta } = self.kind else {
            unreachable!("power-sum derivatives requested for another norm family");
        };
        let one = T::one();
        let k = lq_norm(u, q);
        let mut dk = [T::zero(); N];
        for i in 0..N {
            dk[i] = u[i].abs().powf(q - one) * u[i].signum() * k.powf(one - q);
        }
        let mut d2k = outer(&dk, &dk);
        for i in 0..N {
            for j in 0..N {
                let diag = if i == j {
                    u[i].abs().powf(q - T::lit(2.0)) * k.powf(T::lit(2.0) - q)
                } else {
                    T::zero()
                };
                d2k[i][j] = (q - one) / k * (diag - d2k[i][j]);
            }
        }
        // on the unit sphere |u| = 1, ∇|u| = u, ∇²|u| = I − u⊗u
        let de = *u;
        let mut d2e = identity::<T, N>();
        for i in 0..N {
            for j in 0..N {
                d2e[i][j] -= u[i] * u[j];
            }
        }
        let s = alpha * k.powf(p) + beta;
        let h = s.powf(one / p);
        let mut g = [T::zero(); N];
        for i in 0..N {
            g[i] = alpha * k.powf(p - one) * dk[i] + beta * de[i];
        }
        let hp = h.powf(one - p);
        let grad = scalar::scale(&g, hp);
        let mut hess = [[T::zero(); N]; N];
        for i in 0..N {
            for j in 0..N {
                let dg = alpha * ((p - one) * k.powf(p - T::lit(2.0)) * dk[i] * dk[j] + k.powf(p - one) * d2k[i][j])
                    + beta * ((p - one) * de[i] * de[j] + d2e[i][j]);
                hess[i][j] = hp * dg + (one - p) * h.powf(-p) * g[i] * grad[j];
            }
        }
        // symmetrize the rounding
        for i in 0..N {
            for j in (i + 1)..N {
                let m = T::lit(0.5) * (hess[i][j] + hess[j][i]);
                hess[i][j] = m;
                hess[j][i] = m;
            }
        }
        (h, grad, hess)
    }
}

/// Projection onto the unit sphere, robust for tiny vectors; the origin maps to `e₁`.
fn unit<T: Real, const N: usize>(xi: &[T; N]) -> [T; N] {
    let m = xi.iter().fold(T::zero(), |acc, x| acc.max(x.abs()));
    if m == T::zero() {
        let mut e = [T::zero(); N];
        e[0] = T::one();
        return e;
    }
    let v = scalar::scale(xi, T::one() / m);
    scalar::scale(&v, T::one() / norm(&v))
}

fn lq_norm<T: Real, const N: usize>(xi: &[T; N], q: T) -> T {
    let m = xi.iter().fold(T::zero(), |acc, x| acc.max(x.abs()));
    if m == T::zero() {
        return T::zero();
    }
    let s = xi.iter().fold(T::zero(), |acc, x| acc + (x.abs() / m).powf(q));
    m * s.powf(T::one() / q)
}

/// Extremal eigenvalues of `½∇²H²` over the unit sphere.
///
/// Directions are sampled (10⁴ angles in 2-D, a Halton set mapped to the sphere
/// otherwise); the extremal samples are then refined by a shrinking pattern search.
pub fn estimate_ellipticity<T: Real, const N: usize>(h: &AnisotropicNorm<T, N>) -> (T, T) {
    let dirs = sphere_sample::<T, N>(if N == 2 { 10_000 } else { 20_000 });
    let eig = |u: &[T; N]| {
        let ev = symmetric_eigenvalues(&h.half_hessian_h2(u));
        (ev[0], ev[N - 1])
    };
    let mut lo = (T::infinity(), dirs[0]);
    let mut hi = (T::neg_infinity(), dirs[0]);
    for d in &dirs {
        let (a, b) = eig(d);
        if a < lo.0 {
            lo = (a, *d);
        }
        if b > hi.0 {
            hi = (b, *d);
        }
    }
    let refine = |start: (T, [T; N]), sign: T| -> T {
        let mut best = start;
        let mut step = T::lit(if N == 2 { 2.0 * std::f64::consts::PI / 10_000.0 } else { 0.05 });
        let objective = |u: &[T; N]| {
            let (a, b) = eig(u);
            if sign > T::zero() {
                b
            } else {
                a
            }
        };
        while step > T::lit(1e-12) {
            let mut improved = false;
            for axis in 0..N {
                for dir in [T::one(), -T::one()] {
                    let mut trial = best.1;
                    trial[axis] += dir * step;
                    let len = norm(&trial);
                    let trial = scalar::scale(&trial, T::one() / len);
                    let v = objective(&trial);
                    if (v - best.0) * sign > T::zero() {
                        best = (v, trial);
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= T::lit(0.5);
            }
        }
        best.0
    };
    (refine(lo, -T::one()), refine(hi, T::one()))
}

fn sphere_sample<T: Real, const N: usize>(count: usize) -> Vec<[T; N]> {
    if N == 2 {
        return (0..count)
            .map(|k| {
                let th = 2.0 * std::f64::consts::PI * k as f64 / count as f64;
                let mut v = [T::zero(); N];
                v[0] = T::lit(th.cos());
                v[1] = T::lit(th.sin());
                v
            })
            .collect();
    }
    const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];
    let coords = N.div_ceil(2) * 2;
    assert!(coords <= PRIMES.len(), "sphere sampling supports up to 16 dimensions");
    (1..=count)
        .filter_map(|k| {
            // Box–Muller on Halton points gives Gaussian directions
            let mut g = vec![0.0f64; coords];
            for pair in 0..coords / 2 {
                let u1 = radical_inverse(k as u64, PRIMES[2 * pair]).max(1e-300);
                let u2 = radical_inverse(k as u64, PRIMES[2 * pair + 1]);
                let r = (-2.0 * u1.ln()).sqrt();
                let th = 2.0 * std::f64::consts::PI * u2;
                g[2 * pair] = r * th.cos();
                g[2 * pair + 1] = r * th.sin();
            }
            let len = g[..N].iter().map(|x| x * x).sum::<f64>().sqrt();
            if len == 0.0 {
                return None;
            }
            let mut v = [T::zero(); N];
            for i in 0..N {
                v[i] = T::lit(g[i] / len);
            }
            Some(v)
        })
        .collect()
}

fn radical_inverse(mut k: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while k > 0 {
        out += (k % base) as f64 * inv;
        k /= base;
        inv /= base as f64;
    }
    out
}
